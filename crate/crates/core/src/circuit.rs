//! Physical layer: a DC source with internal resistance feeding `N` parallel
//! agent branches. Each branch is a base load, optionally paralleled by the
//! agent's flexible load.
//!
//! The load-bus voltage plays the role of grid frequency: connecting flexible
//! load raises the bank conductance and pulls the voltage down.
//!
//! The topology is fixed, so the solution is the closed-form voltage divider
//!
//! ```text
//! G      = Σ (1/r_base_i + on_i / r_flex_i)
//! v_load = v_source / (1 + r_source·G)
//! ```

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("circuit needs at least one branch")]
    NoBranches,
    #[error("{what} must be a positive resistance")]
    NonPositiveResistance { what: String },
    #[error("load state has {got} entries but the circuit has {expected} branches")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("source voltage must be non-negative")]
    NegativeSource,
    #[error("branches are not homogeneous")]
    Heterogeneous,
    #[error("{n_on} connected flexible loads requested but only {branches} branches exist")]
    CountOutOfRange { n_on: usize, branches: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch<S> {
    pub r_base: S,
    pub r_flex: S,
}

/// Validated circuit parameters. Per-branch conductances are cached at
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitConfig<S> {
    r_source: S,
    branches: Vec<Branch<S>>,
    g_base: Vec<S>,
    g_flex: Vec<S>,
    g_base_total: S,
    homogeneous: bool,
}

impl<S: Scalar> CircuitConfig<S> {
    pub fn new(r_source: S, branches: Vec<Branch<S>>) -> Result<Self, CircuitError> {
        if branches.is_empty() {
            return Err(CircuitError::NoBranches);
        }
        if r_source <= S::zero() {
            return Err(CircuitError::NonPositiveResistance {
                what: "r_source".into(),
            });
        }
        for (i, b) in branches.iter().enumerate() {
            if b.r_base <= S::zero() {
                return Err(CircuitError::NonPositiveResistance {
                    what: format!("r_base of branch {i}"),
                });
            }
            if b.r_flex <= S::zero() {
                return Err(CircuitError::NonPositiveResistance {
                    what: format!("r_flex of branch {i}"),
                });
            }
        }
        let g_base: Vec<S> = branches
            .iter()
            .map(|b| S::one() / b.r_base.clone())
            .collect();
        let g_flex = branches
            .iter()
            .map(|b| S::one() / b.r_flex.clone())
            .collect();
        let g_base_total = g_base.iter().cloned().fold(S::zero(), |a, g| a + g);
        let homogeneous = branches[1..].iter().all(|b| *b == branches[0]);
        Ok(Self {
            r_source,
            branches,
            g_base,
            g_flex,
            g_base_total,
            homogeneous,
        })
    }

    /// `n` identical branches.
    pub fn homogeneous(r_source: S, n: usize, r_base: S, r_flex: S) -> Result<Self, CircuitError> {
        Self::new(r_source, vec![Branch { r_base, r_flex }; n])
    }

    pub fn r_source(&self) -> &S {
        &self.r_source
    }

    pub fn branches(&self) -> &[Branch<S>] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    fn check_loads(&self, loads: &LoadState) -> Result<(), CircuitError> {
        if loads.len() != self.branches.len() {
            return Err(CircuitError::DimensionMismatch {
                expected: self.branches.len(),
                got: loads.len(),
            });
        }
        Ok(())
    }

    /// Total conductance of the parallel bank.
    pub fn conductance(&self, loads: &LoadState) -> Result<S, CircuitError> {
        self.check_loads(loads)?;
        Ok(self.bank_conductance(loads.as_slice()))
    }

    fn bank_conductance(&self, flex_on: &[bool]) -> S {
        flex_on
            .iter()
            .zip(&self.g_flex)
            .filter(|(on, _)| **on)
            .fold(self.g_base_total.clone(), |acc, (_, g)| acc + g.clone())
    }

    fn divider(&self, v_source: S, g: S) -> (S, S) {
        let denom = S::one() + self.r_source.clone() * g.clone();
        let v_load = v_source.clone() / denom.clone();
        let i_total = v_source * g / denom;
        (v_load, i_total)
    }

    pub fn solve(
        &self,
        v_source: S,
        loads: &LoadState,
    ) -> Result<CircuitSolution<S>, CircuitError> {
        let (v_load, i_total) = self.solve_totals(v_source, loads)?;
        let branch_currents = loads
            .as_slice()
            .iter()
            .enumerate()
            .map(|(i, &on)| {
                let mut g = self.g_base[i].clone();
                if on {
                    g = g + self.g_flex[i].clone();
                }
                v_load.clone() * g
            })
            .collect();
        Ok(CircuitSolution {
            v_load,
            i_total,
            branch_currents,
        })
    }

    /// Load voltage and source current only, without per-branch currents.
    pub fn solve_totals(&self, v_source: S, loads: &LoadState) -> Result<(S, S), CircuitError> {
        if v_source < S::zero() {
            return Err(CircuitError::NegativeSource);
        }
        self.check_loads(loads)?;
        Ok(self.divider(v_source, self.bank_conductance(loads.as_slice())))
    }

    /// Load voltage with exactly `n_on` flexible loads connected. Requires
    /// identical branches, so which loads are connected does not matter.
    pub fn v_load_for_count(&self, v_source: S, n_on: usize) -> Result<S, CircuitError> {
        if !self.is_homogeneous() {
            return Err(CircuitError::Heterogeneous);
        }
        if n_on > self.branches.len() {
            return Err(CircuitError::CountOutOfRange {
                n_on,
                branches: self.branches.len(),
            });
        }
        if v_source < S::zero() {
            return Err(CircuitError::NegativeSource);
        }
        let g = self.g_base_total.clone() + S::from_count(n_on) * self.g_flex[0].clone();
        Ok(self.divider(v_source, g).0)
    }
}

/// Which flexible loads are connected, one flag per branch.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LoadState {
    flex_on: Vec<bool>,
}

impl LoadState {
    pub fn new(flex_on: Vec<bool>) -> Self {
        Self { flex_on }
    }

    pub fn all_off(n: usize) -> Self {
        Self::new(vec![false; n])
    }

    pub fn all_on(n: usize) -> Self {
        Self::new(vec![true; n])
    }

    pub fn len(&self) -> usize {
        self.flex_on.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flex_on.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.flex_on
    }

    pub fn as_mut_slice(&mut self) -> &mut [bool] {
        &mut self.flex_on
    }

    pub fn count_on(&self) -> usize {
        self.flex_on.iter().filter(|&&on| on).count()
    }
}

impl From<Vec<bool>> for LoadState {
    fn from(v: Vec<bool>) -> Self {
        Self::new(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSolution<S> {
    pub v_load: S,
    pub i_total: S,
    pub branch_currents: Vec<S>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_branch() -> CircuitConfig<f64> {
        CircuitConfig::homogeneous(1.0, 2, 4.0, 4.0).unwrap()
    }

    #[test]
    fn equal_divider() {
        let c = CircuitConfig::<f64>::homogeneous(10.0, 1, 10.0, 1.0).unwrap();
        let s = c.solve(10.0, &LoadState::all_off(1)).unwrap();
        assert!((s.v_load - 5.0).abs() < 1e-12);
        assert!((s.i_total - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_branch_hand_value() {
        // G = 1/4 + 1/4 + 1/4 = 0.75 S, v = 12 / 1.75 = 48/7
        let s = two_branch().solve(12.0, &vec![true, false].into()).unwrap();
        assert!((s.v_load - 48.0 / 7.0).abs() < 1e-12);
        assert!((s.v_load - 6.857142857).abs() < 1e-9);
        let kcl: f64 = s.branch_currents.iter().sum();
        assert!((kcl - s.i_total).abs() <= 1e-9 * s.i_total);
    }

    #[test]
    fn connecting_flex_lowers_voltage() {
        let c = two_branch();
        let off = c.solve(12.0, &vec![true, false].into()).unwrap();
        let on = c.solve(12.0, &vec![true, true].into()).unwrap();
        assert!(on.v_load < off.v_load);
        let none = c.solve(12.0, &vec![false, false].into()).unwrap();
        assert!(off.v_load < none.v_load);
    }

    #[test]
    fn count_fast_path_matches_solve() {
        let c = CircuitConfig::<f64>::homogeneous(0.05, 10, 100.0, 50.0).unwrap();
        let mut prev = f64::INFINITY;
        for n in 0..=10 {
            let loads: LoadState = (0..10).map(|i| i < n).collect::<Vec<_>>().into();
            let v = c.v_load_for_count(10.0, n).unwrap();
            let full = c.solve(10.0, &loads).unwrap().v_load;
            assert!((v - full).abs() <= 1e-12 * full);
            assert!(v < prev);
            prev = v;
        }
        assert_eq!(
            c.v_load_for_count(10.0, 11),
            Err(CircuitError::CountOutOfRange {
                n_on: 11,
                branches: 10
            })
        );
    }

    #[test]
    fn rejects_bad_configs() {
        assert_eq!(
            CircuitConfig::<f64>::new(1.0, vec![]),
            Err(CircuitError::NoBranches)
        );
        assert!(matches!(
            CircuitConfig::homogeneous(0.0, 1, 1.0, 1.0),
            Err(CircuitError::NonPositiveResistance { .. })
        ));
        assert!(matches!(
            CircuitConfig::homogeneous(1.0, 1, -1.0, 1.0),
            Err(CircuitError::NonPositiveResistance { .. })
        ));
        assert!(matches!(
            CircuitConfig::homogeneous(1.0, 1, 1.0, 0.0),
            Err(CircuitError::NonPositiveResistance { .. })
        ));
        let c = two_branch();
        assert_eq!(
            c.solve(1.0, &LoadState::all_off(3)),
            Err(CircuitError::DimensionMismatch {
                expected: 2,
                got: 3
            })
        );
        assert_eq!(
            c.solve(-1.0, &LoadState::all_off(2)),
            Err(CircuitError::NegativeSource)
        );
    }

    #[test]
    fn heterogeneous_count_is_an_error() {
        let c = CircuitConfig::new(
            1.0,
            vec![
                Branch {
                    r_base: 1.0,
                    r_flex: 2.0,
                },
                Branch {
                    r_base: 1.0,
                    r_flex: 3.0,
                },
            ],
        )
        .unwrap();
        assert!(!c.is_homogeneous());
        assert_eq!(c.v_load_for_count(1.0, 1), Err(CircuitError::Heterogeneous));
    }

    #[test]
    fn runs_over_f32() {
        let c = CircuitConfig::<f32>::homogeneous(1.0, 2, 4.0, 4.0).unwrap();
        let s = c.solve(12.0, &vec![true, false].into()).unwrap();
        assert!((s.v_load - 48.0 / 7.0).abs() < 1e-5);
    }
}
