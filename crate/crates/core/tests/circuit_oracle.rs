mod support;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use reflexgrid::circuit;
use reflexgrid::{Branch, CircuitConfig, LoadState};
use support::nodal::{Netlist, Resistor};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Netlist of the grid circuit: source node 1, bus node 2, one resistor per
/// connected element between the bus and ground.
fn netlist(r_s: f64, branches: &[Branch], on: &[bool], v: f64) -> (Netlist, Vec<Vec<usize>>) {
    let mut resistors = vec![Resistor {
        a: 1,
        b: 2,
        ohms: r_s,
    }];
    let mut per_branch = Vec::new();
    for (b, &flex) in branches.iter().zip(on) {
        let mut ids = vec![resistors.len()];
        resistors.push(Resistor {
            a: 2,
            b: 0,
            ohms: b.r_base,
        });
        if flex {
            ids.push(resistors.len());
            resistors.push(Resistor {
                a: 2,
                b: 0,
                ohms: b.r_flex,
            });
        }
        per_branch.push(ids);
    }
    (
        Netlist {
            nodes: 3,
            resistors,
            source_node: 1,
            volts: v,
        },
        per_branch,
    )
}

/// Resistance log-uniform in [0.1, 100] ohms.
fn ohms() -> impl Strategy<Value = f64> {
    (-1.0f64..=2.0).prop_map(|e| 10f64.powf(e))
}

fn instance() -> impl Strategy<Value = (f64, Vec<(f64, f64, bool)>, f64)> {
    (
        ohms(),
        prop::collection::vec((ohms(), ohms(), any::<bool>()), 1..=20),
        0.0f64..400.0,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matches_nodal_analysis((r_s, raw, v) in instance()) {
        let branches: Vec<Branch> = raw.iter().map(|&(r_base, r_flex, _)| Branch { r_base, r_flex }).collect();
        let on: Vec<bool> = raw.iter().map(|r| r.2).collect();
        let c = CircuitConfig::new(r_s, branches.clone()).unwrap();
        let s = c.solve(v, &LoadState::from(on.clone())).unwrap();

        let (net, per_branch) = netlist(r_s, &branches, &on, v);
        let o = net.solve();
        let tol = 1e-9;
        if v == 0.0 {
            prop_assert_eq!(s.v_load, 0.0);
            prop_assert_eq!(s.i_total, 0.0);
            return Ok(());
        }
        prop_assert!(rel(s.v_load, o.node_v[2]) <= tol);
        prop_assert!(rel(s.i_total, o.source_i) <= tol);
        for (i, ids) in per_branch.iter().enumerate() {
            let expected: f64 = ids.iter().map(|&r| net.resistor_current(&o, r)).sum();
            prop_assert!(rel(s.branch_currents[i], expected) <= tol);
        }

        // KCL at the bus and KVL around the source loop
        let kcl: f64 = s.branch_currents.iter().sum();
        prop_assert!(rel(kcl, s.i_total) <= tol);
        let kvl = v - s.i_total * r_s - s.v_load;
        prop_assert!(kvl.abs() <= tol * v);
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn exact_over_rationals() {
    let c = circuit::CircuitConfig::new(
        q(1, 20),
        vec![
            circuit::Branch {
                r_base: q(100, 1),
                r_flex: q(50, 1),
            },
            circuit::Branch {
                r_base: q(33, 1),
                r_flex: q(7, 3),
            },
            circuit::Branch {
                r_base: q(1, 2),
                r_flex: q(9, 1),
            },
        ],
    )
    .unwrap();
    let loads = LoadState::from(vec![true, false, true]);
    let s = c.solve(q(10, 1), &loads).unwrap();
    let g = q(1, 100) + q(1, 50) + q(1, 33) + q(2, 1) + q(1, 9);
    assert_eq!(
        s.v_load.clone() * (q(1, 1) + q(1, 20) * g.clone()),
        q(10, 1)
    );
    assert_eq!(s.i_total, s.v_load.clone() * g);
    let kcl = s.branch_currents.iter().fold(q(0, 1), |a, i| a + i.clone());
    assert_eq!(kcl, s.i_total);
    assert_eq!(q(10, 1) - s.i_total.clone() * q(1, 20), s.v_load);
}
