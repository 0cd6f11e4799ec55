//! Discrete-time simulation loop.
//!
//! Each step `t`:
//!
//! 1. the source voltage is `v_source_base`, minus `delta_v` inside the
//!    disturbance window `[t_start, t_end)`;
//! 2. every agent senses the load voltage recorded `sensing_delay` steps
//!    earlier (before that, the steady voltage of the undisturbed passive
//!    schedule at `t = 0`);
//! 3. on control steps, the controller plans from the same sensed value and
//!    deposits instructions into commanded agents;
//! 4. agents step in ascending id order, each with its own keyed random draw;
//! 5. the circuit is solved for the resulting load state and the step is
//!    recorded.
//!
//! A step's load voltage therefore depends only on earlier steps.

mod metrics;
mod rng;

use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{CircuitConfig, CircuitError, LoadState};
use crate::regulatory::{
    agent_step, controller_plan, desired_load, AgentConfig, AgentState, Band, LoadForecast,
    RegulatoryError, Rule,
};
use crate::scalar::Real;

pub use metrics::{compute_metrics, first_in_band, series_metrics, Metrics, Window};
pub use rng::DrawStream;

/// Default relative half-width of the regulation band (0.1 Hz out of 50 Hz).
pub const DEFAULT_BAND_RATIO: f64 = 0.002;

/// Above this many agents, shift recording is off unless asked for.
pub const SHIFT_RECORDING_LIMIT: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Regulatory(#[from] RegulatoryError),
    #[error("scenario has {agents} agents but the circuit has {branches} branches")]
    AgentCountMismatch { agents: usize, branches: usize },
    #[error("agent at position {position} has id {id}; ids must be 0..N-1 in order")]
    AgentIdOrder { position: usize, id: usize },
    #[error("disturbance window [{t_start}, {t_end}) does not fit in horizon {horizon}")]
    DisturbanceOutOfRange {
        t_start: u64,
        t_end: u64,
        horizon: u64,
    },
    #[error("band lower edge must be below the upper edge")]
    InvertedBand,
    #[error("control interval must be positive")]
    ZeroControlInterval,
    #[error("horizon must be positive")]
    ZeroHorizon,
    #[error("disturbance leaves a negative source voltage")]
    NegativeSource,
    #[error("agents do not share period and duty length")]
    HeterogeneousAgents,
    #[error("metrics window is empty")]
    EmptyWindow,
    #[error("metrics window ends at {end} but the trace has {len} steps")]
    WindowOutOfRange { end: u64, len: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disturbance<S> {
    pub t_start: u64,
    pub t_end: u64,
    /// Subtracted from the source voltage during `[t_start, t_end)`.
    pub delta_v: S,
}

impl<S: Real> Disturbance<S> {
    pub fn none() -> Self {
        Self {
            t_start: 0,
            t_end: 0,
            delta_v: S::zero(),
        }
    }

    pub fn is_active(&self, t: u64) -> bool {
        (self.t_start..self.t_end).contains(&t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig<S> {
    pub v_nominal: S,
    pub band: Band<S>,
    /// Plan on every step `t` with `t % interval == 0`.
    pub interval: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<S> {
    pub circuit: CircuitConfig<S>,
    pub v_source_base: S,
    pub disturbance: Disturbance<S>,
    pub agents: Vec<AgentConfig<S>>,
    pub controller: Option<ControllerConfig<S>>,
    pub band: Band<S>,
    pub horizon: u64,
    pub seed: u64,
    pub sensing_delay: u64,
    /// Record every agent's shift at every step. `None` means "only when
    /// there are at most [`SHIFT_RECORDING_LIMIT`] agents".
    pub record_shifts: Option<bool>,
}

impl<S: Real> Scenario<S> {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.agents.len() != self.circuit.len() {
            return Err(EngineError::AgentCountMismatch {
                agents: self.agents.len(),
                branches: self.circuit.len(),
            });
        }
        for (position, a) in self.agents.iter().enumerate() {
            if a.id != position {
                return Err(EngineError::AgentIdOrder { position, id: a.id });
            }
            a.validate()?;
        }
        if self.horizon == 0 {
            return Err(EngineError::ZeroHorizon);
        }
        let d = &self.disturbance;
        if d.t_start > d.t_end || d.t_end > self.horizon {
            return Err(EngineError::DisturbanceOutOfRange {
                t_start: d.t_start,
                t_end: d.t_end,
                horizon: self.horizon,
            });
        }
        if self.band.v_low >= self.band.v_high {
            return Err(EngineError::InvertedBand);
        }
        if let Some(c) = &self.controller {
            if c.interval == 0 {
                return Err(EngineError::ZeroControlInterval);
            }
            if c.band.v_low >= c.band.v_high {
                return Err(EngineError::InvertedBand);
            }
        }
        if self.v_source_base < S::zero() || self.source_at(d.t_start) < S::zero() {
            return Err(EngineError::NegativeSource);
        }
        Ok(())
    }

    pub fn source_at(&self, t: u64) -> S {
        if self.disturbance.is_active(t) {
            self.v_source_base - self.disturbance.delta_v
        } else {
            self.v_source_base
        }
    }

    pub fn records_shifts(&self) -> bool {
        self.record_shifts
            .unwrap_or(self.agents.len() <= SHIFT_RECORDING_LIMIT)
    }

    /// Steady load voltage of the undisturbed source with every agent
    /// following its unshifted schedule at `t = 0`.
    pub fn initial_sense(&self) -> Result<S, EngineError> {
        let initial = AgentState::default();
        let loads: Vec<bool> = self
            .agents
            .iter()
            .map(|a| desired_load(a, &initial, 0))
            .collect();
        Ok(self
            .circuit
            .solve_totals(self.v_source_base, &loads.into())?
            .0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep<S> {
    pub v_source: S,
    pub v_load: S,
    pub i_total: S,
    pub n_flex_on: usize,
}

/// Per-step record of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace<S> {
    steps: Vec<TraceStep<S>>,
    n_agents: usize,
    /// Row-major `[step][agent]`, present when shift recording is on.
    shifts: Option<Vec<i32>>,
}

impl<S: Real> Trace<S> {
    pub fn new(n_agents: usize, record_shifts: bool) -> Self {
        Self {
            steps: Vec::new(),
            n_agents,
            shifts: record_shifts.then(Vec::new),
        }
    }

    pub fn from_steps(steps: Vec<TraceStep<S>>) -> Self {
        Self {
            steps,
            n_agents: 0,
            shifts: None,
        }
    }

    pub fn steps(&self) -> &[TraceStep<S>] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn v_load_series(&self) -> Vec<S> {
        self.steps.iter().map(|s| s.v_load).collect()
    }

    pub fn has_shifts(&self) -> bool {
        self.shifts.is_some()
    }

    /// Agent shifts recorded at step `t`, if recording was on.
    pub fn shifts_at(&self, t: usize) -> Option<&[i32]> {
        let n = self.n_agents;
        self.shifts.as_ref().map(|s| &s[t * n..(t + 1) * n])
    }

    fn push(&mut self, step: TraceStep<S>, states: &[AgentState]) {
        self.steps.push(step);
        if let Some(shifts) = &mut self.shifts {
            shifts.extend(states.iter().map(|s| s.shift));
        }
    }
}

/// Runs a scenario to its horizon. Two runs of the same scenario produce
/// identical traces.
pub fn run<S: Real>(scenario: &Scenario<S>) -> Result<Trace<S>, EngineError> {
    scenario.validate()?;
    let agents = &scenario.agents;
    let n = agents.len();
    let draws = DrawStream::new(scenario.seed);
    let initial_sense = scenario.initial_sense()?;
    let delay = scenario.sensing_delay;

    let mut states = vec![AgentState::default(); n];
    let mut loads = LoadState::all_off(n);
    let mut forecast = Vec::with_capacity(n);
    let mut trace = Trace::new(n, scenario.records_shifts());
    trace.steps.reserve(scenario.horizon as usize);

    for t in 0..scenario.horizon {
        let v_source = scenario.source_at(t);
        let sensed = if t < delay {
            initial_sense
        } else {
            trace.steps[(t - delay) as usize].v_load
        };

        if let Some(ctrl) = &scenario.controller {
            if t % ctrl.interval == 0 {
                forecast.clear();
                forecast.extend(agents.iter().zip(&states).map(|(a, s)| match a.rule {
                    Rule::Commanded => LoadForecast::commanded(a, s, t),
                    _ => LoadForecast::fixed(desired_load(a, s, t)),
                }));
                let plan = controller_plan(
                    &sensed,
                    &ctrl.v_nominal,
                    &ctrl.band,
                    &scenario.circuit,
                    &v_source,
                    &forecast,
                )?;
                for ins in plan {
                    if agents[ins.agent_id].rule == Rule::Commanded {
                        states[ins.agent_id].pending = ins.action;
                    }
                }
            }
        }

        for ((agent, state), on) in agents
            .iter()
            .zip(states.iter_mut())
            .zip(loads.as_mut_slice())
        {
            // Draws are keyed, so skipping them for rules that ignore the value
            // does not change what other agents see.
            let draw = match agent.rule {
                Rule::ProbabilisticReactive { .. } => draws.draw(t, agent.id as u64),
                _ => 0.0,
            };
            let (next, flex) = agent_step(agent, state, &sensed, draw, t);
            *state = next;
            *on = flex;
        }

        let (v_load, i_total) = scenario.circuit.solve_totals(v_source, &loads)?;
        trace.push(
            TraceStep {
                v_source,
                v_load,
                i_total,
                n_flex_on: loads.count_on(),
            },
            &states,
        );
    }
    Ok(trace)
}

/// Runs independent scenarios in parallel. Results are in input order.
pub fn run_batch<S: Real>(scenarios: &[Scenario<S>]) -> Vec<Result<Trace<S>, EngineError>> {
    scenarios.par_iter().map(run).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration<S> {
    pub v_nominal: S,
    pub band: Band<S>,
    /// Expected number of connected flexible loads the nominal voltage is
    /// computed for.
    pub n_expected: usize,
}

/// Nominal load voltage at the expected number of connected flexible loads
/// (`N · on_steps / period`, rounded half away from zero) and a band of
/// `±band_ratio` around it.
pub fn calibrate_nominal<S: Real>(
    circuit: &CircuitConfig<S>,
    agents: &[AgentConfig<S>],
    v_source: S,
    band_ratio: S,
) -> Result<Calibration<S>, EngineError> {
    let first = agents.first().ok_or(EngineError::AgentCountMismatch {
        agents: 0,
        branches: circuit.len(),
    })?;
    if agents
        .iter()
        .any(|a| a.period != first.period || a.on_steps != first.on_steps)
    {
        return Err(EngineError::HeterogeneousAgents);
    }
    let expected = agents.len() as f64 * first.on_steps as f64 / first.period as f64;
    let n_expected = expected.round() as usize;
    let v_nominal = circuit.v_load_for_count(v_source, n_expected)?;
    Ok(Calibration {
        v_nominal,
        band: Band::new(
            v_nominal * (S::one() - band_ratio),
            v_nominal * (S::one() + band_ratio),
        ),
        n_expected,
    })
}
