//! Regulatory layer: appliance decision rules and the central controller.
//!
//! Every appliance runs a duty cycle of `on_steps` out of every `period` steps.
//! Reactive rules move the cycle by one step per triggering step: they postpone
//! (shift +1) when the sensed voltage is below the band and advance (shift -1)
//! when it is above. The accumulated shift saturates at `±max_shift`.
//!
//! How a shift moves the duty window is selected by [`ShiftMode`]. Under
//! [`ShiftMode::Onset`] only the turn-on edge moves: a postponed appliance
//! starts later but still stops at its scheduled time, so a population that
//! postpones together sheds load. [`ShiftMode::Translate`] moves the whole
//! window instead.

use std::fmt;

use thiserror::Error;

use crate::circuit::{CircuitConfig, CircuitError};
use crate::scalar::{abs, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegulatoryError {
    #[error("agent {id}: period must be positive")]
    ZeroPeriod { id: usize },
    #[error("agent {id}: on_steps must lie in [1, period)")]
    DutyOutOfRange { id: usize },
    #[error("agent {id}: phase must lie in [0, period)")]
    PhaseOutOfRange { id: usize },
    #[error("agent {id}: v_low must be below v_high")]
    InvertedBand { id: usize },
    #[error("agent {id}: reaction probability must lie in [0, 1]")]
    BadProbability { id: usize },
    #[error("sensed voltage must be positive")]
    NonPositiveSense,
    #[error("forecast covers {got} agents but the circuit has {expected} branches")]
    ForecastMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Decision rule of one appliance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    /// Follows its duty cycle and never reacts.
    PassiveCycle,
    /// Postpones below the band and advances above it, every triggering step.
    ReactiveThreshold,
    /// Like `ReactiveThreshold`, but each reaction happens with probability `prob`.
    ProbabilisticReactive { prob: f64 },
    /// Shifts only when the central controller tells it to.
    Commanded,
}

impl Rule {
    pub fn kind(&self) -> RuleKind {
        match self {
            Rule::PassiveCycle => RuleKind::PassiveCycle,
            Rule::ReactiveThreshold => RuleKind::ReactiveThreshold,
            Rule::ProbabilisticReactive { .. } => RuleKind::ProbabilisticReactive,
            Rule::Commanded => RuleKind::Commanded,
        }
    }
}

/// Rule without parameters; what the information layer reasons about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    PassiveCycle,
    ReactiveThreshold,
    ProbabilisticReactive,
    Commanded,
}

impl RuleKind {
    pub fn name(&self) -> &'static str {
        match self {
            RuleKind::PassiveCycle => "passive",
            RuleKind::ReactiveThreshold => "reactive",
            RuleKind::ProbabilisticReactive => "probabilistic",
            RuleKind::Commanded => "commanded",
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How an accumulated shift moves the duty window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShiftMode {
    /// The turn-on edge moves by `shift`; the turn-off edge stays put. The
    /// effective shift is clamped to `[on_steps - period, on_steps]`, i.e.
    /// between "always on" and "never on".
    #[default]
    Onset,
    /// The whole window moves by `shift`.
    Translate,
}

/// When a probabilistic agent draws its reaction decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReactionDraw {
    /// A fresh draw on every triggering step.
    #[default]
    PerStep,
    /// One draw when the sensed voltage leaves the band, kept until it returns
    /// or leaves on the other side.
    PerEvent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig<S> {
    pub id: usize,
    pub period: u32,
    pub on_steps: u32,
    pub phase: u32,
    pub rule: Rule,
    pub v_low: S,
    pub v_high: S,
    pub max_shift: u32,
    pub shift_mode: ShiftMode,
    pub reaction_draw: ReactionDraw,
}

impl<S: Scalar> AgentConfig<S> {
    /// Agent with `max_shift = period` and default shift/draw modes.
    pub fn new(
        id: usize,
        period: u32,
        on_steps: u32,
        phase: u32,
        rule: Rule,
        v_low: S,
        v_high: S,
    ) -> Self {
        Self {
            id,
            period,
            on_steps,
            phase,
            rule,
            v_low,
            v_high,
            max_shift: period,
            shift_mode: ShiftMode::default(),
            reaction_draw: ReactionDraw::default(),
        }
    }

    pub fn validate(&self) -> Result<(), RegulatoryError> {
        let id = self.id;
        if self.period == 0 {
            return Err(RegulatoryError::ZeroPeriod { id });
        }
        if self.on_steps == 0 || self.on_steps >= self.period {
            return Err(RegulatoryError::DutyOutOfRange { id });
        }
        if self.phase >= self.period {
            return Err(RegulatoryError::PhaseOutOfRange { id });
        }
        if self.v_low >= self.v_high {
            return Err(RegulatoryError::InvertedBand { id });
        }
        if let Rule::ProbabilisticReactive { prob } = self.rule {
            if !(0.0..=1.0).contains(&prob) {
                return Err(RegulatoryError::BadProbability { id });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Action {
    #[default]
    Hold,
    Postpone,
    Advance,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::Hold => "hold",
            Action::Postpone => "postpone",
            Action::Advance => "advance",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Instruction {
    pub agent_id: usize,
    pub action: Action,
}

/// Which side of the band an out-of-band reading is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Excursion {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct AgentState {
    /// Accumulated postponement in steps; positive means delayed.
    pub shift: i32,
    /// Controller instruction waiting to be applied (`Hold` means none).
    pub pending: Action,
    /// Latched reaction decision for [`ReactionDraw::PerEvent`].
    pub event: Option<(Excursion, bool)>,
}

impl AgentState {
    fn shifted(self, by: i32, max_shift: u32) -> Self {
        let max = max_shift as i32;
        Self {
            shift: (self.shift + by).clamp(-max, max),
            ..self
        }
    }
}

/// Whether the duty cycle asks for the flexible load at step `t`.
pub fn desired_load<S>(config: &AgentConfig<S>, state: &AgentState, t: u64) -> bool {
    load_with_shift(config, state.shift, t)
}

fn load_with_shift<S>(config: &AgentConfig<S>, shift: i32, t: u64) -> bool {
    let period = config.period as i64;
    let on = config.on_steps as i64;
    let pos = (t as i64 - config.phase as i64).rem_euclid(period);
    match config.shift_mode {
        ShiftMode::Translate => (pos - shift as i64).rem_euclid(period) < on,
        ShiftMode::Onset => {
            let start = (shift as i64).clamp(on - period, on);
            (pos - start).rem_euclid(period) < on - start
        }
    }
}

fn excursion<S: Scalar>(config: &AgentConfig<S>, sensed_v: &S) -> Option<Excursion> {
    if *sensed_v < config.v_low {
        Some(Excursion::Low)
    } else if *sensed_v > config.v_high {
        Some(Excursion::High)
    } else {
        None
    }
}

fn reaction_shift(e: Excursion) -> i32 {
    match e {
        Excursion::Low => 1,
        Excursion::High => -1,
    }
}

/// Advances one agent by one step. `draw` is a uniform value in `[0, 1)`; rules
/// that do not need randomness ignore it. Returns the new state and whether the
/// flexible load is connected at step `t`.
pub fn agent_step<S: Scalar>(
    config: &AgentConfig<S>,
    state: &AgentState,
    sensed_v: &S,
    draw: f64,
    t: u64,
) -> (AgentState, bool) {
    let next = match config.rule {
        Rule::PassiveCycle => *state,
        Rule::ReactiveThreshold => match excursion(config, sensed_v) {
            Some(e) => state.shifted(reaction_shift(e), config.max_shift),
            None => *state,
        },
        Rule::ProbabilisticReactive { prob } => {
            let exc = excursion(config, sensed_v);
            let (react, event) = match (exc, config.reaction_draw) {
                (None, _) => (false, None),
                (Some(_), ReactionDraw::PerStep) => (draw < prob, None),
                (Some(e), ReactionDraw::PerEvent) => match state.event {
                    Some((prev, decided)) if prev == e => (decided, state.event),
                    _ => {
                        let decided = draw < prob;
                        (decided, Some((e, decided)))
                    }
                },
            };
            let base = AgentState { event, ..*state };
            match exc {
                Some(e) if react => base.shifted(reaction_shift(e), config.max_shift),
                _ => base,
            }
        }
        Rule::Commanded => {
            let by = match state.pending {
                Action::Hold => 0,
                Action::Postpone => 1,
                Action::Advance => -1,
            };
            AgentState {
                pending: Action::Hold,
                ..state.shifted(by, config.max_shift)
            }
        }
    };
    let on = desired_load(config, &next, t);
    (next, on)
}

/// Predicted load of one agent at the coming step under each possible
/// instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadForecast {
    pub hold: bool,
    pub postpone: bool,
    pub advance: bool,
}

impl LoadForecast {
    /// Forecast for a commanded agent at step `t`.
    pub fn commanded<S>(config: &AgentConfig<S>, state: &AgentState, t: u64) -> Self {
        let at = |by: i32| {
            let max = config.max_shift as i32;
            load_with_shift(config, (state.shift + by).clamp(-max, max), t)
        };
        Self {
            hold: at(0),
            postpone: at(1),
            advance: at(-1),
        }
    }

    /// Forecast for an agent the controller cannot steer.
    pub fn fixed(on: bool) -> Self {
        Self {
            hold: on,
            postpone: on,
            advance: on,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band<S> {
    pub v_low: S,
    pub v_high: S,
}

impl<S: Scalar> Band<S> {
    pub fn new(v_low: S, v_high: S) -> Self {
        Self { v_low, v_high }
    }

    pub fn contains(&self, v: &S) -> bool {
        *v >= self.v_low && *v <= self.v_high
    }

    pub fn midpoint(&self) -> S {
        (self.v_low.clone() + self.v_high.clone()) / S::lit(2.0)
    }
}

/// Plans one round of central control.
///
/// The controller predicts the load voltage for the coming step from the
/// current source voltage and the number of agents that will be connected if
/// nobody is instructed (`forecast[i].hold`). If that prediction is inside the
/// band every agent holds. Otherwise it picks the connected count whose
/// predicted voltage is closest to `v_nominal` (ties toward fewer loads) and
/// instructs just enough agents to close the gap: agents whose postponement
/// disconnects them when load must drop, agents whose advance connects them
/// when load must rise, lowest id first.
///
/// Returns one instruction per agent.
pub fn controller_plan<S: Scalar>(
    sensed_v: &S,
    v_nominal: &S,
    band: &Band<S>,
    circuit: &CircuitConfig<S>,
    v_source_now: &S,
    forecast: &[LoadForecast],
) -> Result<Vec<Instruction>, RegulatoryError> {
    if *sensed_v <= S::zero() {
        return Err(RegulatoryError::NonPositiveSense);
    }
    if forecast.len() != circuit.len() {
        return Err(RegulatoryError::ForecastMismatch {
            expected: circuit.len(),
            got: forecast.len(),
        });
    }
    let mut plan: Vec<Instruction> = (0..forecast.len())
        .map(|agent_id| Instruction {
            agent_id,
            action: Action::Hold,
        })
        .collect();

    let n_on = forecast.iter().filter(|f| f.hold).count();
    if band.contains(&circuit.v_load_for_count(v_source_now.clone(), n_on)?) {
        return Ok(plan);
    }

    let mut n_target = 0;
    let mut best: Option<S> = None;
    for n in 0..=circuit.len() {
        let err = abs(circuit.v_load_for_count(v_source_now.clone(), n)? - v_nominal.clone());
        if best.as_ref().is_none_or(|b| err < *b) {
            best = Some(err);
            n_target = n;
        }
    }

    let (action, wanted) = if n_target < n_on {
        (Action::Postpone, n_on - n_target)
    } else {
        (Action::Advance, n_target - n_on)
    };
    let candidates = forecast.iter().enumerate().filter(|(_, f)| match action {
        Action::Postpone => f.hold && !f.postpone,
        Action::Advance => !f.hold && f.advance,
        Action::Hold => false,
    });
    for (id, _) in candidates.take(wanted) {
        plan[id].action = action;
    }
    Ok(plan)
}
