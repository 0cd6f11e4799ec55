//! Multi-layer simulation of IoT-mediated grid regulation.
//!
//! * [`algebra`]: symbolic algebra of reflexive processes (structures of
//!   awareness).
//! * [`circuit`]: physical layer, a DC toy model whose load voltage stands in
//!   for grid frequency.
//! * [`regulatory`]: appliance decision rules and the central controller.
//! * [`awareness`]: derives a scenario's structure of awareness from its
//!   wiring and checks that every rule is supported by it.
//! * [`engine`]: deterministic discrete-time loop, traces and stability
//!   metrics.
//!
//! The numeric layers are generic over the scalar type; the aliases at the
//! crate root fix it to `f64`.

pub mod algebra;
pub mod awareness;
pub mod circuit;
pub mod engine;
pub mod regulatory;
pub mod scalar;

pub use algebra::{parse_expression, AlgebraError, Atom, Polynomial, Word};
pub use awareness::{AwarenessDecl, AwarenessError, Violation};
pub use circuit::{CircuitError, LoadState};
pub use engine::{run, run_batch, EngineError, Window};
pub use regulatory::{Action, Instruction, ReactionDraw, Rule, RuleKind, ShiftMode};
pub use scalar::{Real, Scalar};

pub type CircuitConfig = circuit::CircuitConfig<f64>;
pub type CircuitSolution = circuit::CircuitSolution<f64>;
pub type Branch = circuit::Branch<f64>;
pub type AgentConfig = regulatory::AgentConfig<f64>;
pub type Band = regulatory::Band<f64>;
pub type Scenario = engine::Scenario<f64>;
pub type Disturbance = engine::Disturbance<f64>;
pub type ControllerConfig = engine::ControllerConfig<f64>;
pub type Trace = engine::Trace<f64>;
pub type TraceStep = engine::TraceStep<f64>;
pub type Metrics = engine::Metrics<f64>;
pub type Calibration = engine::Calibration<f64>;

pub type CircuitConfigF32 = circuit::CircuitConfig<f32>;
pub type ScenarioF32 = engine::Scenario<f32>;
pub type TraceF32 = engine::Trace<f32>;
