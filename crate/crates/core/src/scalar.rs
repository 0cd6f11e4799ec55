//! Numeric abstraction for the physical and regulatory layers.
//!
//! The circuit solver only needs field arithmetic and ordering, so it is
//! written against [`Scalar`] and runs unchanged over `f32`, `f64` or an
//! exact rational type. The simulation engine additionally needs rounding,
//! absolute values and a printable decimal form, which [`Real`] supplies.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Field-like number usable by the circuit solver.
///
/// Implemented for every `Clone + Num + PartialOrd + FromPrimitive` type, which
/// covers the primitive floats and `num_rational::Ratio<T>`.
pub trait Scalar: Clone + Num + PartialOrd + FromPrimitive + Debug {
    /// Lossy conversion from `f64`. Panics only if the target type cannot
    /// represent a finite value, which does not happen for the supported types.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal representable in scalar type")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl<T> Scalar for T where T: Clone + Num + PartialOrd + FromPrimitive + Debug {}

/// Floating-point scalar used by the simulation engine.
pub trait Real: Scalar + Float + ToPrimitive + Display + Copy + Send + Sync + 'static {}

impl Real for f32 {}
impl Real for f64 {}

/// Absolute value over a [`Scalar`] (no `Signed` bound needed).
pub(crate) fn abs<S: Scalar>(x: S) -> S {
    if x < S::zero() {
        S::zero() - x
    } else {
        x
    }
}
