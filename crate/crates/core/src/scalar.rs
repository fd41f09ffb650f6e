//! Floating-point abstraction shared by the numeric kernels.

use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// f32 or f64.
pub trait Scalar: Float + FromPrimitive + NumAssign + Sum + Debug + Send + Sync + 'static {
    /// Converts an f64 constant; exact for f64, rounded for f32.
    fn lit(v: f64) -> Self;
}

impl Scalar for f32 {
    fn lit(v: f64) -> Self {
        v as f32
    }
}

impl Scalar for f64 {
    fn lit(v: f64) -> Self {
        v
    }
}
