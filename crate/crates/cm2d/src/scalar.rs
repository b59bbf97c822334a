//! Scalar abstraction for the numerical core.
//!
//! Every solver component is generic over a floating-point [`Scalar`] so the
//! same code runs in `f32` or `f64`. The trait is a pure capability bundle:
//! `num-traits` supplies arithmetic, constants and conversions, and
//! [`rustfft::FftNum`] makes the type transformable. Concrete `f64` aliases
//! for the main types live at the crate root; all shipped tolerances assume
//! `f64`.

use std::fmt::{Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar the solver is generic over.
///
/// Implemented for `f32` and `f64` via the blanket impl; no other types are
/// expected to satisfy the `FftNum` bound.
pub trait Scalar:
    Float + FloatConst + NumAssign + FromPrimitive + rustfft::FftNum + Display + LowerExp
{
    /// Converts an `f64` literal into this scalar type.
    ///
    /// All numeric literals in the crate go through this single choke point,
    /// which keeps generic code readable (`T::lit(0.5)`).
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal representable in any float scalar")
    }

    /// Converts a grid size or index into this scalar type.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("grid size representable in the float scalar")
    }
}

impl<T> Scalar for T where
    T: Float + FloatConst + NumAssign + FromPrimitive + rustfft::FftNum + Display + LowerExp
{
}
