//! Scalar abstraction shared by every algorithm in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the geometry kernels are generic over.
///
/// Implemented for `f32` and `f64`. Constants are produced through
/// [`Real::of`], which converts from an `f64` literal.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant into this scalar type.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }

    /// Converts a count into this scalar type.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossless-enough view as `f64` for diagnostics and reports.
    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// A tolerance that is never tighter than `k` machine epsilons.
    #[inline]
    fn tol_at_least(requested: f64, k: f64) -> Self {
        Self::of(requested).max(Self::epsilon() * Self::of(k))
    }

    /// Clamps into `[-1, 1]` before an inverse trigonometric call.
    #[inline]
    fn clamp_unit(self) -> Self {
        self.max(-Self::one()).min(Self::one())
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_convert() {
        assert_eq!(f64::of(0.5), 0.5);
        assert_eq!(f32::of(0.5), 0.5f32);
        assert_eq!(f64::of_usize(7), 7.0);
    }

    #[test]
    fn tolerance_floor_respects_epsilon() {
        assert_eq!(f64::tol_at_least(1e-9, 16.0), 1e-9);
        let t = f32::tol_at_least(1e-12, 16.0);
        assert!(t >= f32::EPSILON * 16.0);
    }

    #[test]
    fn clamp_unit_limits() {
        assert_eq!(1.5f64.clamp_unit(), 1.0);
        assert_eq!((-2.0f64).clamp_unit(), -1.0);
    }
}
