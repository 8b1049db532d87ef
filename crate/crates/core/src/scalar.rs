//! Floating-point scalar abstraction shared by the numerical kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar used for field values, reaction terms and front tables.
///
/// Implemented for `f32` and `f64`. Lattice metadata (spacing, origin, time)
/// is always `f64`; only the bulk arrays and the arithmetic on them follow `T`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Comparison slack scaled to the type's precision (never below `floor`).
    #[inline]
    fn slack(floor: f64) -> f64 {
        floor.max(64.0 * Self::epsilon().as_f64())
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_tracks_precision() {
        assert_eq!(<f64 as Real>::slack(1e-12), 1e-12);
        assert!(<f32 as Real>::slack(1e-12) > 1e-6);
        assert_eq!(f32::lit(0.5), 0.5f32);
    }
}
