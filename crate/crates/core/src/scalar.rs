//! Generic scalar abstraction over which all model dynamics are written.
//!
//! Every state-update function in this crate is generic over [`Scalar`], so
//! the same code evaluates with plain `f32`/`f64` for simulation and with
//! [`crate::diff::Dual`] for forward-mode sensitivities. Parameters stay
//! `f64` and are lifted with [`Scalar::from_f64`] at the point of use.

use num_traits::{One, Zero};
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// Field-like scalar with the elementary functions the dynamics need.
///
/// Comparison operators act on the primal value; smooth code must not branch
/// on them except where the branch is itself part of a smoothed primitive
/// (e.g. the clamped exponent inside the soft Heaviside).
pub trait Scalar:
    Copy
    + Debug
    + PartialOrd
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    fn from_f64(v: f64) -> Self;

    /// Primal (value) part; for duals this drops the derivative.
    fn value(self) -> f64;

    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;

    /// Clamp the primal value to `[lo, hi]`. Outside the band the derivative
    /// is zero, matching the almost-everywhere derivative of the clamp.
    fn clamp_value(self, lo: f64, hi: f64) -> Self;

    fn is_finite_value(self) -> bool {
        self.value().is_finite()
    }
}

macro_rules! impl_scalar_float {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn value(self) -> f64 {
                self as f64
            }
            #[inline]
            fn exp(self) -> Self {
                <$t>::exp(self)
            }
            #[inline]
            fn ln(self) -> Self {
                <$t>::ln(self)
            }
            #[inline]
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            #[inline]
            fn powi(self, n: i32) -> Self {
                <$t>::powi(self, n)
            }
            #[inline]
            fn clamp_value(self, lo: f64, hi: f64) -> Self {
                <$t>::clamp(self, lo as $t, hi as $t)
            }
        }
    };
}

impl_scalar_float!(f32);
impl_scalar_float!(f64);

#[cfg(test)]
mod tests {
    use super::*;

    fn poly<S: Scalar>(x: S) -> S {
        x * x + S::from_f64(2.0) * x - S::one()
    }

    #[test]
    fn generic_code_matches_f64() {
        let x = 1.7_f64;
        assert_eq!(poly(x), x * x + 2.0 * x - 1.0);
        assert!((poly(1.7_f32) as f64 - poly(x)).abs() < 1e-6);
    }

    #[test]
    fn clamp_value_limits_primal() {
        assert_eq!(3.0_f64.clamp_value(-1.0, 2.0), 2.0);
        assert_eq!((-3.0_f64).clamp_value(-1.0, 2.0), -1.0);
        assert_eq!(0.5_f64.clamp_value(-1.0, 2.0), 0.5);
    }
}
