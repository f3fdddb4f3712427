//! Differentiable replacements for the nonsmooth primitives (Heaviside step,
//! absolute value, maximum) that appear in the crop and greenhouse dynamics.
//!
//! The forms used here:
//!
//! ```text
//! soft_heaviside(x, eps) = 1 / (1 + e^(-eps*x))        (logistic)
//! soft_abs(x, mu)        = sqrt(x^2 + mu)
//! soft_max(a, b, mu)     = (a + b + soft_abs(a - b, mu)) / 2
//! soft_min(a, b, mu)     = -soft_max(-a, -b, mu)
//! ```
//!
//! Error bounds (used by the test suite):
//! `0 <= soft_abs - |x| <= sqrt(mu)` and
//! `0 <= soft_max - max <= sqrt(mu)/2`; the logistic is within `1e-8` of the
//! step for `|x| >= 0.1` at `eps = 200`.

use crate::error::{ModelError, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Largest magnitude fed to `exp` inside the logistic; beyond this the
/// logistic saturates far below f64 resolution and `exp` would overflow.
const EXP_CLAMP: f64 = 500.0;

/// Smoothing constants shared by every smoothed call within one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmoothingParams {
    /// Sharpness of the logistic Heaviside replacement.
    pub epsilon: f64,
    /// Regularizer of the soft absolute value / maximum.
    pub mu: f64,
}

impl Default for SmoothingParams {
    fn default() -> Self {
        Self {
            epsilon: 100.0,
            mu: 1e-6,
        }
    }
}

impl SmoothingParams {
    pub fn new(epsilon: f64, mu: f64) -> Result<Self> {
        let p = Self { epsilon, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(ModelError::Parameter(format!(
                "smoothing epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(ModelError::Parameter(format!(
                "smoothing mu must be positive and finite, got {}",
                self.mu
            )));
        }
        Ok(())
    }

    /// Half-width of the soft_max/soft_min error band, `sqrt(mu)/2`.
    pub fn max_tolerance(&self) -> f64 {
        self.mu.sqrt() / 2.0
    }

    #[inline]
    pub fn heaviside<S: Scalar>(&self, x: S) -> S {
        soft_heaviside(x, self.epsilon)
    }

    #[inline]
    pub fn abs<S: Scalar>(&self, x: S) -> S {
        soft_abs(x, self.mu)
    }

    #[inline]
    pub fn max<S: Scalar>(&self, a: S, b: S) -> S {
        soft_max(a, b, self.mu)
    }

    #[inline]
    pub fn min<S: Scalar>(&self, a: S, b: S) -> S {
        soft_min(a, b, self.mu)
    }

    /// Smoothed positive part, `soft_max(x, 0)`.
    #[inline]
    pub fn pos<S: Scalar>(&self, x: S) -> S {
        soft_max(x, S::zero(), self.mu)
    }
}

/// Logistic replacement of the Heaviside step: strictly increasing,
/// `H(0) = 1/2`, differentiable everywhere. The exponent is clamped to
/// `±500` so large `eps*x` cannot overflow.
#[inline]
pub fn soft_heaviside<S: Scalar>(x: S, epsilon: f64) -> S {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let z = (-x * S::from_f64(epsilon)).clamp_value(-EXP_CLAMP, EXP_CLAMP);
    S::one() / (S::one() + z.exp())
}

/// `sqrt(x^2 + mu)`: even, differentiable, always `>= |x|` and `>= sqrt(mu)`.
#[inline]
pub fn soft_abs<S: Scalar>(x: S, mu: f64) -> S {
    assert!(mu > 0.0, "mu must be positive");
    (x * x + S::from_f64(mu)).sqrt()
}

/// Smoothed maximum built from the soft absolute value:
/// `(a + b + soft_abs(a - b, mu)) / 2`. Always `>= max(a, b)` with error at
/// most `sqrt(mu)/2` (the worst case is `a = b`).
#[inline]
pub fn soft_max<S: Scalar>(a: S, b: S, mu: f64) -> S {
    (a + b + soft_abs(a - b, mu)) / S::from_f64(2.0)
}

/// Smoothed minimum, the dual of [`soft_max`]: always `<= min(a, b)`.
#[inline]
pub fn soft_min<S: Scalar>(a: S, b: S, mu: f64) -> S {
    -soft_max(-a, -b, mu)
}

/// `soft_max(x, 0)` — smoothed positive part.
#[inline]
pub fn soft_pos<S: Scalar>(x: S, mu: f64) -> S {
    soft_max(x, S::zero(), mu)
}

/// Smoothed clamp of `z` to `[0, 1]`: `soft_max(0, soft_min(z, 1))`.
///
/// The result is exactly non-negative (outer soft_max) and exceeds 1 by at
/// most `sqrt(mu)/2`.
#[inline]
pub fn soft_clamp01<S: Scalar>(z: S, mu: f64) -> S {
    soft_pos(soft_min(z, S::one(), mu), mu)
}

/// Smoothed trapezoid response: 0 below `t0`, rising to 1 on `[t0, t1]`,
/// flat 1 on `[t1, t2]`, falling to 0 on `[t2, t3]`.
///
/// This is the shape of the piecewise-linear temperature response functions
/// in both crop models; corners come from the parameter set.
#[inline]
pub fn soft_trapezoid<S: Scalar>(x: S, corners: [f64; 4], mu: f64) -> S {
    let [t0, t1, t2, t3] = corners;
    debug_assert!(t0 < t1 && t1 <= t2 && t2 < t3, "corners must be ordered");
    let rise = (x - S::from_f64(t0)) / S::from_f64(t1 - t0);
    let fall = (S::from_f64(t3) - x) / S::from_f64(t3 - t2);
    soft_pos(soft_min(soft_min(rise, fall, mu), S::one(), mu), mu)
}
