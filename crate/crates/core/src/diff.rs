//! Forward-mode sensitivity engine based on dual numbers.
//!
//! A [`Dual<K>`] carries a primal value plus `K` derivative components (one
//! per seed direction). Because every model function in this crate is generic
//! over [`Scalar`], evaluating it on duals propagates exact derivatives by the
//! chain rule; no taping or graph construction is involved. Wide derivative
//! requests are processed in chunks of `K` seeds, optionally in parallel.

use crate::error::{ModelError, Result};
use crate::scalar::Scalar;
use num_traits::{One, Zero};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// Seed-chunk width used by the driver routines. 16 keeps the derivative
/// array in registers/cache while amortizing the per-sweep simulation cost.
pub const SEED_CHUNK: usize = 16;

/// Dual number with `K` simultaneous derivative directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<const K: usize> {
    pub re: f64,
    pub dx: [f64; K],
}

impl<const K: usize> Dual<K> {
    /// Constant: value with zero derivative.
    #[inline]
    pub fn constant(re: f64) -> Self {
        Self { re, dx: [0.0; K] }
    }

    /// Variable seeded along direction `dir` (unit derivative).
    #[inline]
    pub fn seeded(re: f64, dir: usize) -> Self {
        let mut dx = [0.0; K];
        dx[dir] = 1.0;
        Self { re, dx }
    }
}

impl<const K: usize> Add for Dual<K> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self.re += rhs.re;
        for i in 0..K {
            self.dx[i] += rhs.dx[i];
        }
        self
    }
}

impl<const K: usize> Sub for Dual<K> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        self.re -= rhs.re;
        for i in 0..K {
            self.dx[i] -= rhs.dx[i];
        }
        self
    }
}

impl<const K: usize> Mul for Dual<K> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut dx = [0.0; K];
        for i in 0..K {
            dx[i] = self.dx[i] * rhs.re + self.re * rhs.dx[i];
        }
        Self {
            re: self.re * rhs.re,
            dx,
        }
    }
}

impl<const K: usize> Div for Dual<K> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.re;
        let re = self.re * inv;
        let mut dx = [0.0; K];
        for i in 0..K {
            dx[i] = (self.dx[i] - re * rhs.dx[i]) * inv;
        }
        Self { re, dx }
    }
}

impl<const K: usize> Neg for Dual<K> {
    type Output = Self;
    #[inline]
    fn neg(mut self) -> Self {
        self.re = -self.re;
        for i in 0..K {
            self.dx[i] = -self.dx[i];
        }
        self
    }
}

impl<const K: usize> AddAssign for Dual<K> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}
impl<const K: usize> SubAssign for Dual<K> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}
impl<const K: usize> MulAssign for Dual<K> {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}
impl<const K: usize> DivAssign for Dual<K> {
    #[inline]
    fn div_assign(&mut self, rhs: Self) {
        *self = *self / rhs;
    }
}

impl<const K: usize> Zero for Dual<K> {
    #[inline]
    fn zero() -> Self {
        Self::constant(0.0)
    }
    #[inline]
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.dx.iter().all(|d| *d == 0.0)
    }
}

impl<const K: usize> One for Dual<K> {
    #[inline]
    fn one() -> Self {
        Self::constant(1.0)
    }
}

impl<const K: usize> PartialOrd for Dual<K> {
    /// Ordering compares primal values only.
    #[inline]
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.re.partial_cmp(&other.re)
    }
}

impl<const K: usize> Scalar for Dual<K> {
    #[inline]
    fn from_f64(v: f64) -> Self {
        Self::constant(v)
    }

    #[inline]
    fn value(self) -> f64 {
        self.re
    }

    #[inline]
    fn exp(self) -> Self {
        let e = self.re.exp();
        let mut dx = [0.0; K];
        for i in 0..K {
            dx[i] = self.dx[i] * e;
        }
        Self { re: e, dx }
    }

    #[inline]
    fn ln(self) -> Self {
        let inv = 1.0 / self.re;
        let mut dx = [0.0; K];
        for i in 0..K {
            dx[i] = self.dx[i] * inv;
        }
        Self {
            re: self.re.ln(),
            dx,
        }
    }

    #[inline]
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        let half_inv = 0.5 / s;
        let mut dx = [0.0; K];
        for i in 0..K {
            dx[i] = self.dx[i] * half_inv;
        }
        Self { re: s, dx }
    }

    #[inline]
    fn powi(self, n: i32) -> Self {
        let fac = f64::from(n) * self.re.powi(n - 1);
        let mut dx = [0.0; K];
        for i in 0..K {
            dx[i] = self.dx[i] * fac;
        }
        Self {
            re: self.re.powi(n),
            dx,
        }
    }

    #[inline]
    fn clamp_value(mut self, lo: f64, hi: f64) -> Self {
        if self.re < lo {
            self.re = lo;
            self.dx = [0.0; K];
        } else if self.re > hi {
            self.re = hi;
            self.dx = [0.0; K];
        }
        self
    }
}

/// A differentiable vector map `R^n -> R^m`, written once over [`Scalar`].
///
/// Types implementing this get exact forward-mode Jacobians via [`jacobian`]
/// and a finite-difference reference via [`fd_jacobian`]; the two paths share
/// only the generic `eval` body, evaluated on different scalar types.
pub trait DiffMap {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>>;
}

/// Exact forward-mode Jacobian, `out[i][j] = ∂f_i/∂x_j`.
///
/// Seeds are processed in chunks of [`SEED_CHUNK`]; column `j` equals the
/// directional derivative along unit seed `j`. Errors if the map produces a
/// non-finite value or derivative.
pub fn jacobian<M: DiffMap>(map: &M, x: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    let mut rows: Option<Vec<Vec<f64>>> = None;
    for chunk_start in (0..n).step_by(SEED_CHUNK) {
        let width = SEED_CHUNK.min(n - chunk_start);
        let inputs: Vec<Dual<SEED_CHUNK>> = x
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                if j >= chunk_start && j < chunk_start + width {
                    Dual::seeded(v, j - chunk_start)
                } else {
                    Dual::constant(v)
                }
            })
            .collect();
        let out = map.eval(&inputs)?;
        let rows = rows.get_or_insert_with(|| vec![vec![0.0; n]; out.len()]);
        if rows.len() != out.len() {
            return Err(ModelError::Shape {
                expected: rows.len(),
                got: out.len(),
            });
        }
        for (i, o) in out.iter().enumerate() {
            if !o.re.is_finite() {
                return Err(ModelError::Differentiation(format!(
                    "output {i} is non-finite"
                )));
            }
            for k in 0..width {
                let d = o.dx[k];
                if !d.is_finite() {
                    return Err(ModelError::Differentiation(format!(
                        "d(output {i})/d(input {}) is non-finite",
                        chunk_start + k
                    )));
                }
                rows[i][chunk_start + k] = d;
            }
        }
    }
    Ok(rows.unwrap_or_default())
}

/// Central finite-difference Jacobian, the independent oracle used by the
/// gradient checks. Step is relative: `h = h_rel * max(1, |x_j|)`.
pub fn fd_jacobian<M: DiffMap>(map: &M, x: &[f64], h_rel: f64) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    let mut rows: Option<Vec<Vec<f64>>> = None;
    for j in 0..n {
        let h = h_rel * x[j].abs().max(1.0);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let fp = map.eval(&xp)?;
        let fm = map.eval(&xm)?;
        let rows = rows.get_or_insert_with(|| vec![vec![0.0; n]; fp.len()]);
        for i in 0..fp.len() {
            rows[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(rows.unwrap_or_default())
}

/// Largest relative deviation between two Jacobians/gradients, with an
/// absolute floor so near-zero entries compare absolutely.
pub fn max_rel_error(a: &[Vec<f64>], b: &[Vec<f64>], abs_floor: f64) -> f64 {
    let mut worst = 0.0_f64;
    for (ra, rb) in a.iter().zip(b.iter()) {
        for (&va, &vb) in ra.iter().zip(rb.iter()) {
            let scale = va.abs().max(vb.abs()).max(abs_floor);
            worst = worst.max((va - vb).abs() / scale);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smoothing::{soft_abs, soft_heaviside, soft_max};
    use approx::assert_relative_eq;

    struct Identity;
    impl DiffMap for Identity {
        fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
            Ok(x.to_vec())
        }
    }

    /// Mix of every supported primitive, for chain-rule checks.
    struct Mixed;
    impl DiffMap for Mixed {
        fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
            let a = x[0];
            let b = x[1];
            let y0 = (a * b + a.exp()).sqrt();
            let y1 = soft_max(a, b * b, 1e-6) / (S::one() + soft_abs(a - b, 1e-6));
            let y2 = soft_heaviside(a - b, 100.0) * (a * a).ln();
            Ok(vec![y0, y1, y2])
        }
    }

    #[test]
    fn identity_jacobian_is_identity() {
        let x = vec![1.0, -2.0, 3.5];
        let j = jacobian(&Identity, &x).unwrap();
        for (i, row) in j.iter().enumerate() {
            for (jj, v) in row.iter().enumerate() {
                assert_eq!(*v, if i == jj { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn soft_abs_derivative_zero_at_origin() {
        struct Abs;
        impl DiffMap for Abs {
            fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
                Ok(vec![soft_abs(x[0], 1e-6)])
            }
        }
        let j = jacobian(&Abs, &[0.0]).unwrap();
        assert_eq!(j[0][0], 0.0);
    }

    #[test]
    fn mixed_matches_finite_differences() {
        let x = vec![1.3, 0.7];
        let exact = jacobian(&Mixed, &x).unwrap();
        let fd = fd_jacobian(&Mixed, &x, 1e-6).unwrap();
        assert!(max_rel_error(&exact, &fd, 1e-8) < 1e-6);
    }

    #[test]
    fn dual_arithmetic_chain_rule() {
        // d/dx of x^3 at 2 is 12, via repeated multiplication
        let x = Dual::<1>::seeded(2.0, 0);
        let y = x * x * x;
        assert_relative_eq!(y.re, 8.0);
        assert_relative_eq!(y.dx[0], 12.0);

        // quotient rule: d/dx (x / (1 + x)) = 1/(1+x)^2
        let q = x / (Dual::constant(1.0) + x);
        assert_relative_eq!(q.dx[0], 1.0 / 9.0, max_relative = 1e-14);

        // exp/ln/sqrt/powi against the symbolic derivative
        let e = x.exp();
        assert_relative_eq!(e.dx[0], 2.0_f64.exp(), max_relative = 1e-14);
        let l = x.ln();
        assert_relative_eq!(l.dx[0], 0.5, max_relative = 1e-14);
        let s = x.sqrt();
        assert_relative_eq!(s.dx[0], 0.5 / 2.0_f64.sqrt(), max_relative = 1e-14);
        let p = x.powi(5);
        assert_relative_eq!(p.dx[0], 5.0 * 16.0, max_relative = 1e-14);
    }

    #[test]
    fn seeding_is_linear() {
        // seed e_0 + e_1 produces the sum of the two columns
        let f = |x: &[Dual<2>]| -> Dual<2> { x[0] * x[0] * x[1] + x[1].exp() };
        let cols = {
            let x = [Dual::seeded(1.5, 0), Dual::seeded(0.5, 1)];
            f(&x)
        };
        let combo = {
            let mut a = Dual::<2>::seeded(1.5, 0);
            a.dx[1] = 1.0; // e0 + e1 on x0, plus same on x1
            let mut b = Dual::<2>::seeded(0.5, 0);
            b.dx[1] = 1.0;
            f(&[a, b])
        };
        // directional derivative along (1,1) in both slots equals col0+col1
        assert_relative_eq!(combo.dx[0], cols.dx[0] + cols.dx[1], max_relative = 1e-14);
        assert_relative_eq!(combo.dx[1], cols.dx[0] + cols.dx[1], max_relative = 1e-14);
    }

    #[test]
    fn chunking_covers_wide_inputs() {
        // more inputs than SEED_CHUNK: gradient of sum of squares
        struct SumSq;
        impl DiffMap for SumSq {
            fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
                let mut acc = S::zero();
                for &v in x {
                    acc += v * v;
                }
                Ok(vec![acc])
            }
        }
        let n = SEED_CHUNK * 2 + 3;
        let x: Vec<f64> = (0..n).map(|i| i as f64 * 0.25 - 3.0).collect();
        let j = jacobian(&SumSq, &x).unwrap();
        for (jj, &v) in x.iter().enumerate() {
            assert_relative_eq!(j[0][jj], 2.0 * v, max_relative = 1e-14);
        }
    }

    #[test]
    fn non_finite_output_is_reported() {
        struct Bad;
        impl DiffMap for Bad {
            fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
                Ok(vec![x[0].ln()]) // negative input -> NaN
            }
        }
        let err = jacobian(&Bad, &[-1.0]).unwrap_err();
        assert!(matches!(err, ModelError::Differentiation(_)));
    }
}
