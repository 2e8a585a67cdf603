//! Univariate polynomials in `t` with complex coefficients.
//!
//! Every scalar quantity that depends analytically on time (matrix entries,
//! characteristic polynomial coefficients, minors of the symmetriser, the
//! check function) is carried as a [`TimePoly`]. Arithmetic is exact
//! polynomial algebra in double precision; the only approximation is the
//! trimming of trailing coefficients that are pure cancellation noise.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Relative magnitude below which trailing coefficients produced by
/// cancellation are dropped.
pub const DEFAULT_TRIM: f64 = 1e-13;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Polynomial `Σ_k coeffs[k] t^k`. The zero polynomial has no coefficients.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimePoly {
    coeffs: Vec<Complex64>,
}

impl TimePoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_complex(vec![c])
    }

    pub fn real_constant(c: f64) -> Self {
        Self::constant(Complex64::new(c, 0.0))
    }

    /// `t`
    pub fn identity() -> Self {
        Self::from_real(&[0.0, 1.0])
    }

    /// `c t^k`
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut coeffs = vec![ZERO; k + 1];
        coeffs[k] = c;
        Self::from_complex(coeffs)
    }

    /// Builds from coefficients in increasing degree. Exact zeros at the top
    /// are removed; nothing else is trimmed.
    pub fn from_complex(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == ZERO) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::from_complex(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Product of linear factors `Π (t − r)`.
    pub fn from_roots(roots: &[f64]) -> Self {
        roots.iter().fold(Self::one(), |acc, &r| &acc * &Self::from_real(&[-r, 1.0]))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Real parts of the coefficients.
    pub fn real_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.re).collect()
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest coefficient modulus.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// True when the coefficient norm is below `tol * scale`.
    pub fn is_negligible(&self, tol: f64, scale: f64) -> bool {
        self.norm() <= tol * scale
    }

    pub fn is_real(&self, tol: f64) -> bool {
        let scale = self.norm().max(f64::MIN_POSITIVE);
        self.coeffs.iter().all(|c| c.im.abs() <= tol * scale)
    }

    /// Drops trailing coefficients whose modulus is below `rel * scale`.
    pub fn trimmed_against(mut self, rel: f64, scale: f64) -> Self {
        let cut = rel * scale;
        while self.coeffs.last().is_some_and(|c| c.norm() <= cut) {
            self.coeffs.pop();
        }
        self
    }

    /// Drops trailing coefficients below `rel` times the largest coefficient.
    pub fn trimmed(self, rel: f64) -> Self {
        let scale = self.norm();
        self.trimmed_against(rel, scale)
    }

    /// Discards imaginary parts.
    pub fn real_part(&self) -> Self {
        Self::from_complex(self.coeffs.iter().map(|c| Complex64::new(c.re, 0.0)).collect())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        if s == ZERO {
            return Self::zero();
        }
        Self::from_complex(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * t + c)
    }

    pub fn eval_complex(&self, t: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * t + c)
    }

    /// Real part of `p(t)`.
    pub fn eval_re(&self, t: f64) -> f64 {
        self.eval(t).re
    }

    /// `∂_t^k p(t)`, evaluated without forming the derivative polynomial.
    pub fn eval_deriv(&self, t: f64, k: usize) -> Complex64 {
        if k >= self.coeffs.len() {
            return ZERO;
        }
        let mut acc = ZERO;
        for j in (k..self.coeffs.len()).rev() {
            acc = acc * t + self.coeffs[j] * falling_factorial(j, k);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        self.nth_derivative(1)
    }

    pub fn nth_derivative(&self, k: usize) -> Self {
        if k >= self.coeffs.len() {
            return Self::zero();
        }
        Self::from_complex(
            (k..self.coeffs.len())
                .map(|j| self.coeffs[j] * falling_factorial(j, k))
                .collect(),
        )
    }

    /// Coefficients of `s ↦ p(t0 + s)`, i.e. the Taylor coefficients
    /// `p^(k)(t0)/k!` at `t0`.
    pub fn taylor_at(&self, t0: f64) -> Vec<Complex64> {
        let mut c = self.coeffs.clone();
        let n = c.len();
        // Repeated synthetic division by (t - t0).
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let next = c[j + 1];
                c[j] += next * t0;
            }
        }
        c
    }

    /// Quotient of `self / divisor` for divisions known to be exact in exact
    /// arithmetic. The quotient is the least-squares solution of the
    /// convolution system `divisor * q = self`, which keeps every
    /// coefficient accurate regardless of which end of the divisor dominates.
    pub fn div_exact(&self, divisor: &TimePoly) -> TimePoly {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let Some(nd) = self.degree() else {
            return Self::zero();
        };
        if nd < dd {
            return Self::zero();
        }
        if dd == 0 {
            let c = divisor.coeffs[0];
            return Self::from_complex(self.coeffs.iter().map(|x| x / c).collect());
        }
        let nq = nd - dd + 1;
        let conv = DMatrix::from_fn(nd + 1, nq, |i, j| {
            if i >= j && i - j <= dd {
                divisor.coeffs[i - j]
            } else {
                ZERO
            }
        });
        let rhs = DVector::from_column_slice(&self.coeffs);
        let quot = conv
            .svd(true, true)
            .solve(&rhs, 0.0)
            .expect("singular vectors were requested");
        Self::from_complex(quot.iter().copied().collect()).trimmed(DEFAULT_TRIM)
    }

    fn add_impl(&self, other: &TimePoly, sign: f64) -> TimePoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| self.coeff(k) + other.coeff(k) * sign)
            .collect();
        let scale = self.norm().max(other.norm());
        Self::from_complex(coeffs).trimmed_against(DEFAULT_TRIM, scale)
    }
}

fn falling_factorial(j: usize, k: usize) -> f64 {
    ((j + 1 - k)..=j).map(|x| x as f64).product()
}

impl Add for &TimePoly {
    type Output = TimePoly;
    fn add(self, rhs: &TimePoly) -> TimePoly {
        self.add_impl(rhs, 1.0)
    }
}

impl Sub for &TimePoly {
    type Output = TimePoly;
    fn sub(self, rhs: &TimePoly) -> TimePoly {
        self.add_impl(rhs, -1.0)
    }
}

impl Add for TimePoly {
    type Output = TimePoly;
    fn add(self, rhs: TimePoly) -> TimePoly {
        &self + &rhs
    }
}

impl Sub for TimePoly {
    type Output = TimePoly;
    fn sub(self, rhs: TimePoly) -> TimePoly {
        &self - &rhs
    }
}

impl AddAssign<&TimePoly> for TimePoly {
    fn add_assign(&mut self, rhs: &TimePoly) {
        *self = &*self + rhs;
    }
}

impl Neg for &TimePoly {
    type Output = TimePoly;
    fn neg(self) -> TimePoly {
        TimePoly::from_complex(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Neg for TimePoly {
    type Output = TimePoly;
    fn neg(self) -> TimePoly {
        -&self
    }
}

impl Mul for &TimePoly {
    type Output = TimePoly;
    fn mul(self, rhs: &TimePoly) -> TimePoly {
        if self.is_zero() || rhs.is_zero() {
            return TimePoly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        TimePoly::from_complex(out)
    }
}

impl Mul for TimePoly {
    type Output = TimePoly;
    fn mul(self, rhs: TimePoly) -> TimePoly {
        &self * &rhs
    }
}

impl fmt::Display for TimePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            match k {
                0 => {}
                1 => write!(f, "·t")?,
                _ => write!(f, "·t^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn eval_deriv_examples() {
        let t2 = TimePoly::from_real(&[0.0, 0.0, 1.0]);
        assert_abs_diff_eq!(t2.eval_deriv(1.0, 1).re, 2.0);
        assert_eq!(TimePoly::zero().eval_deriv(3.7, 2), ZERO);
        let p = TimePoly::from_real(&[0.0, -1.0, 0.0, 3.0]);
        assert_abs_diff_eq!(p.eval_deriv(2.0, 2).re, 36.0);
        assert_abs_diff_eq!(p.nth_derivative(2).eval_re(2.0), 36.0);
    }

    #[test]
    fn degree_bookkeeping() {
        assert_eq!(TimePoly::zero().degree(), None);
        assert_eq!(TimePoly::from_real(&[1.0, 0.0, 0.0]).degree(), Some(0));
        let a = TimePoly::from_real(&[1.0, 2.0, 3.0]);
        let b = TimePoly::from_real(&[1.0, 2.0, 3.0 + 1e-16]);
        assert_eq!((&a - &b).degree(), None);
    }

    #[test]
    fn taylor_shift_matches_derivatives() {
        let p = TimePoly::from_real(&[1.0, -2.0, 0.5, 4.0]);
        let tc = p.taylor_at(0.7);
        let mut fact = 1.0;
        for (k, c) in tc.iter().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            assert_abs_diff_eq!(c.re, p.eval_deriv(0.7, k).re / fact, epsilon = 1e-12);
        }
    }

    #[test]
    fn exact_division_recovers_factor() {
        let a = TimePoly::from_real(&[1.0, 2.0, -1.0]);
        let b = TimePoly::from_real(&[0.5, 0.0, 3.0, 1.0]);
        let q = (&a * &b).div_exact(&b);
        assert!((&q - &a).norm() < 1e-12);
    }

    fn small_poly() -> impl Strategy<Value = TimePoly> {
        prop::collection::vec(-3.0f64..3.0, 0..6).prop_map(|c| TimePoly::from_real(&c))
    }

    proptest! {
        #[test]
        fn leibniz_rule(p in small_poly(), q in small_poly()) {
            let lhs = (&p * &q).derivative();
            let rhs = &(&p * &q.derivative()) + &(&q * &p.derivative());
            let scale = 1.0 + p.norm() * q.norm();
            prop_assert!((&lhs - &rhs).norm() <= 1e-12 * scale);
        }

        #[test]
        fn product_evaluates_pointwise(p in small_poly(), q in small_poly(), t in -2.0f64..2.0) {
            let lhs = (&p * &q).eval(t);
            let rhs = p.eval(t) * q.eval(t);
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
        }
    }
}
