//! Polynomials in `D_t = −i∂_t` with time-dependent matrix coefficients.
//!
//! Coefficients always sit to the left of the powers of `D_t`, so an
//! operator has the unique normal form `Σ_h M_h(t) D_t^h`. Composition moves
//! `D_t` past a coefficient with the Leibniz rule
//! `D_t^q ∘ M = Σ_r C(q,r) (D_t^r M) D_t^{q−r}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::PolyMatrix;
use super::poly::TimePoly;
use crate::error::{Error, Result};

/// Sample points used by [`op_residual`].
pub const RESIDUAL_SAMPLES: usize = 33;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorPoly {
    rows: usize,
    cols: usize,
    /// `coeffs[h]` multiplies `D_t^h`.
    coeffs: Vec<PolyMatrix>,
}

impl OperatorPoly {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self { rows, cols, coeffs: Vec::new() }
    }

    /// Order-0 operator `M(t)`.
    pub fn multiplication(m: PolyMatrix) -> Self {
        Self::from_coeffs(vec![m])
    }

    pub fn identity(n: usize) -> Self {
        Self::multiplication(PolyMatrix::identity(n))
    }

    /// `I · D_t^k`
    pub fn d_t_power(n: usize, k: usize) -> Self {
        let mut coeffs = vec![PolyMatrix::zeros(n, n); k + 1];
        coeffs[k] = PolyMatrix::identity(n);
        Self::from_coeffs(coeffs)
    }

    /// Scalar operator `Σ_h p_h D_t^h` acting diagonally on `n` components.
    pub fn scalar_on(n: usize, coeffs: &[TimePoly]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|p| PolyMatrix::scalar_identity(n, p.clone())).collect())
    }

    pub fn from_coeffs(coeffs: Vec<PolyMatrix>) -> Self {
        let (rows, cols) = coeffs.first().map_or((0, 0), |m| (m.rows(), m.cols()));
        assert!(coeffs.iter().all(|m| m.rows() == rows && m.cols() == cols));
        let mut op = Self { rows, cols, coeffs };
        op.normalize();
        op
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|m| m.norm() == 0.0) {
            self.coeffs.pop();
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Highest power of `D_t` with a nonzero coefficient; `None` for zero.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `D_t^h` (zero matrix beyond the order).
    pub fn coeff(&self, h: usize) -> PolyMatrix {
        self.coeffs
            .get(h)
            .cloned()
            .unwrap_or_else(|| PolyMatrix::zeros(self.rows, self.cols))
    }

    pub fn coeffs(&self) -> &[PolyMatrix] {
        &self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(PolyMatrix::norm).fold(0.0, f64::max)
    }

    /// Drops top coefficients whose norm is below `tol * scale`.
    pub fn trimmed(mut self, tol: f64, scale: f64) -> Self {
        while self.coeffs.last().is_some_and(|m| m.is_negligible(tol, scale)) {
            self.coeffs.pop();
        }
        self
    }

    pub fn add(&self, other: &OperatorPoly) -> Result<OperatorPoly> {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &OperatorPoly) -> Result<OperatorPoly> {
        self.combine(other, true)
    }

    fn combine(&self, other: &OperatorPoly, subtract: bool) -> Result<OperatorPoly> {
        self.check_same_shape(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|h| {
                let (a, b) = (self.coeff(h), other.coeff(h));
                if subtract {
                    &a - &b
                } else {
                    &a + &b
                }
            })
            .collect();
        Ok(Self { rows: self.rows, cols: self.cols, coeffs }.normalized())
    }

    fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    fn check_same_shape(&self, other: &OperatorPoly) -> Result<()> {
        if (self.rows, self.cols) != (other.rows, other.cols) && !self.coeffs.is_empty() && !other.coeffs.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{}×{} vs {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn scale(&self, s: Complex64) -> OperatorPoly {
        Self { rows: self.rows, cols: self.cols, coeffs: self.coeffs.iter().map(|m| m.scale(s)).collect() }
            .normalized()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &OperatorPoly) -> Result<OperatorPoly> {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Ok(Self::zero(self.rows, other.cols));
        }
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}×{} with {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let order = self.coeffs.len() - 1 + other.coeffs.len() - 1;
        let mut out = vec![PolyMatrix::zeros(self.rows, other.cols); order + 1];
        // D_t^r M = (−i)^r ∂_t^r M, cached per (b, r).
        let max_r = self.coeffs.len() - 1;
        let derivs: Vec<Vec<PolyMatrix>> = other
            .coeffs
            .iter()
            .map(|q| {
                let mut v = Vec::with_capacity(max_r + 1);
                let mut cur = q.clone();
                for r in 0..=max_r {
                    if r > 0 {
                        cur = cur.derivative();
                    }
                    v.push(cur.scale(minus_i_pow(r)));
                }
                v
            })
            .collect();
        for (a, pa) in self.coeffs.iter().enumerate() {
            if pa.norm() == 0.0 {
                continue;
            }
            for (b, dq) in derivs.iter().enumerate() {
                for (r, dq_r) in dq.iter().enumerate().take(a + 1) {
                    if dq_r.norm() == 0.0 {
                        continue;
                    }
                    let term = (pa * dq_r).scale_real(binomial(a, r));
                    let h = a - r + b;
                    out[h] = &out[h] + &term;
                }
            }
        }
        Ok(Self { rows: self.rows, cols: other.cols, coeffs: out }.normalized())
    }
}

/// `(−i)^r`
pub fn minus_i_pow(r: usize) -> Complex64 {
    match r % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Sup over `D_t`-powers, entries and `t ∈ [0, 1]` samples of the
/// coefficient difference `|P_h(t) − Q_h(t)|`.
pub fn op_residual(p: &OperatorPoly, q: &OperatorPoly) -> f64 {
    let samples: Vec<f64> = (0..RESIDUAL_SAMPLES)
        .map(|k| k as f64 / (RESIDUAL_SAMPLES - 1) as f64)
        .collect();
    op_residual_on(p, q, &samples)
}

pub fn op_residual_on(p: &OperatorPoly, q: &OperatorPoly, samples: &[f64]) -> f64 {
    let n = p.coeffs.len().max(q.coeffs.len());
    let (rows, cols) = if p.coeffs.is_empty() { (q.rows, q.cols) } else { (p.rows, p.cols) };
    let mut worst: f64 = 0.0;
    for h in 0..n {
        let a = p.coeffs.get(h);
        let b = q.coeffs.get(h);
        for i in 0..rows {
            for j in 0..cols {
                for &t in samples {
                    let va = a.map_or(Complex64::new(0.0, 0.0), |m| m.get(i, j).eval(t));
                    let vb = b.map_or(Complex64::new(0.0, 0.0), |m| m.get(i, j).eval(t));
                    worst = worst.max((va - vb).norm());
                }
            }
        }
    }
    worst
}
