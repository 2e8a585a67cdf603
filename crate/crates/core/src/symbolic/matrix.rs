//! Dense matrices with [`TimePoly`] entries.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::{TimePoly, DEFAULT_TRIM};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<TimePoly>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![TimePoly::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar_identity(n, TimePoly::one())
    }

    /// `p · I`
    pub fn scalar_identity(n: usize, p: TimePoly) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, p.clone());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> TimePoly) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self { rows, cols, entries }
    }

    /// Constant matrix from real row-major data.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| TimePoly::real_constant(rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &TimePoly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: TimePoly) {
        self.entries[i * self.cols + j] = p;
    }

    pub fn entries(&self) -> &[TimePoly] {
        &self.entries
    }

    pub fn map(&self, f: impl Fn(&TimePoly) -> TimePoly) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|p| p.scale(s))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|p| p.scale_real(s))
    }

    pub fn derivative(&self) -> Self {
        self.map(TimePoly::derivative)
    }

    pub fn nth_derivative(&self, k: usize) -> Self {
        self.map(|p| p.nth_derivative(k))
    }

    pub fn trace(&self) -> TimePoly {
        (0..self.rows.min(self.cols)).fold(TimePoly::zero(), |acc, i| &acc + self.get(i, i))
    }

    /// Largest coefficient modulus over all entries.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(TimePoly::norm).fold(0.0, f64::max)
    }

    pub fn is_negligible(&self, tol: f64, scale: f64) -> bool {
        self.norm() <= tol * scale
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.entries.iter().filter_map(TimePoly::degree).max()
    }

    pub fn eval(&self, t: f64) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).eval(t))
    }

    /// Real part of the evaluated matrix.
    pub fn eval_re(&self, t: f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).eval_re(t))
    }

    /// Submatrix keeping the listed rows and columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    /// Trailing principal `k×k` block (first `n−k` rows and columns removed).
    pub fn trailing_principal(&self, k: usize) -> Self {
        let idx: Vec<usize> = (self.rows - k..self.rows).collect();
        self.select(&idx, &idx)
    }

    /// Block-diagonal matrix with `copies` copies of `self`.
    pub fn block_diagonal(&self, copies: usize) -> Self {
        let mut out = Self::zeros(self.rows * copies, self.cols * copies);
        for b in 0..copies {
            for i in 0..self.rows {
                for j in 0..self.cols {
                    out.set(b * self.rows + i, b * self.cols + j, self.get(i, j).clone());
                }
            }
        }
        out
    }

    /// Determinant in the polynomial ring, interpolated from numeric
    /// determinants at roots of unity. The degree bound is the sum of the
    /// row degrees.
    pub fn determinant(&self) -> TimePoly {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return TimePoly::one();
        }
        let mut bound = 0;
        for i in 0..n {
            match (0..n).filter_map(|j| self.get(i, j).degree()).max() {
                Some(d) => bound += d,
                None => return TimePoly::zero(),
            }
        }
        // Interpolate from values at the (bound + 1)-th roots of unity.
        let pts = bound + 1;
        let nodes: Vec<Complex64> = (0..pts)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / pts as f64))
            .collect();
        let values: Vec<Complex64> = nodes
            .iter()
            .map(|&z| {
                DMatrix::from_fn(n, n, |i, j| self.get(i, j).eval_complex(z)).determinant()
            })
            .collect();
        let coeffs: Vec<Complex64> = (0..pts)
            .map(|k| {
                values
                    .iter()
                    .zip(&nodes)
                    .map(|(v, z)| v * z.powu(k as u32).conj())
                    .sum::<Complex64>()
                    / pts as f64
            })
            .collect();
        let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let real = self.entries.iter().all(|p| p.coeffs().iter().all(|c| c.im == 0.0));
        let det = TimePoly::from_complex(coeffs).trimmed_against(DEFAULT_TRIM, scale);
        if real { det.real_part() } else { det }
    }

    /// Matrix of cofactors `(−1)^{i+j} M_{ij}`.
    pub fn cofactor_matrix(&self) -> Self {
        assert!(self.is_square());
        let n = self.rows;
        if n == 1 {
            return Self::identity(1);
        }
        Self::from_fn(n, n, |i, j| {
            let rows: Vec<usize> = (0..n).filter(|&r| r != i).collect();
            let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
            let minor = self.select(&rows, &cols).determinant();
            if (i + j) % 2 == 0 {
                minor
            } else {
                -minor
            }
        })
    }

    /// Faddeev–LeVerrier recursion. Returns the coefficients `c_0 = 1, c_1,
    /// …, c_n` of `det(τI − A) = Σ_k c_k τ^{n−k}` together with the matrices
    /// `B_0, …, B_{n−1}` of the adjugate `adj(τI − A) = Σ_h B_h τ^{n−1−h}`,
    /// where `B_h = Σ_{k≤h} c_k A^{h−k}`.
    pub fn characteristic_polynomial(&self) -> (Vec<TimePoly>, Vec<PolyMatrix>) {
        assert!(self.is_square());
        let n = self.rows;
        let mut c = vec![TimePoly::one()];
        let mut adj = Vec::with_capacity(n);
        let mut b = PolyMatrix::identity(n);
        for k in 1..=n {
            let ab = self * &b;
            let ck = ab.trace().scale_real(-1.0 / k as f64);
            adj.push(b);
            b = &ab + &PolyMatrix::scalar_identity(n, ck.clone());
            c.push(ck);
        }
        (c, adj)
    }

    /// Determinant by cofactor expansion along the first row. Exponential
    /// cost; kept as an independent route for small matrices.
    pub fn determinant_laplace(&self) -> TimePoly {
        assert!(self.is_square());
        let n = self.rows;
        match n {
            0 => TimePoly::one(),
            1 => self.get(0, 0).clone(),
            _ => {
                let mut acc = TimePoly::zero();
                for j in 0..n {
                    let rows: Vec<usize> = (1..n).collect();
                    let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
                    let term = self.get(0, j) * &self.select(&rows, &cols).determinant_laplace();
                    acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
                }
                acc
            }
        }
    }
}

impl Add for &PolyMatrix {
    type Output = PolyMatrix;
    fn add(self, rhs: &PolyMatrix) -> PolyMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &PolyMatrix {
    type Output = PolyMatrix;
    fn sub(self, rhs: &PolyMatrix) -> PolyMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &PolyMatrix {
    type Output = PolyMatrix;
    fn mul(self, rhs: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        PolyMatrix::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = TimePoly::zero();
            let mut scale: f64 = 0.0;
            let mut raw = Vec::<TimePoly>::with_capacity(self.cols);
            for k in 0..self.cols {
                let term = self.get(i, k) * rhs.get(k, j);
                scale = scale.max(term.norm());
                raw.push(term);
            }
            for term in &raw {
                acc = &acc + term;
            }
            acc.trimmed_against(super::poly::DEFAULT_TRIM, scale)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly_matrix(n: usize) -> impl Strategy<Value = PolyMatrix> {
        prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 0..4), n * n).prop_map(move |v| {
            PolyMatrix::from_fn(n, n, |i, j| TimePoly::from_real(&v[i * n + j]))
        })
    }

    #[test]
    fn determinant_of_diagonal() {
        let mut m = PolyMatrix::zeros(3, 3);
        m.set(0, 0, TimePoly::from_real(&[1.0, 1.0]));
        m.set(1, 1, TimePoly::from_real(&[0.0, 2.0]));
        m.set(2, 2, TimePoly::from_real(&[3.0]));
        let d = m.determinant();
        let expect = TimePoly::from_real(&[0.0, 6.0, 6.0]);
        assert!((&d - &expect).norm() < 1e-14);
    }

    #[test]
    fn singular_matrix_has_zero_determinant() {
        let row = vec![TimePoly::from_real(&[1.0, 2.0]), TimePoly::from_real(&[0.0, 1.0, 1.0])];
        let m = PolyMatrix::from_fn(2, 2, |_, j| row[j].clone());
        assert!(m.determinant().norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn interpolated_determinant_matches_laplace(m in poly_matrix(4)) {
            let a = m.determinant();
            let b = m.determinant_laplace();
            let scale = 1.0 + b.norm();
            prop_assert!((&a - &b).norm() <= 1e-9 * scale, "{a} vs {b}");
        }

        #[test]
        fn cofactor_identity(m in poly_matrix(3)) {
            // M · cof(M)^T = det(M) I
            let prod = &m * &m.cofactor_matrix().transpose();
            let det = m.determinant();
            let expect = PolyMatrix::scalar_identity(3, det);
            let scale = 1.0 + expect.norm();
            prop_assert!((&prod - &expect).norm() <= 1e-9 * scale);
        }
    }
}
