//! Small numeric helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Operator 2-norm of a real matrix.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Operator 2-norm of a complex matrix.
pub fn spectral_norm_c(a: &DMatrix<Complex64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().copied().fold(0.0, f64::max)
}

pub fn complex_eigenvalues(a: &DMatrix<f64>) -> Vec<Complex64> {
    a.complex_eigenvalues().iter().copied().collect()
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let sym = (a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `⟨M v, v⟩` for Hermitian-part evaluation; returns the real part.
pub fn quadratic_form(m: &DMatrix<Complex64>, v: &[Complex64]) -> f64 {
    let n = v.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..n {
            row += m[(i, j)] * v[j];
        }
        acc += v[i].conj() * row;
    }
    acc.re
}

pub fn vector_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}
