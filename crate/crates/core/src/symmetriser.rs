//! Root-free construction of the standard symmetriser.
//!
//! For a fixed frequency `ξ` the normalised symbol `A_0 = ⟨ξ⟩⁻¹A` has
//! characteristic polynomial `p(τ) = τ^m − h_1 τ^{m−1} − … − h_m` with
//! coefficients that are polynomials in `t`. The symmetriser of the
//! companion matrix of `p` is the Bezoutian of `p` and `∂_τ p`:
//!
//! ```text
//! (p(τ) p'(σ) − p'(τ) p(σ)) / (τ − σ) = Σ_{i,j} Q_ij τ^{i−1} σ^{j−1}
//! ```
//!
//! which equals `Σ_k c(p_k) c(p_k)^T` with `p_k = p / (τ − λ_k)`. Every entry
//! is a polynomial in the `h_j`, so `Q(t)` is an exact [`PolyMatrix`] and
//! no eigenvalue branch is ever consulted.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg;
use crate::symbolic::{japanese_bracket, PolyMatrix, SymbolMatrix, TimePoly};

/// Relative coefficient norm below which a minor counts as identically zero.
pub const ZERO_POLY_TOL: f64 = 1e-9;

/// `det(τI − A_0(t,ξ)) = τ^m − Σ_j h_j(t) τ^{m−j}` for one frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharPolyPath {
    pub xi: Vec<f64>,
    /// `h_1, …, h_m`
    pub h: Vec<TimePoly>,
}

impl CharPolyPath {
    pub fn degree(&self) -> usize {
        self.h.len()
    }

    /// Coefficients `a_0, …, a_m` of `p(τ) = Σ_k a_k τ^k`.
    pub fn tau_coeffs(&self) -> Vec<TimePoly> {
        let m = self.h.len();
        let mut a = vec![TimePoly::zero(); m + 1];
        a[m] = TimePoly::one();
        for (j, hj) in self.h.iter().enumerate() {
            a[m - (j + 1)] = -hj;
        }
        a
    }

    /// `p(t, τ)` for real `τ`.
    pub fn eval(&self, t: f64, tau: f64) -> f64 {
        self.tau_coeffs()
            .iter()
            .rev()
            .fold(0.0, |acc, a| acc * tau + a.eval_re(t))
    }

    /// Companion matrix in Sylvester form: ones on the superdiagonal, last
    /// row `(h_m, h_{m−1}, …, h_1)`.
    pub fn companion(&self) -> PolyMatrix {
        let m = self.h.len();
        let mut c = PolyMatrix::zeros(m, m);
        for i in 0..m.saturating_sub(1) {
            c.set(i, i + 1, TimePoly::one());
        }
        for j in 0..m {
            c.set(m - 1, j, self.h[m - 1 - j].clone());
        }
        c
    }
}

/// Characteristic polynomial of `A_0(·,ξ)` with exact time-polynomial
/// coefficients (Faddeev–LeVerrier in the polynomial ring).
pub fn char_poly_path(a: &SymbolMatrix, xi: &[f64]) -> Result<CharPolyPath> {
    let a0 = a.normalized_at(xi)?;
    let (c, _) = a0.characteristic_polynomial();
    let h = c[1..].iter().map(|ck| (-ck).real_part()).collect();
    Ok(CharPolyPath { xi: xi.to_vec(), h })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetriserPath {
    pub xi: Vec<f64>,
    pub char_poly: CharPolyPath,
    pub q: PolyMatrix,
    /// `Δ_1, …, Δ_m`; `Δ_j` is the determinant of the trailing principal
    /// `j×j` block, so `Δ_m = Δ = det Q`.
    pub minors: Vec<TimePoly>,
    pub psi: CheckFunction,
    /// `d_0, …, d_m` with `det(τQ − ∂_tQ) = Σ_j d_j τ^{m−j}`.
    pub hc_coeffs: Vec<TimePoly>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckFunction {
    pub value: TimePoly,
    /// False for `m = 1`, where the value is the zero polynomial.
    pub defined: bool,
}

impl SymmetriserPath {
    pub fn size(&self) -> usize {
        self.q.rows()
    }

    pub fn delta(&self) -> &TimePoly {
        self.minors.last().expect("m ≥ 1")
    }

    /// Reference magnitude of `Q`'s coefficients, at least one.
    pub fn q_scale(&self) -> f64 {
        self.q.norm().max(1.0)
    }

    /// Scale against which a `j×j` minor is judged to vanish.
    pub fn minor_scale(&self, j: usize) -> f64 {
        self.q_scale().powi(j as i32)
    }

    pub fn delta_identically_zero(&self) -> bool {
        let m = self.size();
        self.delta().is_negligible(ZERO_POLY_TOL, self.minor_scale(m))
    }

    /// Indices `j` (1-based) whose minor `Δ_j` vanishes identically.
    pub fn vanishing_minors(&self) -> Vec<usize> {
        self.minors
            .iter()
            .enumerate()
            .filter(|(k, d)| d.is_negligible(ZERO_POLY_TOL, self.minor_scale(k + 1)))
            .map(|(k, _)| k + 1)
            .collect()
    }

    pub fn q_at(&self, t: f64) -> DMatrix<f64> {
        self.q.eval_re(t)
    }

    /// Explicit constants for `c_1 det Q |V|² ≤ ⟨QV,V⟩ ≤ c_2 |V|²` over the
    /// given samples: `c_2 = sup tr Q`, `c_1 = 1 / sup (tr Q)^{m−1}`.
    pub fn gr_constants(&self, samples: &[f64]) -> (f64, f64) {
        let m = self.size() as i32;
        let sup_tr = samples
            .iter()
            .map(|&t| self.q.trace().eval_re(t))
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        (1.0 / sup_tr.powi(m - 1), sup_tr)
    }
}

/// Bezoutian of `p` and `∂_τp` as a matrix of time polynomials.
pub fn bezoutian(cp: &CharPolyPath) -> PolyMatrix {
    let m = cp.degree();
    let p = cp.tau_coeffs();
    let dp: Vec<TimePoly> = (0..=m)
        .map(|k| if k < m { p[k + 1].scale_real((k + 1) as f64) } else { TimePoly::zero() })
        .collect();
    let mut q = PolyMatrix::zeros(m, m);
    // Antisymmetric coefficient c_ab of τ^a σ^b − τ^b σ^a divided by τ − σ.
    for a in 1..=m {
        for b in 0..a {
            let c = &(&p[a] * &dp[b]) - &(&dp[a] * &p[b]);
            if c.is_zero() {
                continue;
            }
            for k in 0..a - b {
                let (i, j) = (b + k, a - 1 - k);
                let updated = q.get(i, j) + &c;
                q.set(i, j, updated);
            }
        }
    }
    q.map(TimePoly::real_part)
}

pub fn build_symmetriser(cp: &CharPolyPath) -> SymmetriserPath {
    let q = bezoutian(cp);
    let m = q.rows();
    let minors: Vec<TimePoly> = (1..=m)
        .map(|j| q.trailing_principal(j).determinant().real_part())
        .collect();
    let mut sp = SymmetriserPath {
        xi: cp.xi.clone(),
        char_poly: cp.clone(),
        q,
        minors,
        psi: CheckFunction { value: TimePoly::zero(), defined: false },
        hc_coeffs: Vec::new(),
    };
    sp.psi = check_function(&sp);
    sp.hc_coeffs = hamilton_cayley(&sp);
    sp
}

/// `ψ = ½ trace(∂_tQ ∂_t(Q^co))`
pub fn check_function(sp: &SymmetriserPath) -> CheckFunction {
    let m = sp.size();
    if m < 2 {
        return CheckFunction { value: TimePoly::zero(), defined: false };
    }
    let dq = sp.q.derivative();
    let dco = sp.q.cofactor_matrix().derivative();
    let mut terms = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            terms.push(dq.get(i, j) * dco.get(j, i));
        }
    }
    let scale = terms.iter().map(TimePoly::norm).fold(0.0, f64::max);
    let sum = terms.iter().fold(TimePoly::zero(), |acc, p| &acc + p);
    let value = sum
        .scale_real(0.5)
        .real_part()
        .trimmed_against(crate::symbolic::DEFAULT_TRIM, scale);
    // ψ is a polynomial in the h_j of the same homogeneity as a minor of
    // order m; coefficient noise below that scale is dropped.
    let value = if value.is_negligible(ZERO_POLY_TOL, sp.minor_scale(m)) {
        TimePoly::zero()
    } else {
        value
    };
    CheckFunction { value, defined: true }
}

/// Coefficients `d_0, …, d_m` of the generalised Hamilton–Cayley polynomial
/// `det(τQ − ∂_tQ)`, recovered from its values at the `(m+1)`-th roots of
/// unity.
pub fn hamilton_cayley(sp: &SymmetriserPath) -> Vec<TimePoly> {
    let m = sp.size();
    let n = m + 1;
    let q = &sp.q;
    let dq = q.derivative();
    let nodes: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
        .collect();
    let values: Vec<TimePoly> = nodes
        .iter()
        .map(|&w| (&q.scale(w) - &dq).determinant())
        .collect();
    let scale = values.iter().map(TimePoly::norm).fold(0.0, f64::max);
    // e_p = (1/n) Σ_k ω_k^{−p} P(ω_k) is the coefficient of τ^p; d_j = e_{m−j}.
    (0..=m)
        .map(|j| {
            let p = m - j;
            let acc = nodes.iter().zip(&values).fold(TimePoly::zero(), |acc, (w, v)| {
                &acc + &v.scale(w.powu(p as u32).conj())
            });
            acc.scale_real(1.0 / n as f64)
                .real_part()
                .trimmed_against(crate::symbolic::DEFAULT_TRIM, scale)
        })
        .collect()
}

/// Roots `τ_j` of `det(τQ − ∂_tQ)` at time `t`, from the eigenvalues of
/// `Q⁻¹ ∂_tQ`. `None` where `Q(t)` is singular.
pub fn hc_roots_numeric(sp: &SymmetriserPath, t: f64) -> Option<Vec<Complex64>> {
    let q = sp.q.eval_re(t);
    let dq = sp.q.derivative().eval_re(t);
    let inv = q.try_inverse()?;
    Some(linalg::complex_eigenvalues(&(inv * dq)))
}

/// `Π_{k<j} ⟨ξ⟩⁻²(λ_j − λ_k)²` from explicit eigenvalues.
pub fn discriminant_from_roots(eigs: &[f64], xi: &[f64]) -> f64 {
    let b2 = japanese_bracket(xi).powi(2);
    let mut acc = 1.0;
    for j in 0..eigs.len() {
        for k in 0..j {
            acc *= (eigs[j] - eigs[k]).powi(2) / b2;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::SymbolMatrix;

    fn jt_symbol() -> SymbolMatrix {
        let mut a = PolyMatrix::zeros(2, 2);
        a.set(0, 1, TimePoly::one());
        a.set(1, 0, TimePoly::from_real(&[0.0, 0.0, 1.0]));
        SymbolMatrix::one_dimensional(a).unwrap()
    }

    fn close(p: &TimePoly, q: &TimePoly, tol: f64) -> bool {
        (p - q).norm() <= tol * (1.0 + q.norm())
    }

    #[test]
    fn char_poly_of_jt_example() {
        let cp = char_poly_path(&jt_symbol(), &[1.0]).unwrap();
        assert!(cp.h[0].norm() < 1e-15);
        assert!(close(&cp.h[1], &TimePoly::from_real(&[0.0, 0.0, 0.5]), 1e-14));
    }

    #[test]
    fn char_poly_of_diagonal() {
        let a = PolyMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]);
        let cp = char_poly_path(&SymbolMatrix::one_dimensional(a).unwrap(), &[1.0]).unwrap();
        assert!((cp.h[0].eval_re(0.0) - 3.0 / 2f64.sqrt()).abs() < 1e-14);
        assert!((cp.h[1].eval_re(0.0) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn char_poly_scalar() {
        let a = PolyMatrix::from_fn(1, 1, |_, _| TimePoly::from_real(&[0.5, 1.0]));
        let xi = [3.0];
        let cp = char_poly_path(&SymbolMatrix::one_dimensional(a).unwrap(), &xi).unwrap();
        let expect = TimePoly::from_real(&[0.5, 1.0]).scale_real(3.0 / japanese_bracket(&xi));
        assert!(close(&cp.h[0], &expect, 1e-14));
    }

    #[test]
    fn scalar_symmetriser_is_one() {
        let cp = CharPolyPath { xi: vec![1.0], h: vec![TimePoly::identity()] };
        let sp = build_symmetriser(&cp);
        assert!(close(sp.q.get(0, 0), &TimePoly::one(), 0.0));
        assert!(!sp.psi.defined);
        assert!(sp.psi.value.is_zero());
    }

    #[test]
    fn jt_delta_and_jacobi() {
        let xi = [1.0];
        let sp = build_symmetriser(&char_poly_path(&jt_symbol(), &xi).unwrap());
        let b2 = japanese_bracket(&xi).powi(2);
        let delta = TimePoly::from_real(&[0.0, 0.0, 4.0 / b2]);
        assert!(close(sp.delta(), &delta, 1e-13));
        assert!(close(&sp.hc_coeffs[0], &delta, 1e-13));
        assert!(close(&sp.hc_coeffs[1], &TimePoly::from_real(&[0.0, -8.0 / b2]), 1e-13));
        assert!(sp.psi.defined);
        assert!(sp.psi.value.is_zero());
    }

    #[test]
    fn constant_q_has_trivial_hamilton_cayley() {
        let cp = CharPolyPath {
            xi: vec![1.0],
            h: vec![TimePoly::real_constant(0.3), TimePoly::real_constant(0.7), TimePoly::real_constant(-0.1)],
        };
        let sp = build_symmetriser(&cp);
        assert!(close(&sp.hc_coeffs[0], &sp.q.determinant(), 1e-12));
        for d in &sp.hc_coeffs[1..] {
            assert!(d.norm() < 1e-12);
        }
        assert!(sp.psi.value.is_zero());
    }
}
