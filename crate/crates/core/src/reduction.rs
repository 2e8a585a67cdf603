//! Block Sylvester reduction of `D_t − A(t,ξ)` to an `m² × m²` system.
//!
//! With `L` the cofactor operator of `(D_t I − A)^T`,
//! `L ∘ (D_t I − A) = μ I − C` where `μ = det(τI − A)|_{τ→D_t}` and `C` has
//! order at most `m − 1`. Writing `W_{i,j} = ⟨ξ⟩^{m−j} D_t^{j−1} u_i` turns
//! `μ u = C u` into `D_t W = (𝓐 − 𝓛) W` with `m` identical companion blocks
//! in `𝓐` and an order-zero `𝓛`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::levi::{Bound, UNBOUNDED_RATIO};
use crate::linalg;
use crate::symbolic::{
    binomial, japanese_bracket, minus_i_pow, op_residual, OperatorPoly, PolyMatrix, SymbolMatrix, TimePoly,
};

/// Characteristic coefficients `c_0 = 1, …, c_m` of `A(t,ξ)` and the
/// matrices `A_h = Σ_{k≤h} c_k A^{h−k}`.
fn cofactor_data(a: &SymbolMatrix, xi: &[f64]) -> Result<(PolyMatrix, Vec<TimePoly>, Vec<PolyMatrix>)> {
    let ax = a.at(xi)?;
    let (c, adj) = ax.characteristic_polynomial();
    Ok((ax, c, adj))
}

/// `L = Σ_{h=0}^{m−1} A_h D_t^{m−1−h}`.
pub fn cofactor_operator(a: &SymbolMatrix, xi: &[f64]) -> Result<OperatorPoly> {
    let (_, _, adj) = cofactor_data(a, xi)?;
    Ok(assemble_cofactor(&adj))
}

fn assemble_cofactor(adj: &[PolyMatrix]) -> OperatorPoly {
    let m = adj.len();
    OperatorPoly::from_coeffs((0..m).map(|k| adj[m - 1 - k].clone()).collect())
}

/// `μ` as a scalar operator on `m` components together with `C`, the
/// latter assembled term by term from
/// `Σ_h A_h Σ_{q≥1} C(m−1−h, q) (D_t^q A) D_t^{m−1−h−q}`.
pub fn principal_and_lower(a: &SymbolMatrix, xi: &[f64]) -> Result<(OperatorPoly, OperatorPoly)> {
    let (ax, c, adj) = cofactor_data(a, xi)?;
    Ok((principal_operator(&c), lower_from_cofactors(&ax, &adj)))
}

fn principal_operator(c: &[TimePoly]) -> OperatorPoly {
    let m = c.len() - 1;
    let by_power: Vec<TimePoly> = (0..=m).map(|k| c[m - k].clone()).collect();
    OperatorPoly::scalar_on(m, &by_power)
}

fn lower_from_cofactors(ax: &PolyMatrix, adj: &[PolyMatrix]) -> OperatorPoly {
    let m = adj.len();
    let derivs: Vec<PolyMatrix> = (0..m).map(|q| ax.nth_derivative(q).scale(minus_i_pow(q))).collect();
    let mut coeffs = vec![PolyMatrix::zeros(m, m); m.max(1)];
    for (h, ah) in adj.iter().enumerate() {
        let top = m - 1 - h;
        for q in 1..=top {
            let term = (ah * &derivs[q]).scale_real(binomial(top, q));
            coeffs[top - q] = &coeffs[top - q] + &term;
        }
    }
    OperatorPoly::from_coeffs(coeffs)
}

/// Reduced system at one frequency. `𝓐` and `𝓛` are polynomial in `t`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockSylvesterSystem {
    pub xi: Vec<f64>,
    pub bracket: f64,
    pub m: usize,
    pub principal: PolyMatrix,
    pub lower: PolyMatrix,
    pub cofactor: OperatorPoly,
    pub mu: OperatorPoly,
    pub c: OperatorPoly,
    /// `A(t,ξ)`, kept for the initial-data map.
    pub symbol: PolyMatrix,
}

impl BlockSylvesterSystem {
    pub fn size(&self) -> usize {
        self.m * self.m
    }

    /// Index of `W_{i,j}` (both zero-based) in the stacked vector.
    pub fn index(&self, component: usize, level: usize) -> usize {
        component * self.m + level
    }

    pub fn principal_at(&self, t: f64) -> DMatrix<Complex64> {
        self.principal.eval(t)
    }

    pub fn lower_at(&self, t: f64) -> DMatrix<Complex64> {
        self.lower.eval(t)
    }

    /// Generator `G(t) = i(𝓐 − 𝓛)` of `∂_t V = G V`.
    pub fn generator(&self) -> PolyMatrix {
        (&self.principal - &self.lower).scale(Complex64::i())
    }

    /// `(op_residual(L∘(D_t − A), μI − C), order(C))`.
    pub fn verify(&self) -> Result<(f64, Option<usize>)> {
        let m = self.m;
        let d_minus_a = OperatorPoly::from_coeffs(vec![self.symbol.scale_real(-1.0), PolyMatrix::identity(m)]);
        let lhs = self.cofactor.compose(&d_minus_a)?;
        let rhs = self.mu.sub(&self.c)?;
        Ok((op_residual(&lhs, &rhs), self.c.order()))
    }

    /// Same system with `𝓛` multiplied by `⟨ξ⟩`: breaks the order-zero
    /// scaling on purpose.
    pub fn with_unscaled_lower(&self) -> Self {
        let mut out = self.clone();
        out.lower = self.lower.scale_real(self.bracket);
        out
    }

    /// `V(0) = (⟨ξ⟩^{m−j} D_t^{j−1} u(0))`, with `D_t^k u(0) = P_k(0) ĝ`,
    /// `P_0 = I`, `P_{k+1} = D_t P_k + P_k A`.
    pub fn initial_data(&self, g: &[Complex64]) -> Vec<Complex64> {
        let m = self.m;
        let mut p = PolyMatrix::identity(m);
        let mut out = vec![Complex64::new(0.0, 0.0); m * m];
        let gv = nalgebra::DVector::from_column_slice(g);
        for j in 0..m {
            let w = p.eval(0.0) * &gv;
            let s = self.bracket.powi((m - 1 - j) as i32);
            for i in 0..m {
                out[self.index(i, j)] = w[i] * s;
            }
            p = &p.derivative().scale(minus_i_pow(1)) + &(&p * &self.symbol);
        }
        out
    }

    /// Recovers `u = (W_{i,1}) ⟨ξ⟩^{1−m}` from a reduced state.
    pub fn solution_component(&self, v: &[Complex64]) -> Vec<Complex64> {
        let s = self.bracket.powi(1 - self.m as i32);
        (0..self.m).map(|i| v[self.index(i, 0)] * s).collect()
    }
}

pub fn block_sylvester_assemble(a: &SymbolMatrix, xi: &[f64]) -> Result<BlockSylvesterSystem> {
    let (ax, c, adj) = cofactor_data(a, xi)?;
    let m = a.size();
    let b = japanese_bracket(xi);
    let mu = principal_operator(&c);
    let lower_op = lower_from_cofactors(&ax, &adj);

    let n = m * m;
    let mut principal = PolyMatrix::zeros(n, n);
    let mut lower = PolyMatrix::zeros(n, n);
    for i in 0..m {
        for j in 0..m - 1 {
            principal.set(i * m + j, i * m + j + 1, TimePoly::real_constant(b));
        }
        // row (i, m): −c_h ⟨ξ⟩^{1−h} at column (i, m − h + 1)
        for h in 1..=m {
            principal.set(i * m + m - 1, i * m + m - h, c[h].scale_real(-b.powi(1 - h as i32)));
        }
        // −C_{k, ij} ⟨ξ⟩^{k+1−m} at column (j, k + 1)
        for (k, ck) in lower_op.coeffs().iter().enumerate() {
            let s = -b.powi(k as i32 + 1 - m as i32);
            for j in 0..m {
                lower.set(i * m + m - 1, j * m + k, ck.get(i, j).scale_real(s));
            }
        }
    }
    Ok(BlockSylvesterSystem {
        xi: xi.to_vec(),
        bracket: b,
        m,
        principal,
        lower,
        cofactor: assemble_cofactor(&adj),
        mu,
        c: lower_op,
        symbol: ax,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerOrderBound {
    pub bound: Bound,
    /// `(t, ξ)` attaining the supremum.
    pub witness: (f64, Vec<f64>),
    /// `A` does not depend on `t` yet `𝓛 ≠ 0`.
    pub contradiction: bool,
    pub t_points: usize,
    pub xi_points: usize,
}

/// Smallest `c` with `‖𝓛(t,ξ)‖ ≤ c max_{1≤k≤m−1} ‖D_t^k A_0(t,ξ)‖` on the
/// grid. Points where both sides vanish are skipped.
pub fn lower_order_bound_check(
    systems: &[BlockSylvesterSystem],
    a: &SymbolMatrix,
    t_grid: &[f64],
) -> Result<LowerOrderBound> {
    let m = a.size();
    let per_xi: Vec<Result<(f64, f64, bool)>> = systems
        .par_iter()
        .map(|bs| {
            let a0 = a.normalized_at(&bs.xi)?;
            let derivs: Vec<PolyMatrix> = (1..m).map(|k| a0.nth_derivative(k)).collect();
            let scale = bs.lower.norm().max(f64::MIN_POSITIVE);
            let mut best = (0.0, t_grid.first().copied().unwrap_or(0.0), false);
            for &t in t_grid {
                let num = linalg::spectral_norm_c(&bs.lower_at(t));
                let den = derivs
                    .iter()
                    .map(|d| linalg::spectral_norm(&d.eval_re(t)))
                    .fold(0.0, f64::max);
                if num <= 1e-14 * scale {
                    continue;
                }
                if den == 0.0 || num / den > UNBOUNDED_RATIO {
                    return Ok((f64::INFINITY, t, true));
                }
                if num / den > best.0 {
                    best = (num / den, t, false);
                }
            }
            Ok(best)
        })
        .collect();
    let mut out = LowerOrderBound {
        bound: Bound::Finite(0.0),
        witness: (t_grid.first().copied().unwrap_or(0.0), systems.first().map(|s| s.xi.clone()).unwrap_or_default()),
        contradiction: false,
        t_points: t_grid.len(),
        xi_points: systems.len(),
    };
    for (bs, r) in systems.iter().zip(per_xi) {
        let (v, t, unbounded) = r?;
        if unbounded {
            out.bound = Bound::Unbounded;
            out.witness = (t, bs.xi.clone());
            out.contradiction |= a.is_time_constant();
        } else if out.bound.is_finite() && v > out.bound.value() {
            out.bound = Bound::Finite(v);
            out.witness = (t, bs.xi.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::complex_eigenvalues;
    use proptest::prelude::*;

    fn sym2(entries: &[((usize, usize), &[f64])]) -> SymbolMatrix {
        let mut a = PolyMatrix::zeros(2, 2);
        for &((i, j), c) in entries {
            a.set(i, j, TimePoly::from_real(c));
        }
        SymbolMatrix::one_dimensional(a).unwrap()
    }

    fn jt() -> SymbolMatrix {
        sym2(&[((0, 1), &[1.0]), ((1, 0), &[0.0, 0.0, 1.0])])
    }

    #[test]
    fn scalar_cofactor_is_identity() {
        let a = SymbolMatrix::one_dimensional(PolyMatrix::from_fn(1, 1, |_, _| TimePoly::from_real(&[0.0, 1.0]))).unwrap();
        let l = cofactor_operator(&a, &[3.0]).unwrap();
        assert_eq!(l.order(), Some(0));
        assert!(op_residual(&l, &OperatorPoly::identity(1)) == 0.0);
        let bs = block_sylvester_assemble(&a, &[3.0]).unwrap();
        assert!((bs.principal.get(0, 0).eval_re(0.5) - 1.5).abs() < 1e-15);
        assert!(bs.lower.is_negligible(0.0, 1.0));
    }

    #[test]
    fn two_by_two_cofactor() {
        let a = sym2(&[((0, 0), &[1.0, 1.0]), ((0, 1), &[2.0]), ((1, 1), &[0.0, 0.0, 3.0])]);
        let xi = [2.0];
        let l = cofactor_operator(&a, &xi).unwrap();
        let ax = a.at(&xi).unwrap();
        let expect = OperatorPoly::from_coeffs(vec![
            &ax - &PolyMatrix::scalar_identity(2, ax.trace()),
            PolyMatrix::identity(2),
        ]);
        assert!(op_residual(&l, &expect) < 1e-13);

        let l = cofactor_operator(&jt(), &[5.0]).unwrap();
        let expect = OperatorPoly::from_coeffs(vec![jt().at(&[5.0]).unwrap(), PolyMatrix::identity(2)]);
        assert!(op_residual(&l, &expect) < 1e-13);
    }

    #[test]
    fn jt_lower_order_term() {
        let xi = 3.0;
        let (_, c) = principal_and_lower(&jt(), &[xi]).unwrap();
        // C = D_t A = −iξ [[0,0],[2t,0]]
        let mut expect = PolyMatrix::zeros(2, 2);
        expect.set(1, 0, TimePoly::from_complex(vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, -2.0 * xi)]));
        assert!(op_residual(&c, &OperatorPoly::multiplication(expect)) < 1e-13);
        let bs = block_sylvester_assemble(&jt(), &[xi]).unwrap();
        let (res, order) = bs.verify().unwrap();
        assert!(res < 1e-12 && order == Some(0));
    }

    #[test]
    fn constant_system_has_no_lower_order_terms() {
        let a = sym2(&[((0, 0), &[1.0]), ((0, 1), &[0.5]), ((1, 1), &[2.0])]);
        let (_, c) = principal_and_lower(&a, &[4.0]).unwrap();
        assert_eq!(c.order(), None);
        let bs = block_sylvester_assemble(&a, &[4.0]).unwrap();
        let r = lower_order_bound_check(&[bs], &a, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(r.bound, Bound::Finite(0.0));
        assert!(!r.contradiction);
    }

    #[test]
    fn jt_block_is_companion() {
        let xi = 7.0;
        let b = japanese_bracket(&[xi]);
        let bs = block_sylvester_assemble(&jt(), &[xi]).unwrap();
        let t = 0.6;
        let p = bs.principal.eval_re(t);
        for blk in 0..2 {
            let o = 2 * blk;
            assert!((p[(o, o + 1)] - b).abs() < 1e-12);
            assert!((p[(o + 1, o)] - b * t * t * xi * xi / (b * b)).abs() < 1e-12);
            assert_eq!(p[(o, o)], 0.0);
        }
        // only block-last rows of 𝓛 are nonzero
        for row in [0, 2] {
            for col in 0..4 {
                assert!(bs.lower.get(row, col).is_zero());
            }
        }
    }

    #[test]
    fn jt_lower_bound_is_one() {
        // ‖𝓛‖ = 2t|ξ|/⟨ξ⟩ = ‖∂_t A_0‖
        let systems: Vec<_> = [1.0, 10.0, 100.0].iter().map(|&x| block_sylvester_assemble(&jt(), &[x]).unwrap()).collect();
        let grid: Vec<f64> = (0..=64).map(|k| k as f64 / 64.0).collect();
        let r = lower_order_bound_check(&systems, &jt(), &grid).unwrap();
        assert!((r.bound.value() - 1.0).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn initial_data_follows_the_system() {
        let xi = 2.0;
        let bs = block_sylvester_assemble(&jt(), &[xi]).unwrap();
        let g = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        let v = bs.initial_data(&g);
        let b = bs.bracket;
        // level 0: ⟨ξ⟩ g; level 1: A(0)g = [ξ g_2, 0]
        assert!((v[0] - b).norm() < 1e-14 && (v[2] + b).norm() < 1e-14);
        assert!((v[1] - Complex64::new(-xi, 0.0)).norm() < 1e-14 && v[3].norm() < 1e-14);
        assert_eq!(bs.solution_component(&v), g.to_vec());
    }

    fn random_symbol(m: usize) -> impl Strategy<Value = SymbolMatrix> {
        prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 0..4), m * m).prop_map(move |v| {
            SymbolMatrix::one_dimensional(PolyMatrix::from_fn(m, m, |i, j| TimePoly::from_real(&v[i * m + j]))).unwrap()
        })
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn reduction_identity(a in random_symbol(3), xi in 1.0f64..5.0) {
            let bs = block_sylvester_assemble(&a, &[xi]).unwrap();
            let (res, order) = bs.verify().unwrap();
            let scale = 1.0 + bs.mu.norm() * bs.cofactor.norm();
            prop_assert!(res <= 1e-9 * scale, "residual {res}");
            prop_assert!(order.is_none_or(|o| o <= 2));
        }

        #[test]
        fn block_spectrum_repeats_symbol_spectrum(a in random_symbol(2), xi in 1.0f64..5.0, t in 0.0f64..1.0) {
            let bs = block_sylvester_assemble(&a, &[xi]).unwrap();
            let big = sorted(complex_eigenvalues(&bs.principal.eval_re(t)));
            let small = complex_eigenvalues(&a.eval(t, &[xi]).unwrap());
            let expect = sorted(small.iter().flat_map(|l| std::iter::repeat_n(*l, 2)).collect());
            let scale = 1.0 + big.iter().map(|l| l.norm()).fold(0.0, f64::max);
            for (x, y) in big.iter().zip(&expect) {
                prop_assert!((x - y).norm() <= 1e-6 * scale, "{big:?} vs {expect:?}");
            }
        }
    }
}
