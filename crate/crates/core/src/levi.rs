//! Levi-type conditions and the bad sets where `Δ` is small.
//!
//! The two hypotheses are measured, not proved: their best constants are
//! estimated as suprema of the relevant ratios over a Chebyshev grid, and a
//! second pass on a nested refinement detects ratios that blow up.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::roots::{critical_points_in, horner, real_roots_in, sup_abs_on};
use crate::symbolic::{japanese_bracket, SymbolMatrix, TimePoly};
use crate::symmetriser::{SymmetriserPath, ZERO_POLY_TOL};

/// Ratios above this are reported as unbounded.
pub const UNBOUNDED_RATIO: f64 = 1e12;
/// A refined supremum exceeding the coarse one by this factor is divergent.
pub const DIVERGENCE_FACTOR: f64 = 1.5;
/// Relative floor used in `Δ̃` against floating cancellation at near-zeros.
pub const DEFAULT_FLOOR: f64 = 1e-14;
/// Taylor coefficients below this fraction of the largest one are treated
/// as zero when reading off the vanishing order.
const TAYLOR_ZERO: f64 = 1e-7;

/// `n + 1` Chebyshev–Lobatto nodes on `[a, b]`, ascending. Doubling `n`
/// gives a superset.
pub fn chebyshev_lobatto(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n)
        .map(|k| a + 0.5 * (b - a) * (1.0 - (PI * k as f64 / n as f64).cos()))
        .collect()
}

/// Inserts the midpoint of every pair of neighbours.
pub fn refine_nested(grid: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * grid.len());
    for w in grid.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    if let Some(&last) = grid.last() {
        out.push(last);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Bound {
    Finite(f64),
    Unbounded,
}

impl Bound {
    pub fn is_finite(&self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    pub fn value(&self) -> f64 {
        match self {
            Bound::Finite(v) => *v,
            Bound::Unbounded => f64::INFINITY,
        }
    }

    pub fn max(self, other: Bound) -> Bound {
        match (self, other) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a.max(b)),
            _ => Bound::Unbounded,
        }
    }
}

/// Best constant estimate for one inequality at one frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub bound: Bound,
    /// Supremum on the supplied grid and on its nested refinement.
    pub coarse: Bound,
    pub refined: Bound,
    /// `t` where the refined supremum is attained.
    pub witness_t: f64,
    pub grid_points: usize,
}

/// Supremum of a ratio `num/den` sampled on a grid. `None` marks a `0/0`
/// point, skipped.
fn ratio_sup(grid: &[f64], ratio: impl Fn(f64) -> Option<f64> + Sync) -> (Bound, f64) {
    let vals: Vec<Option<f64>> = grid.par_iter().map(|&t| ratio(t)).collect();
    let mut best = 0.0;
    let mut at = grid.first().copied().unwrap_or(0.0);
    for (t, v) in grid.iter().zip(vals) {
        let Some(v) = v else { continue };
        if !v.is_finite() || v > UNBOUNDED_RATIO {
            return (Bound::Unbounded, *t);
        }
        if v > best {
            best = v;
            at = *t;
        }
    }
    (Bound::Finite(best), at)
}

fn estimate(grid: &[f64], ratio: impl Fn(f64) -> Option<f64> + Sync) -> ConstantEstimate {
    let (coarse, _) = ratio_sup(grid, &ratio);
    let fine_grid = refine_nested(grid);
    let (refined, witness_t) = ratio_sup(&fine_grid, &ratio);
    let bound = match (coarse, refined) {
        (Bound::Finite(c), Bound::Finite(r)) if r <= DIVERGENCE_FACTOR * c || r == 0.0 => Bound::Finite(r),
        _ => Bound::Unbounded,
    };
    ConstantEstimate { bound, coarse, refined, witness_t, grid_points: grid.len() }
}

/// `Δ̃ = Δ + (∂_tΔ)²/Δ` evaluated at `t`. `floor` is an absolute lower
/// bound for the denominator. Where `Δ(t) ≤ floor` the value is taken from
/// the local Taylor expansion: a zero of order exactly two contributes its
/// limit `4a_2`, higher-order zeros contribute `0`.
pub fn delta_tilde(delta: &TimePoly, t: f64, floor: f64) -> Result<f64> {
    if delta.is_zero() {
        return Err(Error::IdenticallyZeroDelta { xi: Vec::new() });
    }
    let d = delta.eval_re(t);
    let dd = delta.eval_deriv(t, 1).re;
    if d > floor {
        return Ok(d + dd * dd / d);
    }
    let taylor: Vec<f64> = delta.taylor_at(t).iter().map(|c| c.re).collect();
    let big = taylor.iter().map(|c| c.abs()).fold(0.0, f64::max);
    let order = taylor.iter().position(|c| c.abs() > TAYLOR_ZERO * big).unwrap_or(0);
    Ok(match order {
        0 | 1 => d.max(0.0) + dd * dd / floor.max(f64::MIN_POSITIVE),
        2 => d.max(0.0) + 4.0 * taylor[2],
        _ => d.max(0.0),
    })
}

/// `Δ̃` along a frequency path with the floor tied to `‖Δ‖_∞` on the
/// working interval.
#[derive(Clone, Debug)]
pub struct DeltaTilde {
    delta: TimePoly,
    floor: f64,
}

impl DeltaTilde {
    pub fn new(sp: &SymmetriserPath, interval: (f64, f64), floor_rel: f64) -> Result<Self> {
        if sp.delta_identically_zero() {
            return Err(Error::IdenticallyZeroDelta { xi: sp.xi.clone() });
        }
        let delta = sp.delta().clone();
        let sup = sup_abs_on(&delta.real_coeffs(), interval.0, interval.1);
        Ok(Self { delta, floor: floor_rel * sup })
    }

    pub fn eval(&self, t: f64) -> f64 {
        delta_tilde(&self.delta, t, self.floor).expect("Δ ≢ 0 checked at construction")
    }
}

/// Estimate of the best `C` in `|ψ| ≤ C Δ̃` on the grid.
pub fn check_gr1m(sp: &SymmetriserPath, t_grid: &[f64]) -> Result<ConstantEstimate> {
    let (a, b) = grid_interval(t_grid);
    let dt = DeltaTilde::new(sp, (a, b), DEFAULT_FLOOR)?;
    let psi = &sp.psi.value;
    if psi.is_zero() {
        return Ok(ConstantEstimate {
            bound: Bound::Finite(0.0),
            coarse: Bound::Finite(0.0),
            refined: Bound::Finite(0.0),
            witness_t: a,
            grid_points: t_grid.len(),
        });
    }
    let psi_scale = sup_abs_on(&psi.real_coeffs(), a, b);
    Ok(estimate(t_grid, |t| {
        let num = psi.eval_re(t).abs();
        let den = dt.eval(t);
        if den <= 0.0 {
            return if num <= ZERO_POLY_TOL * psi_scale { None } else { Some(f64::INFINITY) };
        }
        Some(num / den)
    }))
}

/// Estimate of the best `C` in
/// `max_{1≤k≤m−1} ‖∂_t^k A_0‖ ≤ C (Δ + |∂_tΔ|)` on the grid, with the
/// spectral norm.
pub fn check_gr_levi(a: &SymbolMatrix, sp: &SymmetriserPath, t_grid: &[f64]) -> Result<ConstantEstimate> {
    if sp.delta_identically_zero() {
        return Err(Error::IdenticallyZeroDelta { xi: sp.xi.clone() });
    }
    let m = a.size();
    let a0 = a.normalized_at(&sp.xi)?;
    let derivs: Vec<_> = (1..m).map(|k| a0.nth_derivative(k)).collect();
    let delta = sp.delta();
    let ddelta = delta.derivative();
    let (lo, hi) = grid_interval(t_grid);
    let den_scale = sup_abs_on(&delta.real_coeffs(), lo, hi) + sup_abs_on(&ddelta.real_coeffs(), lo, hi);
    let num_scale = derivs.iter().map(|d| d.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    Ok(estimate(t_grid, |t| {
        let num = derivs
            .iter()
            .map(|d| linalg::spectral_norm(&d.eval_re(t)))
            .fold(0.0, f64::max);
        let den = delta.eval_re(t).max(0.0) + ddelta.eval_re(t).abs();
        if den <= 1e-14 * den_scale {
            return if num <= 1e-12 * num_scale { None } else { Some(f64::INFINITY) };
        }
        Some(num / den)
    }))
}

fn grid_interval(grid: &[f64]) -> (f64, f64) {
    let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BadSet {
    pub xi: Vec<f64>,
    pub epsilon: f64,
    /// `c_1 ε^{2q} ‖Δ‖_∞`
    pub threshold: f64,
    pub delta_sup: f64,
    pub interval: (f64, f64),
    /// Disjoint open intervals, ascending.
    pub intervals: Vec<(f64, f64)>,
    pub total_length: f64,
}

impl BadSet {
    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| t > a && t < b)
    }

    /// Closed intervals making up the complement in the working interval.
    pub fn complement(&self) -> Vec<(f64, f64)> {
        let (lo, hi) = self.interval;
        let mut out = Vec::new();
        let mut cur = lo;
        for &(a, b) in &self.intervals {
            if a > cur {
                out.push((cur, a));
            }
            cur = cur.max(b);
        }
        if cur < hi {
            out.push((cur, hi));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BadSetParams {
    pub c1: f64,
    pub q: u32,
}

impl Default for BadSetParams {
    fn default() -> Self {
        Self { c1: 0.25, q: 1 }
    }
}

/// Sub-level set `{t ∈ [a,b] : Δ(t) < c_1 ε^{2q} ‖Δ‖_{L∞([a,b])}}` from the
/// real roots of `Δ − threshold`.
pub fn bad_set_detect(
    delta: &TimePoly,
    epsilon: f64,
    params: BadSetParams,
    interval: (f64, f64),
) -> Result<BadSet> {
    if !(epsilon > 0.0 && epsilon <= (-1.0f64).exp()) {
        return Err(Error::InvalidArgument(format!("ε = {epsilon} outside (0, 1/e]")));
    }
    let c = delta.real_coeffs();
    let sup = sup_abs_on(&c, interval.0, interval.1);
    if delta.is_zero() || sup == 0.0 {
        return Err(Error::IdenticallyZeroDelta { xi: Vec::new() });
    }
    let threshold = params.c1 * epsilon.powi(2 * params.q as i32) * sup;
    let mut shifted = c.clone();
    shifted[0] -= threshold;
    let mut cuts = vec![interval.0];
    cuts.extend(
        real_roots_in(&shifted, interval.0, interval.1)
            .into_iter()
            .filter(|&r| r > interval.0 && r < interval.1),
    );
    cuts.push(interval.1);

    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for w in cuts.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        if horner(&c, 0.5 * (w[0] + w[1])) < threshold {
            match intervals.last_mut() {
                Some(last) if last.1 >= w[0] => last.1 = w[1],
                _ => intervals.push((w[0], w[1])),
            }
        }
    }
    let total_length = intervals.iter().map(|(a, b)| b - a).sum();
    Ok(BadSet {
        xi: Vec::new(),
        epsilon,
        threshold,
        delta_sup: sup,
        interval,
        intervals,
        total_length,
    })
}

/// `∫ |∂_tΔ|/Δ dt` over the complement of the bad set, computed exactly as
/// the total variation of `log Δ` between critical points.
pub fn log_variation_outside(delta: &TimePoly, bad: &BadSet) -> f64 {
    let c = delta.real_coeffs();
    bad.complement()
        .into_iter()
        .map(|(a, b)| {
            let mut pts = vec![a];
            pts.extend(critical_points_in(&c, a, b));
            pts.push(b);
            pts.windows(2)
                .map(|w| (horner(&c, w[1]).ln() - horner(&c, w[0]).ln()).abs())
                .sum::<f64>()
        })
        .sum()
}

/// Constants of both hypotheses aggregated over a frequency grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub gr1m: Bound,
    pub gr_levi: Bound,
    /// `(t, ξ)` attaining each constant.
    pub gr1m_witness: (f64, Vec<f64>),
    pub gr_levi_witness: (f64, Vec<f64>),
    /// Frequencies where `Δ(·,ξ) ≡ 0`.
    pub zero_delta: Vec<Vec<f64>>,
    pub t_points: usize,
    pub interval: (f64, f64),
    pub xi_grid: Vec<Vec<f64>>,
}

pub fn condition_report(
    a: &SymbolMatrix,
    paths: &[SymmetriserPath],
    t_grid: &[f64],
) -> Result<ConditionReport> {
    let per_xi: Vec<Result<(ConstantEstimate, ConstantEstimate)>> = paths
        .par_iter()
        .map(|sp| Ok((check_gr1m(sp, t_grid)?, check_gr_levi(a, sp, t_grid)?)))
        .collect();
    let mut report = ConditionReport {
        gr1m: Bound::Finite(0.0),
        gr_levi: Bound::Finite(0.0),
        gr1m_witness: (t_grid[0], paths.first().map(|p| p.xi.clone()).unwrap_or_default()),
        gr_levi_witness: (t_grid[0], paths.first().map(|p| p.xi.clone()).unwrap_or_default()),
        zero_delta: Vec::new(),
        t_points: t_grid.len(),
        interval: grid_interval(t_grid),
        xi_grid: paths.iter().map(|p| p.xi.clone()).collect(),
    };
    for (sp, res) in paths.iter().zip(per_xi) {
        match res {
            Ok((g1, g2)) => {
                if g1.bound.value() > report.gr1m.value() || (!g1.bound.is_finite() && report.gr1m.is_finite()) {
                    report.gr1m_witness = (g1.witness_t, sp.xi.clone());
                }
                report.gr1m = report.gr1m.max(g1.bound);
                if g2.bound.value() > report.gr_levi.value() || (!g2.bound.is_finite() && report.gr_levi.is_finite()) {
                    report.gr_levi_witness = (g2.witness_t, sp.xi.clone());
                }
                report.gr_levi = report.gr_levi.max(g2.bound);
            }
            Err(Error::IdenticallyZeroDelta { .. }) => {
                report.zero_delta.push(sp.xi.clone());
                report.gr1m = Bound::Unbounded;
                report.gr_levi = Bound::Unbounded;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

/// Scale-free helper: `ε = e⁻¹⟨ξ⟩⁻¹`.
pub fn epsilon_for(xi: &[f64]) -> f64 {
    (-1.0f64).exp() / japanese_bracket(xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::PolyMatrix;
    use crate::symmetriser::{build_symmetriser, char_poly_path};

    #[test]
    fn delta_tilde_examples() {
        let t2 = TimePoly::from_real(&[0.0, 0.0, 1.0]);
        assert!((delta_tilde(&t2, 0.0, 1e-14).unwrap() - 4.0).abs() < 1e-12);
        assert!((delta_tilde(&t2, 1e-9, 1e-14).unwrap() - 4.0).abs() < 1e-9);
        assert!((delta_tilde(&t2, 0.3, 1e-14).unwrap() - (0.09 + 4.0)).abs() < 1e-12);
        let one = TimePoly::one();
        assert_eq!(delta_tilde(&one, 0.7, 1e-14).unwrap(), 1.0);
        assert!(matches!(
            delta_tilde(&TimePoly::zero(), 0.1, 1e-14),
            Err(Error::IdenticallyZeroDelta { .. })
        ));
        // order four: Δ̃ vanishes at the zero
        let t4 = TimePoly::from_real(&[0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(delta_tilde(&t4, 0.0, 1e-14).unwrap(), 0.0);
    }

    #[test]
    fn delta_tilde_dominates_delta() {
        let d = TimePoly::from_roots(&[0.2, 0.2, 0.7, 0.7]);
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            let v = d.eval_re(t);
            if v > 0.0 {
                assert!(delta_tilde(&d, t, 1e-14).unwrap() >= v);
            }
        }
    }

    #[test]
    fn bad_set_of_quadratic() {
        let d = TimePoly::from_real(&[0.0, 0.0, 4.0]);
        let eps = 0.1;
        let bs = bad_set_detect(&d, eps, BadSetParams { c1: 1.0, q: 1 }, (0.0, 1.0)).unwrap();
        // threshold 4ε², sub-level set [0, ε)
        assert_eq!(bs.intervals.len(), 1);
        assert_eq!(bs.intervals[0].0, 0.0);
        assert!((bs.intervals[0].1 - (bs.threshold / 4.0).sqrt()).abs() < 1e-14);
        assert!((bs.total_length - eps).abs() < 1e-14);
    }

    #[test]
    fn bad_set_of_positive_constant_is_empty() {
        let bs = bad_set_detect(&TimePoly::one(), 0.2, BadSetParams::default(), (0.0, 1.0)).unwrap();
        assert!(bs.intervals.is_empty());
        assert_eq!(bs.total_length, 0.0);
    }

    #[test]
    fn bad_set_two_zeros() {
        let d = TimePoly::from_roots(&[0.25, 0.25, 0.75, 0.75]);
        let bs = bad_set_detect(&d, 0.05, BadSetParams::default(), (0.0, 1.0)).unwrap();
        assert_eq!(bs.intervals.len(), 2);
        assert!(bs.contains(0.25) && bs.contains(0.75) && !bs.contains(0.5));
    }

    #[test]
    fn bad_set_rejects_bad_epsilon() {
        let d = TimePoly::one();
        assert!(bad_set_detect(&d, 0.5, BadSetParams::default(), (0.0, 1.0)).is_err());
        assert!(bad_set_detect(&d, 0.0, BadSetParams::default(), (0.0, 1.0)).is_err());
        assert!(matches!(
            bad_set_detect(&TimePoly::zero(), 0.1, BadSetParams::default(), (0.0, 1.0)),
            Err(Error::IdenticallyZeroDelta { .. })
        ));
    }

    fn sym(entries: &[((usize, usize), &[f64])]) -> SymbolMatrix {
        let mut a = PolyMatrix::zeros(2, 2);
        for &((i, j), c) in entries {
            a.set(i, j, TimePoly::from_real(c));
        }
        SymbolMatrix::one_dimensional(a).unwrap()
    }

    fn path(a: &SymbolMatrix, xi: f64) -> SymmetriserPath {
        build_symmetriser(&char_poly_path(a, &[xi]).unwrap())
    }

    #[test]
    fn gr1m_examples() {
        let grid = chebyshev_lobatto(0.0, 1.0, 256);
        let jt = sym(&[((0, 1), &[1.0]), ((1, 0), &[0.0, 0.0, 1.0])]);
        assert_eq!(check_gr1m(&path(&jt, 4.0), &grid).unwrap().bound, Bound::Finite(0.0));

        let strict = sym(&[((0, 0), &[1.0]), ((1, 1), &[2.0])]);
        assert_eq!(check_gr1m(&path(&strict, 4.0), &grid).unwrap().bound, Bound::Finite(0.0));

        // λ_1 = tξ, λ_2 = 2tξ: |ψ|/Δ̃ = 9/(t² + 4), sup 9/4 at t = 0.
        let lin = sym(&[((0, 0), &[0.0, 1.0]), ((1, 1), &[0.0, 2.0])]);
        let est = check_gr1m(&path(&lin, 3.0), &grid).unwrap();
        let oracle = grid.iter().map(|t| 9.0 / (t * t + 4.0)).fold(0.0, f64::max);
        assert!((est.bound.value() - oracle).abs() < 1e-9 * oracle, "{est:?}");
        assert!((oracle - 2.25).abs() < 1e-15);
    }

    #[test]
    fn gr_levi_examples() {
        let grid = chebyshev_lobatto(0.0, 1.0, 256);
        let jt = sym(&[((0, 1), &[1.0]), ((1, 0), &[0.0, 0.0, 1.0])]);
        for xi in [1.0, 10.0, 100.0] {
            let est = check_gr_levi(&jt, &path(&jt, xi), &grid).unwrap();
            // ratio 2⟨ξ⟩ / (ξ (4t + 8)), sampled on the refined grid
            let b = japanese_bracket(&[xi]);
            let oracle = refine_nested(&grid)[1..]
                .iter()
                .map(|t| 2.0 * b / (xi * (4.0 * t + 8.0)))
                .fold(0.0, f64::max);
            assert!((est.bound.value() - oracle).abs() < 1e-9, "{est:?} vs {oracle}");
        }
        let strict = sym(&[((0, 0), &[1.0]), ((1, 1), &[2.0])]);
        assert_eq!(check_gr_levi(&strict, &path(&strict, 2.0), &grid).unwrap().bound, Bound::Finite(0.0));

        let double = sym(&[((0, 1), &[1.0]), ((1, 0), &[0.0, 0.0, -1.0]), ((1, 1), &[0.0, 2.0])]);
        let sp = path(&double, 2.0);
        assert!(matches!(check_gr_levi(&double, &sp, &grid), Err(Error::IdenticallyZeroDelta { .. })));
        let rep = condition_report(&double, &[sp], &grid).unwrap();
        assert_eq!(rep.gr_levi, Bound::Unbounded);
        assert_eq!(rep.zero_delta.len(), 1);
    }

    #[test]
    fn constants_grow_monotonically_under_nesting() {
        let a = sym(&[((0, 0), &[0.0, 1.0]), ((0, 1), &[0.5]), ((1, 1), &[0.2, -1.0, 1.0])]);
        let sp = path(&a, 5.0);
        let mut prev_1 = 0.0;
        let mut prev_2 = 0.0;
        for n in [16, 32, 64, 128] {
            let grid = chebyshev_lobatto(0.0, 1.0, n);
            let c1 = check_gr1m(&sp, &grid).unwrap().coarse.value();
            let c2 = check_gr_levi(&a, &sp, &grid).unwrap().coarse.value();
            assert!(c1 >= prev_1 && c2 >= prev_2);
            prev_1 = c1;
            prev_2 = c2;
        }
    }

    #[test]
    fn lobatto_nodes_nest() {
        let a = chebyshev_lobatto(0.0, 2.0, 8);
        let b = chebyshev_lobatto(0.0, 2.0, 16);
        for x in a {
            assert!(b.iter().any(|y| (x - y).abs() < 1e-15));
        }
    }
}
