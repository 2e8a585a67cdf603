//! Pointwise checks of the differential energy inequalities along a
//! computed trajectory.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{block_energy, EnergyTrace, NumericPolyMatrix};
use crate::linalg;
use crate::reduction::BlockSylvesterSystem;
use crate::symmetriser::SymmetriserPath;

/// A log-log slope of a constant against `⟨ξ⟩` above this marks the
/// constant as non-uniform in `ξ`.
pub const UNIFORMITY_SLOPE_LIMIT: f64 = 0.5;
/// Constants at or below this are rounding noise and do not enter the
/// uniformity slope.
pub const UNIFORMITY_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub xi: Vec<f64>,
    pub bracket: f64,
    /// `sup_t ‖𝓐‖ / ⟨ξ⟩`
    pub c_principal: f64,
    /// `sup_t ‖𝓛‖`
    pub c_lower: f64,
    /// Largest `∂_t E_kov / (2 (c_𝓐⟨ξ⟩ + c_𝓛) E_kov)` on bad-set samples.
    pub kov_ratio: f64,
    pub kov_violations: usize,
    /// Smallest `c′` with `∂_t E_hyp ≤ c′ (1 + |∂_tΔ|/Δ) E_hyp` outside the
    /// bad set; `None` when `Δ ≡ 0`.
    pub c_prime: Option<f64>,
    /// Constants of `c_1 Δ |V|² ≤ E_hyp ≤ c_2 |V|²` and the number of
    /// outside samples violating them.
    pub lemma_c1: f64,
    pub lemma_c2: f64,
    pub lemma_violations: usize,
    pub samples_inside: usize,
    pub samples_outside: usize,
}

pub fn gronwall_certificate(trace: &EnergyTrace, bs: &BlockSylvesterSystem, sp: &SymmetriserPath) -> Certificate {
    let gen = NumericPolyMatrix::new(&bs.generator());
    let principal = NumericPolyMatrix::new(&bs.principal);
    let lower = NumericPolyMatrix::new(&bs.lower);
    let dq = sp.q.derivative();
    let delta = sp.delta();
    let ddelta = delta.derivative();
    let b = trace.bracket;

    let c_principal = trace
        .t_samples
        .iter()
        .map(|&t| linalg::spectral_norm_c(&principal.eval(t)))
        .fold(0.0, f64::max)
        / b;
    let c_lower = trace
        .t_samples
        .iter()
        .map(|&t| linalg::spectral_norm_c(&lower.eval(t)))
        .fold(0.0, f64::max);
    let (lemma_c1, lemma_c2) = sp.gr_constants(&trace.t_samples);
    let kov_bound = 2.0 * (c_principal * b + c_lower);

    let mut cert = Certificate {
        xi: trace.xi.clone(),
        bracket: b,
        c_principal,
        c_lower,
        kov_ratio: 0.0,
        kov_violations: 0,
        c_prime: trace.bad_set.as_ref().map(|_| 0.0),
        lemma_c1,
        lemma_c2,
        lemma_violations: 0,
        samples_inside: 0,
        samples_outside: 0,
    };
    for (k, &t) in trace.t_samples.iter().enumerate() {
        let v = &trace.v[k];
        let gv = gen.eval(t) * DVector::from_column_slice(v);
        let e_kov = trace.e_kov[k];
        let inside = trace.bad_set.as_ref().is_none_or(|bad| bad.contains(t));
        if inside {
            cert.samples_inside += 1;
            let d_kov: f64 = 2.0 * v.iter().zip(gv.iter()).map(|(a, b)| (a.conj() * b).re).sum::<f64>();
            if e_kov > 0.0 && kov_bound > 0.0 {
                let r = d_kov / (kov_bound * e_kov);
                cert.kov_ratio = cert.kov_ratio.max(r);
                if r > 1.0 + 1e-9 {
                    cert.kov_violations += 1;
                }
            }
            continue;
        }
        cert.samples_outside += 1;
        let q = sp.q_at(t);
        let e_hyp = trace.e_hyp[k];
        let d_hyp = block_energy(&dq.eval_re(t), v) + 2.0 * cross_term(&q, v, gv.as_slice());
        let d = delta.eval_re(t);
        let weight = 1.0 + ddelta.eval_re(t).abs() / d;
        if e_hyp > 0.0 {
            let r = d_hyp.max(0.0) / (e_hyp * weight);
            cert.c_prime = cert.c_prime.map(|c| c.max(r));
        }
        let slack = 1e-9 * lemma_c2 * e_kov;
        if e_hyp + slack < lemma_c1 * d * e_kov || e_hyp > lemma_c2 * e_kov + slack {
            cert.lemma_violations += 1;
        }
    }
    cert
}

/// `Re Σ_blocks ⟨Q V_i, W_i⟩`
fn cross_term(q: &nalgebra::DMatrix<f64>, v: &[Complex64], w: &[Complex64]) -> f64 {
    let m = q.nrows();
    let mut acc = 0.0;
    for (vb, wb) in v.chunks(m).zip(w.chunks(m)) {
        for i in 0..m {
            let qv: Complex64 = (0..m).map(|j| vb[j] * q[(i, j)]).sum();
            acc += (qv.conj() * wb[i]).re;
        }
    }
    acc
}

/// Least-squares slope of `log c` against `log ⟨ξ⟩` over `c` above
/// [`UNIFORMITY_FLOOR`].
pub fn uniformity_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(b, c)| *b > 0.0 && *c > UNIFORMITY_FLOOR && c.is_finite())
        .map(|(b, c)| (b.ln(), c.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (0..6).map(|k| (2f64.powi(k), 3.0 * 2f64.powi(k))).collect();
        assert!((uniformity_slope(&pts) - 1.0).abs() < 1e-12);
        let flat: Vec<(f64, f64)> = (0..6).map(|k| (2f64.powi(k), 0.7)).collect();
        assert!(uniformity_slope(&flat).abs() < 1e-12);
        assert_eq!(uniformity_slope(&[(1.0, 0.0), (2.0, 0.0)]), 0.0);
        let noise: Vec<(f64, f64)> = (0..6).map(|k| (2f64.powi(k), 1e-15 * 2f64.powi(k))).collect();
        assert_eq!(uniformity_slope(&noise), 0.0);
    }
}
