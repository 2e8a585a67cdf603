//! Parallel frequency sweeps with deterministic row order.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evolve_frequency, gronwall_certificate, Certificate, EvolveOptions};
use crate::error::{Error, Result};
use crate::linalg;
use crate::reduction::BlockSylvesterSystem;
use crate::symmetriser::SymmetriserPath;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum V0Policy {
    /// `ĝ = (1, …, 1)`
    Flat,
    /// `ĝ` with independent standard complex normal components, seeded per
    /// row.
    Gaussian { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub t_final: f64,
    pub evolve: EvolveOptions,
    pub v0: V0Policy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub xi_mag: f64,
    pub direction_index: usize,
    pub xi: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    StiffnessFailure,
    NonFinite,
    Failed,
}

impl RowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::StiffnessFailure => "stiffness_failure",
            RowStatus::NonFinite => "non_finite",
            RowStatus::Failed => "failed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub xi_mag: f64,
    pub direction_index: usize,
    pub bracket: f64,
    pub amplification: Option<f64>,
    pub e_kov_final: Option<f64>,
    pub e_hyp_final: Option<f64>,
    pub bad_set_measure: Option<f64>,
    pub status: RowStatus,
    pub message: Option<String>,
    pub certificate: Option<Certificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// `(⟨ξ⟩, amplification)` with the worst direction per magnitude, over
    /// successful rows.
    pub fn fit_points(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64, f64)> = Vec::new();
        for r in self.rows.iter().filter(|r| r.status == RowStatus::Ok) {
            let Some(a) = r.amplification else { continue };
            match out.iter_mut().find(|p| p.0 == r.xi_mag) {
                Some(p) => p.2 = p.2.max(a),
                None => out.push((r.xi_mag, r.bracket, a)),
            }
        }
        out.into_iter().map(|(_, b, a)| (b, a)).collect()
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.status != RowStatus::Ok).count()
    }
}

/// Unit directions in `ℝ^n`, deterministic: `±1` for `n = 1`, equally spaced
/// angles for `n = 2`, a golden-angle spiral on the first three axes
/// otherwise.
pub fn directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    let count = count.max(1);
    match n {
        0 => Vec::new(),
        1 => [1.0, -1.0].iter().take(count).map(|&s| vec![s]).collect(),
        2 => (0..count)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = if count == 1 { 1.0 } else { 1.0 - 2.0 * k as f64 / (count - 1) as f64 };
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let a = golden * k as f64;
                    let mut v = vec![0.0; n];
                    v[0] = z;
                    v[1] = r * a.cos();
                    v[2] = r * a.sin();
                    v
                })
                .collect()
        }
    }
}

fn spectral_data(policy: V0Policy, m: usize, row: usize) -> Vec<Complex64> {
    match policy {
        V0Policy::Flat => vec![Complex64::new(1.0, 0.0); m],
        V0Policy::Gaussian { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (row as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            (0..m)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im) / 2f64.sqrt()
                })
                .collect()
        }
    }
}

/// Normalised reduced initial state for row `row`.
pub fn initial_state(bs: &BlockSylvesterSystem, policy: V0Policy, row: usize) -> Result<Vec<Complex64>> {
    let v0 = bs.initial_data(&spectral_data(policy, bs.m, row));
    let n = linalg::vector_norm(&v0);
    if !(n > 0.0) {
        return Err(Error::InvalidArgument("initial state vanishes".into()));
    }
    Ok(v0.into_iter().map(|c| c / n).collect())
}

fn run_row(
    factory: &(dyn Fn(&[f64]) -> Result<(BlockSylvesterSystem, SymmetriserPath)> + Sync),
    p: &SweepPoint,
    row: usize,
    config: &SweepConfig,
) -> SweepRow {
    let bracket = crate::symbolic::japanese_bracket(&p.xi);
    let mut out = SweepRow {
        xi_mag: p.xi_mag,
        direction_index: p.direction_index,
        bracket,
        amplification: None,
        e_kov_final: None,
        e_hyp_final: None,
        bad_set_measure: None,
        status: RowStatus::Ok,
        message: None,
        certificate: None,
    };
    let result = factory(&p.xi).and_then(|(bs, sp)| {
        let v0 = initial_state(&bs, config.v0, row)?;
        let tr = evolve_frequency(&bs, &sp, &v0, config.t_final, &config.evolve)?;
        let cert = gronwall_certificate(&tr, &bs, &sp);
        Ok((tr, cert))
    });
    match result {
        Ok((tr, cert)) => {
            out.amplification = Some(tr.amplification);
            out.e_kov_final = tr.e_kov.last().copied();
            out.e_hyp_final = tr.e_hyp.last().copied();
            out.bad_set_measure = tr.bad_set.as_ref().map(|b| b.total_length);
            out.certificate = Some(cert);
        }
        Err(e) => {
            out.status = match e {
                Error::StiffnessFailure { .. } => RowStatus::StiffnessFailure,
                Error::NonFiniteState { .. } => RowStatus::NonFinite,
                _ => RowStatus::Failed,
            };
            out.message = Some(e.to_string());
        }
    }
    out
}

/// One row per point, in input order. Row failures are recorded, not
/// propagated.
pub fn sweep<F>(factory: F, points: &[SweepPoint], config: &SweepConfig) -> SweepTable
where
    F: Fn(&[f64]) -> Result<(BlockSylvesterSystem, SymmetriserPath)> + Sync,
{
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(k, p)| run_row(&factory, p, k, config))
        .collect();
    SweepTable { config: *config, rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_are_unit() {
        for n in 1..=4 {
            for d in directions(n, 5) {
                assert!((crate::symbolic::euclidean_norm(&d) - 1.0).abs() < 1e-14);
            }
        }
        assert_eq!(directions(1, 3), vec![vec![1.0], vec![-1.0]]);
    }

    #[test]
    fn gaussian_data_is_seeded() {
        let a = spectral_data(V0Policy::Gaussian { seed: 7 }, 3, 2);
        let b = spectral_data(V0Policy::Gaussian { seed: 7 }, 3, 2);
        let c = spectral_data(V0Policy::Gaussian { seed: 8 }, 3, 2);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
