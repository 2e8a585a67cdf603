//! Orchestration: hyperbolicity → symmetriser → conditions → reduction →
//! sweep → fit.

use rayon::prelude::*;

use crate::energy::{self, fit_growth, sweep, EvolveOptions, SweepConfig, SweepPoint, SweepTable};
use crate::error::{Error, Result};
use crate::levi::{chebyshev_lobatto, condition_report, Bound};
use crate::reduction::{block_sylvester_assemble, lower_order_bound_check, BlockSylvesterSystem};
use crate::report::{CertificateSummary, ReductionSummary, Report};
use crate::scenario::Scenario;
use crate::spectral::{hyperbolicity_scan, Verdict};
use crate::symmetriser::{build_symmetriser, char_poly_path, SymmetriserPath};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stages {
    pub analyze: bool,
    pub reduce: bool,
    pub sweep: bool,
    pub fit: bool,
}

impl Stages {
    pub const ALL: Stages = Stages { analyze: true, reduce: true, sweep: true, fit: true };
    pub const ANALYZE: Stages = Stages { analyze: true, reduce: false, sweep: false, fit: false };
    pub const REDUCE: Stages = Stages { analyze: false, reduce: true, sweep: false, fit: false };
    pub const SWEEP: Stages = Stages { analyze: false, reduce: false, sweep: true, fit: false };
    pub const FIT: Stages = Stages { analyze: false, reduce: false, sweep: true, fit: true };
}

/// Frequencies `|ξ| · ω_d` for every magnitude and direction.
pub fn sweep_points(sc: &Scenario) -> Vec<SweepPoint> {
    let dirs = energy::directions(sc.n, sc.grid.directions);
    sc.grid
        .xi_magnitudes
        .iter()
        .flat_map(|&mag| {
            dirs.iter().enumerate().map(move |(d, dir)| SweepPoint {
                xi_mag: mag,
                direction_index: d,
                xi: dir.iter().map(|x| x * mag).collect(),
            })
        })
        .collect()
}

pub fn t_grid(sc: &Scenario) -> Vec<f64> {
    chebyshev_lobatto(0.0, sc.t_final, sc.grid.t_points - 1)
}

pub fn sweep_config(sc: &Scenario) -> SweepConfig {
    SweepConfig {
        t_final: sc.t_final,
        evolve: EvolveOptions { tol: sc.tol.integrator, samples: sc.grid.samples, bad_set: sc.bad_set },
        v0: sc.v0,
    }
}

pub fn frequency_data(sc: &Scenario, xi: &[f64]) -> Result<(BlockSylvesterSystem, SymmetriserPath)> {
    Ok((block_sylvester_assemble(&sc.system, xi)?, build_symmetriser(&char_poly_path(&sc.system, xi)?)))
}

fn fmt_xi(xi: &[f64]) -> String {
    format!("{xi:?}")
}

fn analyze(sc: &Scenario, report: &mut Report, xis: &[Vec<f64>], grid: &[f64]) -> Result<bool> {
    let hyp = hyperbolicity_scan(&sc.system, grid, xis, &sc.tol.spectral)?;
    let hyperbolic = hyp.verdict != Verdict::NonHyperbolic;
    if !hyperbolic {
        report.violations.push(format!(
            "non-real spectrum: |Im λ| = {:.3e} at t = {}, ξ = {}",
            hyp.max_imag,
            hyp.witness.0,
            fmt_xi(&hyp.witness.1)
        ));
    }
    report.hyperbolicity = Some(hyp);
    if !hyperbolic {
        return Ok(false);
    }

    let paths: Vec<SymmetriserPath> = xis
        .par_iter()
        .map(|xi| char_poly_path(&sc.system, xi).map(|cp| build_symmetriser(&cp)))
        .collect::<Result<_>>()?;
    let cond = condition_report(&sc.system, &paths, grid)?;
    if let Some(first) = cond.zero_delta.first() {
        report.violations.push(format!(
            "Δ(·,ξ) ≡ 0 at {} of {} frequencies, first ξ = {}",
            cond.zero_delta.len(),
            xis.len(),
            fmt_xi(first)
        ));
    }
    if cond.zero_delta.is_empty() {
        if cond.gr1m == Bound::Unbounded {
            report.warnings.push("GR1m constant appears unbounded on the grid".into());
        }
        if cond.gr_levi == Bound::Unbounded {
            report.warnings.push("GRLevi constant appears unbounded on the grid".into());
        }
    }
    report.conditions = Some(cond);
    Ok(true)
}

fn reduce(sc: &Scenario, report: &mut Report, xis: &[Vec<f64>], grid: &[f64]) -> Result<()> {
    let systems: Vec<BlockSylvesterSystem> = xis
        .par_iter()
        .map(|xi| block_sylvester_assemble(&sc.system, xi))
        .collect::<Result<_>>()?;
    let checks: Vec<(f64, Option<usize>)> = systems.par_iter().map(|bs| bs.verify()).collect::<Result<_>>()?;
    let residual = checks.iter().map(|c| c.0).fold(0.0, f64::max);
    let c_order = checks.iter().filter_map(|c| c.1).max();
    if c_order.is_some_and(|o| o + 1 > sc.m) {
        report.failures.push(format!("lower-order operator C has order {} ≥ m", c_order.unwrap()));
    }
    let lower_bound = lower_order_bound_check(&systems, &sc.system, grid)?;
    if lower_bound.contradiction {
        report.failures.push("t-independent symbol with nonzero lower-order block".into());
    } else if lower_bound.bound == Bound::Unbounded {
        report.warnings.push("lower-order bound appears unbounded on the grid".into());
    }
    report.reduction = Some(ReductionSummary { residual, c_order, lower_bound, xi_points: systems.len() });
    Ok(())
}

fn summarize_certificates(table: &SweepTable) -> Option<CertificateSummary> {
    let certs: Vec<_> = table.rows.iter().filter_map(|r| r.certificate.as_ref()).collect();
    if certs.is_empty() {
        return None;
    }
    let primes: Vec<(f64, f64)> = certs.iter().filter_map(|c| c.c_prime.map(|p| (c.bracket, p))).collect();
    let slope = energy::uniformity_slope(&primes);
    Some(CertificateSummary {
        c_principal_max: certs.iter().map(|c| c.c_principal).fold(0.0, f64::max),
        c_lower_max: certs.iter().map(|c| c.c_lower).fold(0.0, f64::max),
        c_prime_max: if primes.is_empty() { None } else { Some(primes.iter().map(|p| p.1).fold(0.0, f64::max)) },
        c_prime_slope: slope,
        uniform: slope <= energy::UNIFORMITY_SLOPE_LIMIT,
        kov_violations: certs.iter().map(|c| c.kov_violations).sum(),
        lemma_violations: certs.iter().map(|c| c.lemma_violations).sum(),
    })
}

fn run_sweep(sc: &Scenario, report: &mut Report) {
    let table = sweep(|xi: &[f64]| frequency_data(sc, xi), &sweep_points(sc), &sweep_config(sc));
    for r in table.rows.iter().filter(|r| r.status != energy::RowStatus::Ok) {
        report.failures.push(format!(
            "|ξ| = {} direction {}: {}",
            r.xi_mag,
            r.direction_index,
            r.message.as_deref().unwrap_or(r.status.as_str())
        ));
    }
    report.certificates = summarize_certificates(&table);
    if let Some(c) = &report.certificates {
        if !c.uniform {
            report.warnings.push(format!("c′ grows with ⟨ξ⟩ (log-log slope {:.3})", c.c_prime_slope));
        }
        if c.lemma_violations > 0 {
            report.warnings.push(format!("{} samples violate c₁Δ|V|² ≤ E_hyp ≤ c₂|V|²", c.lemma_violations));
        }
    }
    report.sweep = Some(table);
}

/// Runs the requested stages. Hypothesis violations and numerical failures
/// are recorded in the report; only setup errors are returned as `Err`.
pub fn run_scenario(sc: &Scenario, stages: Stages) -> Result<Report> {
    let mut report = Report::new(sc);
    let points = sweep_points(sc);
    let xis: Vec<Vec<f64>> = points.iter().map(|p| p.xi.clone()).collect();
    let grid = t_grid(sc);

    let mut hyperbolic = true;
    if stages.analyze {
        hyperbolic = analyze(sc, &mut report, &xis, &grid)?;
    }
    if stages.reduce {
        reduce(sc, &mut report, &xis, &grid)?;
    }
    if stages.sweep {
        if hyperbolic {
            run_sweep(sc, &mut report);
        } else {
            report.warnings.push("sweep skipped: the system is not hyperbolic".into());
        }
    }
    if stages.fit {
        if let Some(table) = &report.sweep {
            match fit_growth(&table.fit_points()) {
                Ok(f) => report.fit = Some(f),
                Err(e @ Error::InsufficientRange(_)) => report.warnings.push(e.to_string()),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_points_cover_grid() {
        let mut sc = Scenario::bundled("jt_example").unwrap();
        sc.grid.directions = 2;
        let pts = sweep_points(&sc);
        assert_eq!(pts.len(), 20);
        assert_eq!(pts[1].xi, vec![-1.0]);
        assert_eq!(pts[19].xi_mag, 512.0);
    }
}
