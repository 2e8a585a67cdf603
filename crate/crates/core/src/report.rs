//! Report type and its CSV/JSON serialisations.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::energy::{GrowthFit, SweepTable, V0Policy};
use crate::error::{Error, Result};
use crate::levi::{BadSetParams, ConditionReport};
use crate::reduction::LowerOrderBound;
use crate::scenario::{GridSpec, Scenario, Tolerances};
use crate::spectral::HyperbolicityReport;

pub const CSV_COLUMNS: [&str; 7] = [
    "xi_mag",
    "direction_index",
    "amplification",
    "e_kov_final",
    "e_hyp_final",
    "bad_set_measure",
    "status",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEcho {
    pub name: String,
    pub m: usize,
    pub n: usize,
    pub t_final: f64,
    pub seed: u64,
    pub grid: GridSpec,
    pub tol: Tolerances,
    pub bad_set: BadSetParams,
    pub v0: V0Policy,
}

impl From<&Scenario> for ScenarioEcho {
    fn from(s: &Scenario) -> Self {
        Self {
            name: s.name.clone(),
            m: s.m,
            n: s.n,
            t_final: s.t_final,
            seed: s.seed,
            grid: s.grid.clone(),
            tol: s.tol,
            bad_set: s.bad_set,
            v0: s.v0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionSummary {
    /// Largest `op_residual(L∘(D_t − A), μI − C)` over the frequency grid.
    pub residual: f64,
    /// Largest order of `C` in `D_t`; `None` when `C = 0` everywhere.
    pub c_order: Option<usize>,
    pub lower_bound: LowerOrderBound,
    pub xi_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub c_principal_max: f64,
    pub c_lower_max: f64,
    /// `None` when every row has `Δ ≡ 0`.
    pub c_prime_max: Option<f64>,
    /// Log-log slope of `c′` against `⟨ξ⟩`.
    pub c_prime_slope: f64,
    pub uniform: bool,
    pub kov_violations: usize,
    pub lemma_violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: ScenarioEcho,
    pub hyperbolicity: Option<HyperbolicityReport>,
    pub conditions: Option<ConditionReport>,
    pub reduction: Option<ReductionSummary>,
    pub sweep: Option<SweepTable>,
    pub fit: Option<GrowthFit>,
    pub certificates: Option<CertificateSummary>,
    /// Non-fatal findings.
    pub warnings: Vec<String>,
    /// Violated hypotheses.
    pub violations: Vec<String>,
    /// Numerical failures.
    pub failures: Vec<String>,
}

impl Report {
    pub fn new(scenario: &Scenario) -> Self {
        Self {
            scenario: scenario.into(),
            hyperbolicity: None,
            conditions: None,
            reduction: None,
            sweep: None,
            fit: None,
            certificates: None,
            warnings: Vec::new(),
            violations: Vec::new(),
            failures: Vec::new(),
        }
    }

    /// 2 on a violated hypothesis, else 3 on a numerical failure, else 0.
    pub fn exit_code(&self) -> i32 {
        if !self.violations.is_empty() {
            2
        } else if !self.failures.is_empty() {
            3
        } else {
            0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Sweep table as CSV; header only for an absent or empty sweep.
pub fn sweep_csv(table: Option<&SweepTable>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in table.map(|t| t.rows.as_slice()).unwrap_or(&[]) {
        w.write_record([
            r.xi_mag.to_string(),
            r.direction_index.to_string(),
            opt(r.amplification),
            opt(r.e_kov_final),
            opt(r.e_hyp_final),
            opt(r.bad_set_measure),
            r.status.as_str().to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV of ASCII fields"))
}

pub fn report_json(report: &Report) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_report_json(src: &str) -> Result<Report> {
    Ok(serde_json::from_str(src)?)
}

/// `(ξ magnitude, amplification)` rows of a sweep CSV with successful status.
pub fn read_sweep_csv(src: &str) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_reader(src.as_bytes());
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidArgument(format!("CSV lacks column `{name}`")))
    };
    let (xi, amp, status) = (col("xi_mag")?, col("amplification")?, col("status")?);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if &rec[status] != "ok" {
            continue;
        }
        let parse = |k: usize| {
            rec[k]
                .parse::<f64>()
                .map_err(|e| Error::InvalidArgument(format!("bad number `{}`: {e}", &rec[k])))
        };
        out.push((parse(xi)?, parse(amp)?));
    }
    Ok(out)
}

/// Writes `<name>.json` and/or `<name>_sweep.csv` into `dir`.
pub fn emit_report(report: &Report, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let name = &report.scenario.name;
    if matches!(format, Format::Json | Format::Both) {
        let p = dir.join(format!("{name}.json"));
        std::fs::write(&p, report_json(report)?)?;
        written.push(p);
    }
    if matches!(format, Format::Csv | Format::Both) {
        let p = dir.join(format!("{name}_sweep.csv"));
        std::fs::write(&p, sweep_csv(report.sweep.as_ref())?)?;
        written.push(p);
    }
    Ok(written)
}
