//! Growth-law fits of amplification against `⟨ξ⟩`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_ROWS: usize = 6;
/// Required span `max⟨ξ⟩ / min⟨ξ⟩`.
pub const MIN_SPAN: f64 = 100.0;
/// Polynomial wins unless the Gevrey fit is better by more than this.
pub const MODEL_MARGIN: f64 = 0.02;
/// Root-mean-square spread of `log amp` below which the data are treated
/// as constant: both fits then have `R² = 1`.
pub const FLAT_LOG_SPREAD: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthModel {
    Polynomial,
    Gevrey,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub model: GrowthModel,
    /// `log amp ≈ κ log⟨ξ⟩ + b`
    pub kappa: f64,
    pub poly_intercept: f64,
    pub poly_r2: f64,
    pub poly_ssr: f64,
    /// `log amp ≈ c ⟨ξ⟩^θ + b`
    pub theta: f64,
    pub c_hat: f64,
    pub gevrey_intercept: f64,
    pub gevrey_r2: f64,
    pub gevrey_ssr: f64,
    /// `⟨ξ⟩` range of the rows used in the fit.
    pub xi_range: (f64, f64),
    pub rows_used: usize,
}

impl GrowthFit {
    /// `1/θ`
    pub fn gevrey_index(&self) -> f64 {
        1.0 / self.theta
    }
}

#[derive(Clone, Copy, Debug)]
struct Line {
    slope: f64,
    intercept: f64,
    r2: f64,
    ssr: f64,
}

fn linear_fit(x: &[f64], y: &[f64]) -> Line {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sst: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if sst <= n * FLAT_LOG_SPREAD * FLAT_LOG_SPREAD { 1.0 } else { 1.0 - ssr / sst };
    Line { slope, intercept, r2, ssr }
}

pub fn theta_grid() -> impl Iterator<Item = f64> {
    (0..=198).map(|k| 0.01 + 0.005 * k as f64)
}

/// Fits both growth models to `(⟨ξ⟩, amplification)` pairs using the
/// upper half of the range.
pub fn fit_growth(points: &[(f64, f64)]) -> Result<GrowthFit> {
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(b, a)| b.is_finite() && *b > 0.0 && a.is_finite() && *a > 0.0)
        .collect();
    if pts.len() < MIN_ROWS {
        return Err(Error::InsufficientRange(format!(
            "{} usable rows, need at least {MIN_ROWS}",
            pts.len()
        )));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let span = pts.last().unwrap().0 / pts[0].0;
    if span < MIN_SPAN {
        return Err(Error::InsufficientRange(format!("⟨ξ⟩ spans a factor {span:.3}, need {MIN_SPAN}")));
    }
    let top = &pts[pts.len() / 2..];
    let y: Vec<f64> = top.iter().map(|p| p.1.ln()).collect();
    let logx: Vec<f64> = top.iter().map(|p| p.0.ln()).collect();
    let poly = linear_fit(&logx, &y);

    let mut best: Option<(f64, Line)> = None;
    for theta in theta_grid() {
        let x: Vec<f64> = top.iter().map(|p| p.0.powf(theta)).collect();
        let line = linear_fit(&x, &y);
        if best.is_none_or(|(_, b)| line.r2 > b.r2) {
            best = Some((theta, line));
        }
    }
    let (theta, gev) = best.expect("nonempty θ grid");
    let model = if poly.r2 >= gev.r2 - MODEL_MARGIN { GrowthModel::Polynomial } else { GrowthModel::Gevrey };
    Ok(GrowthFit {
        model,
        kappa: poly.slope,
        poly_intercept: poly.intercept,
        poly_r2: poly.r2,
        poly_ssr: poly.ssr,
        theta,
        c_hat: gev.slope,
        gevrey_intercept: gev.intercept,
        gevrey_r2: gev.r2,
        gevrey_ssr: gev.ssr,
        xi_range: (top[0].0, top.last().unwrap().0),
        rows_used: top.len(),
    })
}
