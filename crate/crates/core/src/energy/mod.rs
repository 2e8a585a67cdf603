//! Frequency-wise integration of the reduced system and energy bookkeeping.

pub mod certificate;
pub mod fit;
pub mod integrator;
pub mod sweep;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levi::{bad_set_detect, epsilon_for, BadSet, BadSetParams};
use crate::linalg;
use crate::reduction::BlockSylvesterSystem;
use crate::symmetriser::SymmetriserPath;

pub use certificate::{gronwall_certificate, uniformity_slope, Certificate, UNIFORMITY_SLOPE_LIMIT};
pub use fit::{fit_growth, GrowthFit, GrowthModel};
pub use integrator::{integrate, Solution, State};
pub use sweep::{directions, sweep, SweepConfig, SweepPoint, SweepRow, SweepTable, RowStatus, V0Policy};

/// Polynomial matrix in `t` with numeric coefficients, for fast Horner
/// evaluation inside the integrator.
#[derive(Clone, Debug)]
pub struct NumericPolyMatrix {
    coeffs: Vec<DMatrix<Complex64>>,
    n: usize,
}

impl NumericPolyMatrix {
    pub fn new(p: &crate::symbolic::PolyMatrix) -> Self {
        let n = p.rows();
        let deg = p.max_degree().unwrap_or(0);
        let coeffs = (0..=deg)
            .map(|k| DMatrix::from_fn(n, p.cols(), |i, j| p.get(i, j).coeff(k)))
            .collect();
        Self { coeffs, n }
    }

    pub fn eval(&self, t: f64) -> DMatrix<Complex64> {
        let mut acc = DMatrix::zeros(self.n, self.coeffs.first().map_or(self.n, |c| c.ncols()));
        for c in self.coeffs.iter().rev() {
            acc *= Complex64::new(t, 0.0);
            acc += c;
        }
        acc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub tol: f64,
    /// Number of equispaced output samples including both endpoints.
    pub samples: usize,
    pub bad_set: BadSetParams,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { tol: 1e-8, samples: 201, bad_set: BadSetParams::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub xi: Vec<f64>,
    pub bracket: f64,
    pub t_samples: Vec<f64>,
    pub v: Vec<Vec<Complex64>>,
    pub e_kov: Vec<f64>,
    /// `⟨𝓠V, V⟩` with `𝓠 = diag(Q, …, Q)`.
    pub e_hyp: Vec<f64>,
    /// `None` when `Δ(·,ξ) ≡ 0`.
    pub bad_set: Option<BadSet>,
    pub amplification: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl EnergyTrace {
    pub fn final_state(&self) -> &[Complex64] {
        self.v.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

pub fn sample_grid(t_final: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(2) - 1;
    (0..=n).map(|k| t_final * k as f64 / n as f64).collect()
}

/// `Σ_blocks ⟨Q V_i, V_i⟩` for a component-major state.
pub fn block_energy(q: &DMatrix<f64>, v: &[Complex64]) -> f64 {
    let m = q.nrows();
    let qc = q.map(|x| Complex64::new(x, 0.0));
    v.chunks(m).map(|blk| linalg::quadratic_form(&qc, blk)).sum()
}

/// Integrates `∂_t V = i(𝓐 − 𝓛)V` on `[0, t_final]` from `v0`.
pub fn evolve_frequency(
    bs: &BlockSylvesterSystem,
    sp: &SymmetriserPath,
    v0: &[Complex64],
    t_final: f64,
    opts: &EvolveOptions,
) -> Result<EnergyTrace> {
    if crate::symbolic::euclidean_norm(&bs.xi) < 1.0 {
        return Err(Error::InvalidArgument(format!("|ξ| < 1 for ξ = {:?}", bs.xi)));
    }
    if v0.len() != bs.size() || v0.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidArgument("initial state has wrong size or is not finite".into()));
    }
    let gen = NumericPolyMatrix::new(&bs.generator());
    let principal = NumericPolyMatrix::new(&bs.principal);
    let rhs = |t: f64, y: &State| gen.eval(t) * y;
    let cap = |t: f64| 0.5 / (1.0 + principal.eval(t).norm());
    let times = sample_grid(t_final, opts.samples);
    let sol = integrate(rhs, cap, DVector::from_column_slice(v0), (0.0, t_final), &times, opts.tol)?;

    let v: Vec<Vec<Complex64>> = sol.states.iter().map(|s| s.iter().copied().collect()).collect();
    let e_kov: Vec<f64> = v.iter().map(|s| linalg::vector_norm(s).powi(2)).collect();
    let e_hyp: Vec<f64> = sol.times.iter().zip(&v).map(|(&t, s)| block_energy(&sp.q_at(t), s)).collect();
    let bad_set = if sp.delta_identically_zero() {
        None
    } else {
        let mut bs_set = bad_set_detect(sp.delta(), epsilon_for(&bs.xi), opts.bad_set, (0.0, t_final))?;
        bs_set.xi = bs.xi.clone();
        Some(bs_set)
    };
    let amplification = (e_kov.last().copied().unwrap_or(0.0) / e_kov[0]).sqrt();
    Ok(EnergyTrace {
        xi: bs.xi.clone(),
        bracket: bs.bracket,
        t_samples: sol.times,
        v,
        e_kov,
        e_hyp,
        bad_set,
        amplification,
        accepted_steps: sol.accepted,
        rejected_steps: sol.rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::block_sylvester_assemble;
    use crate::symbolic::{PolyMatrix, SymbolMatrix, TimePoly};
    use crate::symmetriser::{build_symmetriser, char_poly_path};

    fn setup(a: &SymbolMatrix, xi: f64) -> (BlockSylvesterSystem, SymmetriserPath) {
        let bs = block_sylvester_assemble(a, &[xi]).unwrap();
        let sp = build_symmetriser(&char_poly_path(a, &[xi]).unwrap());
        (bs, sp)
    }

    fn unit(n: usize, k: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[k] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn scalar_transport_phase() {
        let xi = 30.0;
        let a = SymbolMatrix::one_dimensional(PolyMatrix::from_fn(1, 1, |_, _| TimePoly::from_real(&[0.0, 1.0]))).unwrap();
        let (bs, sp) = setup(&a, xi);
        let tr = evolve_frequency(&bs, &sp, &unit(1, 0), 1.0, &EvolveOptions { tol: 1e-10, ..Default::default() }).unwrap();
        let exact = Complex64::from_polar(1.0, xi / 2.0);
        assert!((tr.final_state()[0] - exact).norm() < 1e-7);
        assert!((tr.amplification - 1.0).abs() < 1e-8);
    }

    #[test]
    fn strict_constant_system_conserves_energy() {
        let a = SymbolMatrix::one_dimensional(PolyMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]])).unwrap();
        for xi in [1.0, 16.0, 128.0] {
            let (bs, sp) = setup(&a, xi);
            let v0 = bs.initial_data(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
            let n = linalg::vector_norm(&v0);
            let v0: Vec<_> = v0.iter().map(|c| c / n).collect();
            let tr = evolve_frequency(&bs, &sp, &v0, 1.0, &Default::default()).unwrap();
            for e in &tr.e_kov {
                assert!((e - 1.0).abs() < 1e-6, "ξ = {xi}: {e}");
            }
        }
    }
}
