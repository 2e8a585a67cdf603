//! Eigenvalues of `A(t,ξ)`, hyperbolicity verdicts and multiplicity counts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::symbolic::SymbolMatrix;
use crate::symmetriser::{build_symmetriser, char_poly_path, SymmetriserPath};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralTolerances {
    /// Imaginary parts above `hyp · (1 + ‖A‖_F)` mean a non-real spectrum.
    pub hyp: f64,
    /// Sorted eigenvalues closer than `cluster · max(max|λ|, ‖A‖_F)` merge.
    pub cluster: f64,
}

impl Default for SpectralTolerances {
    fn default() -> Self {
        Self { hyp: 1e-6, cluster: 1e-6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "distinct", rename_all = "snake_case")]
pub enum Verdict {
    Strict,
    Weak(usize),
    NonHyperbolic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicityReport {
    pub verdict: Verdict,
    /// Largest number of distinct eigenvalue clusters seen on the grid.
    pub distinct_roots: usize,
    /// Smallest number of clusters seen on the grid.
    pub min_distinct_roots: usize,
    pub max_imag: f64,
    /// `(t, ξ)` where `max_imag` was attained.
    pub witness: (f64, Vec<f64>),
    /// Grid points where the cluster count disagrees with the count read off
    /// the sign pattern of the minors `Δ_j`.
    pub minor_mismatches: usize,
    pub grid_points: usize,
    pub tolerances: SpectralTolerances,
}

/// Eigenvalues with imaginary parts, unsorted.
fn raw_eigenvalues(a: &SymbolMatrix, t: f64, xi: &[f64]) -> Result<(Vec<num_complex::Complex64>, f64)> {
    let m = a.eval(t, xi)?;
    let fro = m.norm();
    Ok((linalg::complex_eigenvalues(&m), fro))
}

/// Real eigenvalues of `A(t,ξ)` in ascending order.
pub fn eigenvalues_at(a: &SymbolMatrix, t: f64, xi: &[f64], tol: &SpectralTolerances) -> Result<Vec<f64>> {
    let (ev, fro) = raw_eigenvalues(a, t, xi)?;
    let imag = ev.iter().map(|l| l.im.abs()).fold(0.0, f64::max);
    if imag > tol.hyp * (1.0 + fro) {
        return Err(Error::NonRealSpectrum { t, xi: xi.to_vec(), imag });
    }
    let mut re: Vec<f64> = ev.iter().map(|l| l.re).collect();
    re.sort_by(f64::total_cmp);
    Ok(re)
}

/// Number of single-linkage clusters among sorted values, merging gaps not
/// exceeding `threshold`.
pub fn cluster_count(sorted: &[f64], threshold: f64) -> usize {
    if sorted.is_empty() {
        return 0;
    }
    1 + sorted.windows(2).filter(|w| w[1] - w[0] > threshold).count()
}

/// Number of distinct roots implied by the minors: the largest `r` with
/// `Δ_1, …, Δ_r > 0`.
pub fn roots_from_minors(sp: &SymmetriserPath, t: f64, rel_zero: f64) -> usize {
    sp.minors
        .iter()
        .enumerate()
        .take_while(|(k, d)| d.eval_re(t) > rel_zero * sp.minor_scale(k + 1))
        .count()
}

struct PointResult {
    clusters: usize,
    minors: usize,
    imag: f64,
    fro: f64,
}

pub fn hyperbolicity_scan(
    a: &SymbolMatrix,
    t_grid: &[f64],
    xi_grid: &[Vec<f64>],
    tol: &SpectralTolerances,
) -> Result<HyperbolicityReport> {
    if t_grid.is_empty() || xi_grid.is_empty() {
        return Err(Error::InvalidArgument("hyperbolicity scan needs nonempty grids".into()));
    }
    let m = a.size();
    let paths: Vec<SymmetriserPath> = xi_grid
        .par_iter()
        .map(|xi| char_poly_path(a, xi).map(|cp| build_symmetriser(&cp)))
        .collect::<Result<_>>()?;
    let points: Vec<(usize, usize)> = (0..xi_grid.len())
        .flat_map(|x| (0..t_grid.len()).map(move |k| (x, k)))
        .collect();
    let results: Vec<PointResult> = points
        .par_iter()
        .map(|&(x, k)| {
            let (ev, fro) = raw_eigenvalues(a, t_grid[k], &xi_grid[x])?;
            let imag = ev.iter().map(|l| l.im.abs()).fold(0.0, f64::max);
            let mut re: Vec<f64> = ev.iter().map(|l| l.re).collect();
            re.sort_by(f64::total_cmp);
            let scale = re.iter().map(|l| l.abs()).fold(fro, f64::max);
            Ok(PointResult {
                clusters: cluster_count(&re, tol.cluster * scale),
                minors: roots_from_minors(&paths[x], t_grid[k], tol.cluster * tol.cluster),
                imag,
                fro,
            })
        })
        .collect::<Result<_>>()?;

    let mut max_imag = 0.0;
    let mut witness = (t_grid[0], xi_grid[0].clone());
    let mut non_real = false;
    let (mut r_max, mut r_min, mut mismatches) = (0, m, 0);
    for (&(x, k), r) in points.iter().zip(&results) {
        if r.imag > max_imag {
            max_imag = r.imag;
            witness = (t_grid[k], xi_grid[x].clone());
        }
        if r.imag > tol.hyp * (1.0 + r.fro) {
            non_real = true;
        }
        r_max = r_max.max(r.clusters);
        r_min = r_min.min(r.clusters);
        if r.clusters != r.minors {
            mismatches += 1;
        }
    }
    let verdict = if non_real {
        Verdict::NonHyperbolic
    } else if r_min == m {
        Verdict::Strict
    } else {
        Verdict::Weak(r_max)
    };
    Ok(HyperbolicityReport {
        verdict,
        distinct_roots: r_max,
        min_distinct_roots: r_min,
        max_imag,
        witness,
        minor_mismatches: mismatches,
        grid_points: points.len(),
        tolerances: *tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{PolyMatrix, TimePoly};

    fn symbol(rows: &[[&[f64]; 2]; 2]) -> SymbolMatrix {
        let a = PolyMatrix::from_fn(2, 2, |i, j| TimePoly::from_real(rows[i][j]));
        SymbolMatrix::one_dimensional(a).unwrap()
    }

    fn t_grid(n: usize) -> Vec<f64> {
        (0..=n).map(|k| k as f64 / n as f64).collect()
    }

    #[test]
    fn jt_eigenvalues() {
        let a = symbol(&[[&[], &[1.0]], [&[0.0, 0.0, 1.0], &[]]]);
        let ev = eigenvalues_at(&a, 2.0, &[1.0], &SpectralTolerances::default()).unwrap();
        assert!((ev[0] + 2.0).abs() < 1e-12 && (ev[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_eigenvalues() {
        let a = symbol(&[[&[1.0], &[]], [&[], &[2.0]]]);
        let ev = eigenvalues_at(&a, 0.3, &[1.0], &SpectralTolerances::default()).unwrap();
        assert_eq!(ev.len(), 2);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rotation_is_not_hyperbolic() {
        let a = symbol(&[[&[], &[1.0]], [&[-1.0], &[]]]);
        let err = eigenvalues_at(&a, 0.0, &[1.0], &SpectralTolerances::default()).unwrap_err();
        assert!(matches!(err, Error::NonRealSpectrum { .. }));
        let rep = hyperbolicity_scan(&a, &t_grid(4), &[vec![1.0]], &SpectralTolerances::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::NonHyperbolic);
        assert!((rep.max_imag - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scan_verdicts() {
        let tol = SpectralTolerances::default();
        let xis = vec![vec![1.0], vec![8.0]];
        let jt = symbol(&[[&[], &[1.0]], [&[0.0, 0.0, 1.0], &[]]]);
        let rep = hyperbolicity_scan(&jt, &t_grid(64), &xis, &tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Weak(2));
        assert_eq!(rep.minor_mismatches, 0);

        let diag = symbol(&[[&[1.0], &[]], [&[], &[2.0]]]);
        let rep = hyperbolicity_scan(&diag, &t_grid(16), &xis, &tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Strict);

        let double = symbol(&[[&[], &[1.0]], [&[0.0, 0.0, -1.0], &[0.0, 2.0]]]);
        let rep = hyperbolicity_scan(&double, &t_grid(64), &xis, &tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Weak(1));
        assert_eq!(rep.minor_mismatches, 0);
    }

    #[test]
    fn clustering() {
        assert_eq!(cluster_count(&[0.0, 1e-9, 1.0], 1e-6), 2);
        assert_eq!(cluster_count(&[0.0, 1.0, 2.0], 1e-6), 3);
        assert_eq!(cluster_count(&[], 1.0), 0);
    }
}
