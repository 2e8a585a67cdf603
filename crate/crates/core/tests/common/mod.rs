#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakhyp::symbolic::{PolyMatrix, SymbolMatrix, TimePoly};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_poly(rng: &mut ChaCha8Rng, max_degree: usize, amp: f64) -> TimePoly {
    let d = rng.random_range(0..=max_degree);
    let c: Vec<f64> = (0..=d).map(|_| rng.random_range(-amp..amp)).collect();
    TimePoly::from_real(&c)
}

/// Similarity `P diag(λ) P⁻¹` with a constant, well-conditioned `P`.
pub struct Hyperbolic {
    pub symbol: SymbolMatrix,
    /// Eigenvalues of `A(t, ξ) / ξ`.
    pub lambdas: Vec<TimePoly>,
}

impl Hyperbolic {
    /// Eigenvalues of `A(t, ξ)` for scalar `ξ`.
    pub fn eigenvalues(&self, t: f64, xi: f64) -> Vec<f64> {
        let mut ev: Vec<f64> = self.lambdas.iter().map(|l| xi * l.eval_re(t)).collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// `λ_k = 2k + p_k(t)` with `|p_k| ≤ 0.9` on `[0, 1]` when `separated`,
/// otherwise unconstrained random polynomials (possibly with repeats).
pub fn random_hyperbolic(rng: &mut ChaCha8Rng, m: usize, separated: bool) -> Hyperbolic {
    let mut lambdas: Vec<TimePoly> = (0..m)
        .map(|k| {
            if separated {
                &TimePoly::real_constant(2.0 * k as f64) + &random_poly(rng, 2, 0.3)
            } else {
                random_poly(rng, 2, 1.0)
            }
        })
        .collect();
    if !separated && m > 1 && rng.random_bool(0.3) {
        lambdas[1] = lambdas[0].clone();
    }
    let p = nalgebra::DMatrix::<f64>::from_fn(m, m, |i, j| {
        if i == j { 1.0 } else { rng.random_range(-0.3..0.3) }
    });
    let pinv = p.clone().try_inverse().expect("diagonally dominant");
    let a = PolyMatrix::from_fn(m, m, |i, j| {
        let mut acc = TimePoly::zero();
        for k in 0..m {
            acc = &acc + &lambdas[k].scale_real(p[(i, k)] * pinv[(k, j)]);
        }
        acc
    });
    Hyperbolic { symbol: SymbolMatrix::one_dimensional(a).unwrap(), lambdas }
}

/// Unconstrained random symbol with entries of degree ≤ `max_degree`.
pub fn random_symbol(rng: &mut ChaCha8Rng, m: usize, max_degree: usize) -> SymbolMatrix {
    let a = PolyMatrix::from_fn(m, m, |_, _| random_poly(rng, max_degree, 1.0));
    SymbolMatrix::one_dimensional(a).unwrap()
}

/// `(field, path)` for every malformed fixture.
pub fn malformed_fixtures() -> Vec<(String, std::path::PathBuf)> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/malformed");
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .map(|p| {
            let src = std::fs::read_to_string(&p).unwrap();
            let field = src
                .lines()
                .next()
                .and_then(|l| l.strip_prefix("# expect: "))
                .expect("fixture header")
                .trim()
                .to_string();
            (field, p)
        })
        .collect();
    out.sort_by(|a, b| a.1.cmp(&b.1));
    out
}
