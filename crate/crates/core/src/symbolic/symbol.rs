//! First-order system symbols `A(t,ξ) = Σ_j A_j(t) ξ_j`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::matrix::PolyMatrix;
use crate::error::{Error, Result};

/// `⟨ξ⟩ = (1 + |ξ|²)^{1/2}`
pub fn japanese_bracket(xi: &[f64]) -> f64 {
    (1.0 + xi.iter().map(|x| x * x).sum::<f64>()).sqrt()
}

pub fn euclidean_norm(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolMatrix {
    m: usize,
    components: Vec<PolyMatrix>,
}

impl SymbolMatrix {
    pub fn new(components: Vec<PolyMatrix>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::DimensionMismatch("a symbol needs at least one ξ-component".into()));
        };
        let m = first.rows();
        for (j, c) in components.iter().enumerate() {
            if c.rows() != m || c.cols() != m {
                return Err(Error::DimensionMismatch(format!(
                    "component {} is {}×{}, expected {m}×{m}",
                    j + 1,
                    c.rows(),
                    c.cols()
                )));
            }
        }
        Ok(Self { m, components })
    }

    /// One spatial dimension: `A(t,ξ) = A_1(t) ξ`.
    pub fn one_dimensional(a1: PolyMatrix) -> Result<Self> {
        Self::new(vec![a1])
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn spatial_dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[PolyMatrix] {
        &self.components
    }

    fn check_xi(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.components.len() {
            return Err(Error::DimensionMismatch(format!(
                "ξ has {} components, symbol expects {}",
                xi.len(),
                self.components.len()
            )));
        }
        Ok(())
    }

    /// `A(·,ξ)` as a matrix of time polynomials.
    pub fn at(&self, xi: &[f64]) -> Result<PolyMatrix> {
        self.check_xi(xi)?;
        let mut acc = PolyMatrix::zeros(self.m, self.m);
        for (c, &x) in self.components.iter().zip(xi) {
            if x != 0.0 {
                acc = &acc + &c.scale_real(x);
            }
        }
        Ok(acc)
    }

    /// `A_0(·,ξ) = ⟨ξ⟩⁻¹ A(·,ξ)`
    pub fn normalized_at(&self, xi: &[f64]) -> Result<PolyMatrix> {
        Ok(self.at(xi)?.scale_real(1.0 / japanese_bracket(xi)))
    }

    pub fn eval(&self, t: f64, xi: &[f64]) -> Result<DMatrix<f64>> {
        self.check_xi(xi)?;
        let mut out = DMatrix::zeros(self.m, self.m);
        for (c, &x) in self.components.iter().zip(xi) {
            out += c.eval_re(t) * x;
        }
        Ok(out)
    }

    /// True when no entry depends on `t`.
    pub fn is_time_constant(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.entries().iter().all(|p| p.degree().unwrap_or(0) == 0))
    }

    pub fn scale(&self) -> f64 {
        self.components.iter().map(PolyMatrix::norm).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::TimePoly;

    #[test]
    fn homogeneous_of_degree_one() {
        let a = PolyMatrix::from_fn(2, 2, |i, j| TimePoly::from_real(&[i as f64, j as f64 + 1.0]));
        let b = PolyMatrix::from_fn(2, 2, |i, j| TimePoly::from_real(&[(i * j) as f64, -1.0]));
        let s = SymbolMatrix::new(vec![a, b]).unwrap();
        let x = s.eval(0.4, &[1.5, -2.0]).unwrap();
        let y = s.eval(0.4, &[3.0, -4.0]).unwrap();
        assert!((y - x * 2.0).norm() < 1e-14);
    }

    #[test]
    fn rejects_wrong_xi_length() {
        let s = SymbolMatrix::one_dimensional(PolyMatrix::identity(2)).unwrap();
        assert!(s.eval(0.0, &[1.0, 1.0]).is_err());
    }
}
