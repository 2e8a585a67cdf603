//! Exact scalar and operator algebra over polynomials in `t`.

mod matrix;
mod operator;
mod poly;
mod symbol;

pub use matrix::PolyMatrix;
pub use operator::{binomial, minus_i_pow, op_residual, op_residual_on, OperatorPoly, RESIDUAL_SAMPLES};
pub use poly::{TimePoly, DEFAULT_TRIM};
pub use symbol::{euclidean_norm, japanese_bracket, SymbolMatrix};
