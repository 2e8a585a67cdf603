//! Analysis of first-order weakly hyperbolic systems `D_t u − A(t,D_x)u = 0`
//! whose coefficients are polynomials in `t`.
//!
//! The crate builds the standard symmetriser and check function of the
//! system symbol, measures the Levi-type constants, performs the block
//! Sylvester reduction with exact operator algebra, and integrates the
//! reduced system frequency by frequency to classify energy growth.

pub mod energy;
pub mod error;
pub mod levi;
pub mod linalg;
pub mod pipeline;
pub mod reduction;
pub mod report;
pub mod roots;
pub mod scenario;
pub mod spectral;
pub mod symbolic;
pub mod symmetriser;

pub use error::{Error, Result};
