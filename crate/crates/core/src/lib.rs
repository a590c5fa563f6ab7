//! Expected zero distributions of random linear combinations of orthogonal
//! polynomials on the unit circle with real Verblunsky coefficients.

// `!(x < y)` rejects NaN; tabulated constants keep their published digits.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::needless_range_loop
)]

pub mod ensembles;
pub mod error;
pub mod expectation;
pub mod intensity;
pub mod kernels;
pub mod montecarlo;
pub mod para;
pub mod quadrature;
pub mod roots;
pub mod szego;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use szego::{SzegoEval, VerblunskySequence};
