//! Predictor-corrector interior-point method for nonsymmetric conic programs
//! posed in the homogeneous self-dual model, with an inline verifier that
//! checks the convergence analysis numerically along every iteration.

// NaN must fail the comparisons, and index loops read closer to the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod acceptance;
pub mod cones;
pub mod error;
pub mod hsd;
pub mod io;
pub mod linalg;
pub mod problems;
pub mod scaling;
pub mod solver;
pub mod verifier;

pub use error::{Error, Result};
