//! Differentially private covariance release.
//!
//! The Wishart mechanism adds a draw from `W_d(d + 1, 3/(2nε) I)` to the sample
//! covariance, which keeps the released matrix positive semidefinite while
//! giving `(ε, 0)`-differential privacy. Laplace and Gaussian input
//! perturbation are included as baselines, together with Monte Carlo audits of
//! the privacy and utility guarantees.

// `!(x > 0.0)` is used on purpose so NaN is rejected; index loops read
// better in the dense matrix code.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod audit;
pub mod bench;
pub mod cli;
pub mod error;
pub mod matrix;
pub mod mechanisms;
pub mod sampling;
pub mod stats;
pub mod utility;

pub use error::{Error, Result};
pub use matrix::{EigenDecomposition, Matrix, SymmetricMatrix};
pub use mechanisms::{
    CovarianceScaling, DataMatrix, Mechanism, MechanismReport, Perturbation, PrivacyBudget,
};
pub use sampling::RngStream;
