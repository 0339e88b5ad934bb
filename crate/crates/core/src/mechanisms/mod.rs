//! Covariance release under the Laplace, Wishart and Gaussian mechanisms, and
//! the rule for choosing between Laplace and Wishart noise.

mod chooser;
mod data;
mod perturb;

pub use chooser::{choose_mechanism, ChooserVerdict, PureMechanism};
pub use data::{covariance, CovarianceScaling, DataMatrix, NORM_TOLERANCE};
pub use perturb::{
    gaussian_noise_sigma, gaussian_perturb, laplace_noise_scale, laplace_perturb, perturb,
    release_covariance, wishart_noise_params, wishart_perturb,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    epsilon: f64,
    delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::param(
                "epsilon",
                format!("must be positive and finite, got {epsilon}"),
            ));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::param(
                "delta",
                format!("must lie in [0, 1), got {delta}"),
            ));
        }
        Ok(Self { epsilon, delta })
    }

    /// `(ε, 0)`.
    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_pure(&self) -> bool {
        self.delta == 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    Wishart,
    Laplace,
    Gaussian,
}

impl std::fmt::Display for Mechanism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mechanism::Wishart => "wishart",
            Mechanism::Laplace => "laplace",
            Mechanism::Gaussian => "gaussian",
        })
    }
}

/// Provenance of one release.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechanismReport {
    pub mechanism: Mechanism,
    pub dim: usize,
    pub count: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub stream: u64,
    pub covariance_scaling: CovarianceScaling,
    /// Laplace scale `b`, Wishart scale eigenvalue `c`, or Gaussian `σ`.
    pub noise_scale: f64,
    /// Wishart degrees of freedom; absent for the entrywise mechanisms.
    pub wishart_dof: Option<f64>,
    /// `‖Â − A‖₂`.
    pub noise_spectral_norm: f64,
    pub output_min_eigenvalue: f64,
    pub output_is_psd: bool,
    pub output: SymmetricMatrix,
}

/// A release together with the noise that produced it. The noise never
/// leaves the process: it is needed for auditing only and would reveal `A`.
#[derive(Clone, Debug)]
pub struct Perturbation {
    pub report: MechanismReport,
    pub covariance: SymmetricMatrix,
    pub noise: SymmetricMatrix,
}

/// Eigenvalue floor for calling a released matrix positive semidefinite.
pub const PSD_TOLERANCE: f64 = 1e-10;
