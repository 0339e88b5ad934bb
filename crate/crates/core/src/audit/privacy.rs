use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adjacent::{delta_matrix, sample_adjacent_pair, PairRegime};
use crate::error::{Error, Result};
use crate::matrix::{eigenvalues_sym, nuclear_norm, SymmetricMatrix};
use crate::mechanisms::{wishart_noise_params, CovarianceScaling};
use crate::sampling::{sample_wishart, RngStream};

pub const PRIVACY_TOLERANCE: f64 = 1e-9;

fn min_eigenvalue(m: &SymmetricMatrix) -> Result<f64> {
    let eig = eigenvalues_sym(m)?;
    Ok(eig[eig.len() - 1])
}

/// `log p(W₀) / p(W₀ + Δ)` for `W_d(d + 1, c I)`, which reduces to
/// `tr(Δ) / (2c)`.
///
/// Fails with [`Error::SupportViolation`] if `W₀` or `W₀ + Δ` is not positive
/// definite, since one of the densities is then zero.
pub fn density_log_ratio(w0: &SymmetricMatrix, delta: &SymmetricMatrix, c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param("c", format!("must be positive, got {c}")));
    }
    let shifted = w0.add(delta)?;
    for m in [w0, &shifted] {
        let min = min_eigenvalue(m)?;
        if !(min > 0.0) {
            return Err(Error::SupportViolation {
                min_eigenvalue: min,
            });
        }
    }
    Ok(delta.trace() / (2.0 * c))
}

/// A trial that broke one of the checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffendingTrial {
    pub trial: u64,
    pub regime: PairRegime,
    pub index: usize,
    pub v: Vec<f64>,
    pub v_hat: Vec<f64>,
    pub log_ratio: f64,
    pub von_neumann_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyAuditReport {
    pub d: usize,
    pub n: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub supported_trials: usize,
    /// Trials where `W₀ + Δ` was not positive definite.
    pub support_violations: usize,
    /// Max `|log ratio|` over supported trials.
    pub max_abs_log_ratio: f64,
    /// Max `½ ‖C⁻¹‖₂ ‖Δ‖*` over all trials.
    pub max_von_neumann_bound: f64,
    /// `|tr(Δ)|/(2c) ≤ ½ ‖C⁻¹‖₂ ‖Δ‖*` on every trial.
    pub exact_within_von_neumann: bool,
    pub bound: f64,
    pub passed: bool,
    pub offending: Option<OffendingTrial>,
}

struct Trial {
    offending: OffendingTrial,
    supported: bool,
}

/// Monte Carlo check of the Wishart density ratio over random adjacent pairs
/// (mean scaling) and random `W₀ ~ W_d(d + 1, 3/(2nε) I)`.
pub fn privacy_ratio_audit(
    trials: usize,
    d: usize,
    n: usize,
    epsilon: f64,
    rng: &RngStream,
) -> Result<PrivacyAuditReport> {
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let params = wishart_noise_params(d, n, epsilon, CovarianceScaling::Mean)?;
    let c = params.scale_eigenvalue().expect("isotropic");
    let results = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut r = rng.substream(t);
            let regime = PairRegime::for_trial(t);
            let pair = sample_adjacent_pair(d, n, regime, &mut r)?;
            let delta = delta_matrix(&pair, CovarianceScaling::Mean);
            let w0 = sample_wishart(&mut r, &params)?;
            let von_neumann_bound = 0.5 / c * nuclear_norm(&delta)?;
            let (log_ratio, supported) = match density_log_ratio(&w0, &delta, c) {
                Ok(v) => (v, true),
                Err(Error::SupportViolation { .. }) => (delta.trace() / (2.0 * c), false),
                Err(e) => return Err(e),
            };
            Ok(Trial {
                offending: OffendingTrial {
                    trial: t,
                    regime,
                    index: pair.index(),
                    v: pair.v().to_vec(),
                    v_hat: pair.v_hat().to_vec(),
                    log_ratio,
                    von_neumann_bound,
                },
                supported,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let bound = epsilon + PRIVACY_TOLERANCE;
    let supported_trials = results.iter().filter(|t| t.supported).count();
    let max_abs_log_ratio = results
        .iter()
        .filter(|t| t.supported)
        .map(|t| t.offending.log_ratio.abs())
        .fold(0.0, f64::max);
    let max_von_neumann_bound = results
        .iter()
        .map(|t| t.offending.von_neumann_bound)
        .fold(0.0, f64::max);
    let vn_broken = |t: &Trial| t.offending.log_ratio.abs() > t.offending.von_neumann_bound + 1e-12;
    let exact_within_von_neumann = !results.iter().any(vn_broken);
    let offending = results
        .iter()
        .find(|t| {
            vn_broken(t)
                || (t.supported && t.offending.log_ratio.abs() > bound)
                || t.offending.von_neumann_bound > bound
        })
        .map(|t| t.offending.clone());
    Ok(PrivacyAuditReport {
        d,
        n,
        epsilon,
        trials,
        supported_trials,
        support_violations: trials - supported_trials,
        max_abs_log_ratio,
        max_von_neumann_bound,
        exact_within_von_neumann,
        bound,
        passed: offending.is_none(),
        offending,
    })
}
