use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{eig_sym, eigenvalues_sym, rank_k_truncation, spectral_norm};
use crate::mechanisms::{covariance, wishart_noise_params, CovarianceScaling, DataMatrix};
use crate::sampling::{sample_wishart, RngStream};
use crate::stats::{linear_fit, median, LinearFit};

/// Relative slack, scaled by `max(1, ‖A‖₂)`.
pub const LOW_RANK_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowRankTrial {
    pub trial: u64,
    /// `‖A − Â_k‖₂`.
    pub error: f64,
    pub noise_norm: f64,
    /// `λ_{k+1}(A) + 2‖W‖₂`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowRankReport {
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    pub trials: usize,
    /// `λ_{k+1}(A)`, zero when `k = d`.
    pub lambda_next: f64,
    pub violations: usize,
    /// Median of `‖A − Â_k‖₂ − λ_{k+1}(A)`.
    pub median_excess: f64,
    pub median_noise_norm: f64,
    pub max_error_over_bound: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub per_trial: Vec<LowRankTrial>,
}

/// Rank-`k` approximation error of the Wishart release of `A = X Xᵀ` (Gram
/// scaling). Trial `t` uses `rng.substream(t)`.
pub fn low_rank_error_audit(
    x: &DataMatrix,
    k: usize,
    epsilon: f64,
    trials: usize,
    rng: &RngStream,
) -> Result<LowRankReport> {
    let d = x.dim();
    if k == 0 || k > d {
        return Err(Error::param("k", format!("must be in 1..={d}, got {k}")));
    }
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let a = covariance(x, CovarianceScaling::Gram);
    let params = wishart_noise_params(d, x.count(), epsilon, CovarianceScaling::Gram)?;
    let lam = eigenvalues_sym(&a)?;
    let lambda_next = lam.get(k).copied().unwrap_or(0.0);
    let tol = LOW_RANK_TOLERANCE * lam[0].abs().max(1.0);

    let per_trial = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let w = sample_wishart(&mut rng.substream(t), &params)?;
            let a_hat_k = rank_k_truncation(&eig_sym(&a.add(&w)?)?, k)?;
            let error = spectral_norm(&a.sub(&a_hat_k)?)?;
            let noise_norm = spectral_norm(&w)?;
            let bound = lambda_next + 2.0 * noise_norm;
            Ok(LowRankTrial {
                trial: t,
                error,
                noise_norm,
                bound,
                holds: error <= bound + tol,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let excess: Vec<f64> = per_trial.iter().map(|t| t.error - lambda_next).collect();
    let noise: Vec<f64> = per_trial.iter().map(|t| t.noise_norm).collect();
    let violations = per_trial.iter().filter(|t| !t.holds).count();
    Ok(LowRankReport {
        d,
        n: x.count(),
        k,
        epsilon,
        trials,
        lambda_next,
        violations,
        median_excess: median(&excess),
        median_noise_norm: median(&noise),
        max_error_over_bound: per_trial
            .iter()
            .map(|t| t.error / t.bound)
            .fold(f64::NEG_INFINITY, f64::max),
        passed: violations == 0,
        per_trial,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowRankSweep {
    pub reports: Vec<LowRankReport>,
    /// Median excess regressed on `d ln d`.
    pub fit: LinearFit,
}

/// Runs [`low_rank_error_audit`] for each `d`, with datasets from `dataset`,
/// and fits median excess against `d ln d`. Dimension `d` gets
/// `rng.substream(d)` as its parent stream.
pub fn low_rank_sweep(
    dims: &[usize],
    k: usize,
    epsilon: f64,
    trials: usize,
    rng: &RngStream,
    mut dataset: impl FnMut(usize, &mut RngStream) -> Result<DataMatrix>,
) -> Result<LowRankSweep> {
    if dims.len() < 2 {
        return Err(Error::param(
            "d list",
            "need at least two dimensions to fit",
        ));
    }
    let mut reports = Vec::with_capacity(dims.len());
    for &d in dims {
        let parent = rng.substream(d as u64);
        let x = dataset(d, &mut parent.substream(u64::MAX))?;
        let mut r = low_rank_error_audit(&x, k, epsilon, trials, &parent)?;
        r.per_trial.clear();
        reports.push(r);
    }
    let xs: Vec<f64> = dims.iter().map(|&d| d as f64 * (d as f64).ln()).collect();
    let ys: Vec<f64> = reports.iter().map(|r| r.median_excess).collect();
    Ok(LowRankSweep {
        fit: linear_fit(&xs, &ys),
        reports,
    })
}
