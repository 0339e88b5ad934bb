use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::synthetic::synthetic_dataset;
use crate::error::{Error, Result};
use crate::matrix::{eig_sym, eigenvalues_sym};
use crate::mechanisms::{covariance, wishart_noise_params, CovarianceScaling};
use crate::sampling::{sample_wishart, RngStream};
use crate::stats::binomial_standard_error;

/// `(ρ, η)` closeness target for the top eigenvector and the eigengap
/// `λ₁ − λ₂` it is evaluated at.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloseApproxParams {
    pub rho: f64,
    pub eta: f64,
    pub gap: f64,
}

impl CloseApproxParams {
    /// Needs `√2/2 ≤ ρ < 1`, `0 < η < 1` and a positive gap.
    pub fn new(rho: f64, eta: f64, gap: f64) -> Result<Self> {
        if !(std::f64::consts::FRAC_1_SQRT_2..1.0).contains(&rho) {
            return Err(Error::param(
                "rho",
                format!("must be in [√2/2, 1), got {rho}"),
            ));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::param("eta", format!("must be in (0, 1), got {eta}")));
        }
        if !(gap > 0.0 && gap.is_finite()) {
            return Err(Error::param("gap", format!("must be positive, got {gap}")));
        }
        Ok(Self { rho, eta, gap })
    }

    pub fn with_gap(self, gap: f64) -> Result<Self> {
        Self::new(self.rho, self.eta, gap)
    }
}

/// Number of points after which the Wishart mechanism's top eigenvector is
/// `(ρ, η)`-close:
/// `n* = 3(d + 1 + √(2(d+1)(d+2) ln(d/η)) + 2d ln(d/η)) / (2ε(1 − ρ²)(λ₁ − λ₂))`.
pub fn sample_complexity_bound(d: usize, epsilon: f64, params: &CloseApproxParams) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be at least 1".into()));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::param(
            "epsilon",
            format!("must be positive, got {epsilon}"),
        ));
    }
    let df = d as f64;
    let log_term = (df / params.eta).ln();
    let numerator =
        3.0 * (df + 1.0 + (2.0 * (df + 1.0) * (df + 2.0) * log_term).sqrt() + 2.0 * df * log_term);
    Ok(numerator / (2.0 * epsilon * (1.0 - params.rho * params.rho) * params.gap))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleSize {
    /// Grow `n` until it covers `n*` at the realized gap.
    AtBound,
    Fixed(usize),
}

/// Population spectrum for a target gap: `λ₂ = (0.95 − gap)/2.1`,
/// `λ₁ = λ₂ + gap`, and a tail of total mass `0.1 λ₂` spread over the
/// remaining coordinates. The total is at most 0.95.
pub fn close_approx_spectrum(d: usize, gap: f64) -> Result<Vec<f64>> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("need d >= 2, got {d}")));
    }
    if !(gap > 0.0 && gap < 0.95) {
        return Err(Error::param(
            "gap",
            format!("must be in (0, 0.95), got {gap}"),
        ));
    }
    let l2 = (0.95 - gap) / 2.1;
    let mut s = vec![l2 + gap, l2];
    s.extend(std::iter::repeat_n(0.1 * l2 / (d - 2) as f64, d - 2));
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloseApproxReport {
    pub d: usize,
    pub epsilon: f64,
    pub params: CloseApproxParams,
    pub n: usize,
    /// Gap of the realized covariance.
    pub realized_gap: f64,
    /// `n*` at the realized gap.
    pub n_star: f64,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Binomial standard error at the target rate `1 − η`.
    pub standard_error: f64,
    pub min_abs_inner_product: f64,
    /// `None` when `n < n*`, where nothing is claimed.
    pub passed: Option<bool>,
}

const MAX_RESIZES: u64 = 32;

/// Empirical `P(|⟨v₁, v̂₁⟩| ≥ ρ)` for the Wishart mechanism on a synthetic
/// dataset with population gap `params.gap`.
///
/// The dataset is drawn from substreams counting down from `u64::MAX`; trial
/// `t` uses `rng.substream(t)`.
pub fn close_approx_audit(
    d: usize,
    epsilon: f64,
    params: &CloseApproxParams,
    size: SampleSize,
    trials: usize,
    rng: &RngStream,
) -> Result<CloseApproxReport> {
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let spectrum = close_approx_spectrum(d, params.gap)?;
    let gap_of = |n: usize, attempt: u64| -> Result<_> {
        let x = synthetic_dataset(&spectrum, n, &mut rng.substream(u64::MAX - attempt), false)?;
        let a = covariance(&x, CovarianceScaling::Mean);
        let lam = eigenvalues_sym(&a)?;
        Ok((a, lam[0] - lam[1]))
    };
    let (a, realized_gap, n) = match size {
        SampleSize::Fixed(n) => {
            let (a, g) = gap_of(n, 0)?;
            (a, g, n)
        }
        SampleSize::AtBound => {
            let mut n = sample_complexity_bound(d, epsilon, params)?.ceil() as usize;
            let mut attempt = 0;
            loop {
                let (a, g) = gap_of(n, attempt)?;
                let need =
                    sample_complexity_bound(d, epsilon, &params.with_gap(g)?)?.ceil() as usize;
                if n >= need {
                    break (a, g, n);
                }
                attempt += 1;
                if attempt > MAX_RESIZES {
                    return Err(Error::param(
                        "n",
                        "realized gap keeps n* above the sample size",
                    ));
                }
                n = need;
            }
        }
    };
    let n_star = sample_complexity_bound(d, epsilon, &params.with_gap(realized_gap)?)?;
    let eig_a = eig_sym(&a)?;
    let v1 = eig_a.eigenvector(0);
    let noise = wishart_noise_params(d, n, epsilon, CovarianceScaling::Mean)?;

    let inner: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let w = sample_wishart(&mut rng.substream(t), &noise)?;
            let v1_hat = eig_sym(&a.add(&w)?)?.eigenvector(0);
            Ok(v1
                .iter()
                .zip(&v1_hat)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .abs())
        })
        .collect::<Result<_>>()?;

    let successes = inner.iter().filter(|&&p| p >= params.rho).count();
    let success_rate = successes as f64 / trials as f64;
    let target = 1.0 - params.eta;
    let standard_error = binomial_standard_error(target, trials);
    Ok(CloseApproxReport {
        d,
        epsilon,
        params: *params,
        n,
        realized_gap,
        n_star,
        trials,
        successes,
        success_rate,
        standard_error,
        min_abs_inner_product: inner.iter().copied().fold(f64::INFINITY, f64::min),
        passed: (n as f64 >= n_star).then_some(success_rate >= target - 3.0 * standard_error),
    })
}
