use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::eigenvalues_sym;
use crate::sampling::{sample_wishart, RngStream, WishartParams};
use crate::stats::binomial_standard_error;

pub const MIN_TAIL_TRIALS: usize = 1000;

/// Parameters of the largest-eigenvalue tail bound for `W_d(m, c I)`:
/// `P(λ₁(W) ≥ (m + √(2mθ(r+2)) + 2θr) c) ≤ d e^{−θ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBoundParams {
    pub theta: f64,
    pub dim: usize,
    pub dof: f64,
    /// Effective rank of the scale matrix; `d` when isotropic.
    pub rank: f64,
    pub scale: f64,
}

impl TailBoundParams {
    pub fn new(theta: f64, dim: usize, dof: f64, rank: f64, scale: f64) -> Result<Self> {
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(Error::param("theta", format!("must be >= 0, got {theta}")));
        }
        if dim == 0 {
            return Err(Error::InvalidDimension("d must be at least 1".into()));
        }
        if !(dof > dim as f64 - 1.0) {
            return Err(Error::param(
                "dof",
                format!("must exceed d - 1 = {}, got {dof}", dim - 1),
            ));
        }
        if !(rank > 0.0 && rank.is_finite()) {
            return Err(Error::param(
                "rank",
                format!("must be positive, got {rank}"),
            ));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::param(
                "scale",
                format!("must be positive, got {scale}"),
            ));
        }
        Ok(Self {
            theta,
            dim,
            dof,
            rank,
            scale,
        })
    }

    /// Isotropic scale, so `r = d`.
    pub fn isotropic(theta: f64, dim: usize, dof: f64, scale: f64) -> Result<Self> {
        Self::new(theta, dim, dof, dim as f64, scale)
    }

    pub fn with_theta(self, theta: f64) -> Result<Self> {
        Self::new(theta, self.dim, self.dof, self.rank, self.scale)
    }

    pub fn threshold(&self) -> f64 {
        let (m, t, r) = (self.dof, self.theta, self.rank);
        (m + (2.0 * m * t * (r + 2.0)).sqrt() + 2.0 * t * r) * self.scale
    }

    /// `d e^{−θ}`.
    pub fn probability_bound(&self) -> f64 {
        self.dim as f64 * (-self.theta).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBoundReport {
    pub params: TailBoundParams,
    pub trials: usize,
    pub threshold: f64,
    pub exceedances: usize,
    pub frequency: f64,
    pub probability_bound: f64,
    pub standard_error: f64,
    /// The bound is at least 1 and says nothing.
    pub vacuous: bool,
    pub passed: bool,
}

fn evaluate(params: TailBoundParams, top: &[f64]) -> TailBoundReport {
    let trials = top.len();
    let threshold = params.threshold();
    let exceedances = top.iter().filter(|&&l| l >= threshold).count();
    let frequency = exceedances as f64 / trials as f64;
    let probability_bound = params.probability_bound();
    let standard_error = binomial_standard_error(probability_bound.min(1.0), trials);
    let vacuous = probability_bound >= 1.0;
    TailBoundReport {
        params,
        trials,
        threshold,
        exceedances,
        frequency,
        probability_bound,
        standard_error,
        vacuous,
        passed: vacuous || frequency <= probability_bound + 3.0 * standard_error,
    }
}

fn top_eigenvalues(params: &TailBoundParams, trials: usize, rng: &RngStream) -> Result<Vec<f64>> {
    if trials < MIN_TAIL_TRIALS {
        return Err(Error::param(
            "trials",
            format!("need at least {MIN_TAIL_TRIALS}, got {trials}"),
        ));
    }
    let wishart = WishartParams::isotropic(params.dim, params.dof, params.scale)?;
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let w = sample_wishart(&mut rng.substream(t), &wishart)?;
            Ok(eigenvalues_sym(&w)?[0])
        })
        .collect()
}

/// Exceedance frequency of `λ₁(W)` over the threshold, `W ~ W_d(m, c I)`,
/// trial `t` drawn from `rng.substream(t)`.
pub fn tail_bound_audit(
    params: TailBoundParams,
    trials: usize,
    rng: &RngStream,
) -> Result<TailBoundReport> {
    let top = top_eigenvalues(&params, trials, rng)?;
    Ok(evaluate(params, &top))
}

/// The same draws scored at several `θ`.
pub fn tail_bound_sweep(
    params: TailBoundParams,
    thetas: &[f64],
    trials: usize,
    rng: &RngStream,
) -> Result<Vec<TailBoundReport>> {
    let top = top_eigenvalues(&params, trials, rng)?;
    thetas
        .iter()
        .map(|&theta| Ok(evaluate(params.with_theta(theta)?, &top)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_value() {
        let p = TailBoundParams::isotropic(5.0, 10, 11.0, 1.0).unwrap();
        let expected = 11.0 + 1320f64.sqrt() + 100.0;
        assert!((p.threshold() - expected).abs() < 1e-12);
        assert!((p.probability_bound() - 10.0 * (-5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn zero_theta_is_vacuous() {
        let p = TailBoundParams::isotropic(0.0, 4, 5.0, 1.0).unwrap();
        let r = tail_bound_audit(p, 1000, &RngStream::new(0, 0)).unwrap();
        assert!(r.vacuous && r.passed);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(TailBoundParams::isotropic(-1.0, 4, 5.0, 1.0).is_err());
        assert!(TailBoundParams::isotropic(1.0, 4, 3.0, 1.0).is_err());
        assert!(TailBoundParams::isotropic(1.0, 4, 5.0, 0.0).is_err());
        let p = TailBoundParams::isotropic(1.0, 4, 5.0, 1.0).unwrap();
        assert!(tail_bound_audit(p, 999, &RngStream::new(0, 0)).is_err());
    }
}
