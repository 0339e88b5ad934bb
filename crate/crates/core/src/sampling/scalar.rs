use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::RngStream;
use crate::error::{Error, Result};

/// Zero-mean Laplace distribution with scale `b`, sampled by inverting the CDF.
#[derive(Clone, Copy, Debug)]
pub struct Laplace {
    scale: f64,
}

impl Laplace {
    pub fn new(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::param(
                "Laplace scale",
                format!("must be positive, got {scale}"),
            ));
        }
        Ok(Self { scale })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        // u on (-1/2, 1/2); -1/2 itself would give ln(0)
        let u = loop {
            let u = rng.uniform() - 0.5;
            if u != -0.5 {
                break u;
            }
        };
        -self.scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
    }
}

pub fn sample_laplace(rng: &mut RngStream, scale: f64) -> Result<f64> {
    Ok(Laplace::new(scale)?.sample(rng))
}

/// `N(0, σ²)`; `σ = 0` yields exactly zero.
pub fn sample_gaussian(rng: &mut RngStream, sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::param(
            "Gaussian sigma",
            format!("must be non-negative, got {sigma}"),
        ));
    }
    let z: f64 = rng.sample(StandardNormal);
    Ok(sigma * z)
}

/// Gamma with shape `α` and scale `θ` (mean `αθ`).
pub fn sample_gamma(rng: &mut RngStream, shape: f64, scale: f64) -> Result<f64> {
    let dist = Gamma::new(shape, scale).map_err(|e| {
        Error::param(
            "gamma parameters",
            format!("shape {shape}, scale {scale}: {e}"),
        )
    })?;
    Ok(dist.sample(rng))
}
