use super::{
    covariance, CovarianceScaling, DataMatrix, Mechanism, MechanismReport, Perturbation,
    PrivacyBudget, PSD_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::matrix::{eigenvalues_sym, spectral_norm, SymmetricMatrix};
use crate::sampling::{
    sample_symmetric_gaussian_matrix, sample_symmetric_laplace_matrix, sample_wishart, RngStream,
    WishartParams,
};

/// Laplace scale `2d / (nε)` for mean scaling (`2d / ε` for Gram scaling),
/// from the ℓ₁-sensitivity upper bound `2d/n`.
pub fn laplace_noise_scale(d: usize, n: usize, epsilon: f64, scaling: CovarianceScaling) -> f64 {
    2.0 * d as f64 * scaling.factor(n) / epsilon
}

/// `W_d(d + 1, c I)` with `c = 3 / (2nε)` (mean scaling) or `3 / (2ε)` (Gram).
pub fn wishart_noise_params(
    d: usize,
    n: usize,
    epsilon: f64,
    scaling: CovarianceScaling,
) -> Result<WishartParams> {
    let c = 3.0 * scaling.factor(n) / (2.0 * epsilon);
    WishartParams::isotropic(d, d as f64 + 1.0, c)
}

/// Gaussian-mechanism standard deviation `c · s₂ / ε` with
/// `c = sqrt(2 ln(1.25/δ)) + 1e-9` and `s₂ = 2/n` (mean scaling).
pub fn gaussian_noise_sigma(
    n: usize,
    budget: &PrivacyBudget,
    scaling: CovarianceScaling,
) -> Result<f64> {
    let delta = budget.delta();
    if delta <= 0.0 {
        return Err(Error::param(
            "delta",
            "the Gaussian mechanism needs delta > 0",
        ));
    }
    let c = (2.0 * (1.25 / delta).ln()).sqrt() + 1e-9;
    let s2 = 2.0 * scaling.factor(n);
    Ok(c * s2 / budget.epsilon())
}

fn require_pure(mechanism: Mechanism, budget: &PrivacyBudget) -> Result<()> {
    if !budget.is_pure() {
        return Err(Error::param(
            "delta",
            format!(
                "the {mechanism} mechanism is (epsilon, 0); got delta = {}",
                budget.delta()
            ),
        ));
    }
    Ok(())
}

/// Releases an already computed covariance `a` built from `n` points.
pub fn release_covariance(
    mechanism: Mechanism,
    a: &SymmetricMatrix,
    n: usize,
    budget: &PrivacyBudget,
    scaling: CovarianceScaling,
    rng: &mut RngStream,
) -> Result<Perturbation> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    let d = a.dim();
    let eps = budget.epsilon();
    let (noise, noise_scale, wishart_dof) = match mechanism {
        Mechanism::Laplace => {
            require_pure(mechanism, budget)?;
            let b = laplace_noise_scale(d, n, eps, scaling);
            (sample_symmetric_laplace_matrix(rng, d, b)?, b, None)
        }
        Mechanism::Wishart => {
            require_pure(mechanism, budget)?;
            let params = wishart_noise_params(d, n, eps, scaling)?;
            let c = params.scale_eigenvalue().expect("isotropic");
            (sample_wishart(rng, &params)?, c, Some(params.dof()))
        }
        Mechanism::Gaussian => {
            let sigma = gaussian_noise_sigma(n, budget, scaling)?;
            (
                sample_symmetric_gaussian_matrix(rng, d, sigma)?,
                sigma,
                None,
            )
        }
    };
    let output = a.add(&noise)?;
    let eig = eigenvalues_sym(&output)?;
    let min = eig[eig.len() - 1];
    let report = MechanismReport {
        mechanism,
        dim: d,
        count: n,
        epsilon: eps,
        delta: budget.delta(),
        seed: rng.seed(),
        stream: rng.stream_id(),
        covariance_scaling: scaling,
        noise_scale,
        wishart_dof,
        noise_spectral_norm: spectral_norm(&noise)?,
        output_min_eigenvalue: min,
        output_is_psd: min >= -PSD_TOLERANCE,
        output,
    };
    Ok(Perturbation {
        report,
        covariance: a.clone(),
        noise,
    })
}

pub fn perturb(
    mechanism: Mechanism,
    x: &DataMatrix,
    budget: &PrivacyBudget,
    scaling: CovarianceScaling,
    rng: &mut RngStream,
) -> Result<Perturbation> {
    let a = covariance(x, scaling);
    release_covariance(mechanism, &a, x.count(), budget, scaling, rng)
}

/// Symmetric Laplace input perturbation. The output is not guaranteed PSD.
pub fn laplace_perturb(
    x: &DataMatrix,
    budget: &PrivacyBudget,
    scaling: CovarianceScaling,
    rng: &mut RngStream,
) -> Result<Perturbation> {
    perturb(Mechanism::Laplace, x, budget, scaling, rng)
}

/// Wishart input perturbation; the output is PSD.
pub fn wishart_perturb(
    x: &DataMatrix,
    budget: &PrivacyBudget,
    scaling: CovarianceScaling,
    rng: &mut RngStream,
) -> Result<Perturbation> {
    perturb(Mechanism::Wishart, x, budget, scaling, rng)
}

/// `(ε, δ)` Gaussian baseline.
pub fn gaussian_perturb(
    x: &DataMatrix,
    budget: &PrivacyBudget,
    scaling: CovarianceScaling,
    rng: &mut RngStream,
) -> Result<Perturbation> {
    perturb(Mechanism::Gaussian, x, budget, scaling, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> DataMatrix {
        DataMatrix::from_columns(&[
            vec![0.5, 0.1, 0.0, 0.2],
            vec![-0.3, 0.4, 0.6, 0.0],
            vec![0.0, 0.0, 0.9, -0.1],
        ])
        .unwrap()
    }

    #[test]
    fn laplace_scale_substitution() {
        assert!((laplace_noise_scale(4, 100, 0.5, CovarianceScaling::Mean) - 0.16).abs() < 1e-15);
        assert_eq!(
            laplace_noise_scale(4, 100, 0.5, CovarianceScaling::Gram),
            16.0
        );
    }

    #[test]
    fn wishart_params_substitution() {
        let p = wishart_noise_params(5, 100, 1.0, CovarianceScaling::Mean).unwrap();
        assert!((p.scale_eigenvalue().unwrap() - 0.015).abs() < 1e-17);
        assert_eq!(p.dof(), 6.0);
    }

    #[test]
    fn gaussian_sigma_formula() {
        let budget = PrivacyBudget::new(1.0, 0.05).unwrap();
        let sigma = gaussian_noise_sigma(100, &budget, CovarianceScaling::Mean).unwrap();
        let c = (2.0 * 25f64.ln()).sqrt() + 1e-9;
        assert_eq!(sigma, c * 0.02);
        // strictly above the Gaussian-mechanism threshold c² > 2 ln(1.25/δ)
        assert!(c * c > 2.0 * (1.25f64 / 0.05).ln());
    }

    #[test]
    fn delta_requirements() {
        let x = data();
        let mut rng = RngStream::new(0, 0);
        let approx = PrivacyBudget::new(1.0, 1e-5).unwrap();
        let pure = PrivacyBudget::pure(1.0).unwrap();
        assert!(laplace_perturb(&x, &approx, CovarianceScaling::Mean, &mut rng).is_err());
        assert!(wishart_perturb(&x, &approx, CovarianceScaling::Mean, &mut rng).is_err());
        assert!(gaussian_perturb(&x, &pure, CovarianceScaling::Mean, &mut rng).is_err());
    }

    #[test]
    fn output_is_covariance_plus_noise() {
        let x = data();
        let budget = PrivacyBudget::pure(0.7).unwrap();
        for mech in [Mechanism::Laplace, Mechanism::Wishart] {
            let p = perturb(
                mech,
                &x,
                &budget,
                CovarianceScaling::Mean,
                &mut RngStream::new(4, 1),
            )
            .unwrap();
            let a = covariance(&x, CovarianceScaling::Mean);
            assert_eq!(p.report.output, a.add(&p.noise).unwrap());
            let diff_norm = spectral_norm(&p.report.output.sub(&a).unwrap()).unwrap();
            assert!((diff_norm - p.report.noise_spectral_norm).abs() <= 1e-10);
        }
    }

    #[test]
    fn huge_epsilon_means_negligible_noise() {
        let x = data();
        let a = covariance(&x, CovarianceScaling::Mean);
        let pure = PrivacyBudget::pure(1e9).unwrap();
        let approx = PrivacyBudget::new(1e9, 1e-5).unwrap();
        for (mech, budget) in [
            (Mechanism::Laplace, pure),
            (Mechanism::Wishart, pure),
            (Mechanism::Gaussian, approx),
        ] {
            let p = perturb(
                mech,
                &x,
                &budget,
                CovarianceScaling::Mean,
                &mut RngStream::new(1, 0),
            )
            .unwrap();
            assert!(p.report.noise_spectral_norm < 1e-6, "{mech}");
            assert!(p.report.output.max_abs_diff(&a) < 1e-6);
        }
    }

    #[test]
    fn report_records_provenance() {
        let x = data();
        let budget = PrivacyBudget::pure(0.5).unwrap();
        let p = wishart_perturb(
            &x,
            &budget,
            CovarianceScaling::Gram,
            &mut RngStream::new(17, 4),
        )
        .unwrap();
        let r = &p.report;
        assert_eq!((r.seed, r.stream, r.dim, r.count), (17, 4, 4, 3));
        assert_eq!(r.wishart_dof, Some(5.0));
        assert_eq!(r.noise_scale, 3.0);
        assert!(r.output_is_psd);
    }

    #[test]
    fn gaussian_replays() {
        let x = data();
        let budget = PrivacyBudget::new(1.0, 1e-3).unwrap();
        let a = gaussian_perturb(
            &x,
            &budget,
            CovarianceScaling::Mean,
            &mut RngStream::new(2, 2),
        )
        .unwrap();
        let b = gaussian_perturb(
            &x,
            &budget,
            CovarianceScaling::Mean,
            &mut RngStream::new(2, 2),
        )
        .unwrap();
        assert_eq!(a.report, b.report);
    }
}
