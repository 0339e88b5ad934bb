//! Parameter sweeps behind `bench`. Each suite returns flat rows that are
//! written as CSV.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::spectral_norm;
use crate::mechanisms::{laplace_noise_scale, wishart_noise_params, CovarianceScaling};
use crate::sampling::{sample_symmetric_laplace_matrix, sample_wishart, RngStream};
use crate::stats::{linear_fit, log_log_slope, median, LinearFit};
use crate::utility::{
    close_approx_audit, low_rank_sweep, subspace_closeness_audit, synthetic_dataset,
    CloseApproxParams, SampleSize,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Subspace,
    Complexity,
    Lowrank,
    NoiseScaling,
}

/// Spectrum with a clear gap after the first `k` entries: the top `k` fall
/// linearly from `0.6/k` by up to a quarter, the rest share at most 0.3
/// evenly, capped at half the smallest head entry.
pub fn gapped_spectrum(d: usize, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k >= d {
        return Err(Error::param("k", format!("must be in 1..{d}, got {k}")));
    }
    let head = 0.6 / k as f64;
    let step = 0.25 / k as f64;
    let smallest = head * (1.0 - step * (k - 1) as f64);
    let tail = (0.3 / (d - k) as f64).min(0.5 * smallest);
    Ok((0..d)
        .map(|i| {
            if i < k {
                head * (1.0 - step * i as f64)
            } else {
                tail
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseScalingRow {
    pub d: usize,
    pub n: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub median_wishart_norm: f64,
    pub median_laplace_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseScalingSweep {
    pub rows: Vec<NoiseScalingRow>,
    pub wishart_slope: f64,
    pub laplace_slope: f64,
}

/// Median spectral norms of the Wishart and Laplace noise matrices (mean
/// scaling). Cell `i` of the `d × ε` grid, in row-major order, draws from
/// `rng.substream(i)`.
pub fn noise_scaling_rows(
    dims: &[usize],
    n: usize,
    epsilons: &[f64],
    trials: usize,
    rng: &RngStream,
) -> Result<Vec<NoiseScalingRow>> {
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let cells: Vec<(usize, f64)> = dims
        .iter()
        .flat_map(|&d| epsilons.iter().map(move |&e| (d, e)))
        .collect();
    cells
        .iter()
        .enumerate()
        .map(|(i, &(d, epsilon))| {
            let parent = rng.substream(i as u64);
            let wishart = wishart_noise_params(d, n, epsilon, CovarianceScaling::Mean)?;
            let b = laplace_noise_scale(d, n, epsilon, CovarianceScaling::Mean);
            let norms = (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let mut r = parent.substream(t);
                    let w = spectral_norm(&sample_wishart(&mut r, &wishart)?)?;
                    let l = spectral_norm(&sample_symmetric_laplace_matrix(&mut r, d, b)?)?;
                    Ok((w, l))
                })
                .collect::<Result<Vec<_>>>()?;
            let w: Vec<f64> = norms.iter().map(|x| x.0).collect();
            let l: Vec<f64> = norms.iter().map(|x| x.1).collect();
            Ok(NoiseScalingRow {
                d,
                n,
                epsilon,
                trials,
                median_wishart_norm: median(&w),
                median_laplace_norm: median(&l),
            })
        })
        .collect()
}

/// [`noise_scaling_rows`] at a single `ε`, with log-log slopes against `d`.
pub fn noise_scaling_sweep(
    dims: &[usize],
    n: usize,
    epsilon: f64,
    trials: usize,
    rng: &RngStream,
) -> Result<NoiseScalingSweep> {
    if dims.len() < 2 {
        return Err(Error::param(
            "d list",
            "need at least two dimensions to fit",
        ));
    }
    let rows = noise_scaling_rows(dims, n, &[epsilon], trials, rng)?;
    let ds: Vec<f64> = dims.iter().map(|&d| d as f64).collect();
    let w: Vec<f64> = rows.iter().map(|r| r.median_wishart_norm).collect();
    let l: Vec<f64> = rows.iter().map(|r| r.median_laplace_norm).collect();
    Ok(NoiseScalingSweep {
        wishart_slope: log_log_slope(&ds, &w),
        laplace_slope: log_log_slope(&ds, &l),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceRow {
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub gap: f64,
    pub median_noise_norm: f64,
    pub qualifying_trials: usize,
    pub bound_violations: usize,
    pub davis_kahan_violations: usize,
    pub weyl_violations: usize,
    pub median_projector_distance: f64,
    pub max_distance_over_bound: f64,
}

pub fn subspace_rows(
    dims: &[usize],
    n: usize,
    k: usize,
    epsilons: &[f64],
    trials: usize,
    rng: &RngStream,
) -> Result<Vec<SubspaceRow>> {
    let mut rows = Vec::new();
    let mut cell = 0u64;
    for &d in dims {
        for &epsilon in epsilons {
            let parent = rng.substream(cell);
            cell += 1;
            let x = synthetic_dataset(
                &gapped_spectrum(d, k)?,
                n,
                &mut parent.substream(u64::MAX),
                true,
            )?;
            let res = subspace_closeness_audit(&x, k, epsilon, trials, &parent)?;
            let noise: Vec<f64> = res.iter().map(|r| r.noise_norm).collect();
            let dist: Vec<f64> = res.iter().map(|r| r.projector_distance_f).collect();
            let qualifying: Vec<_> = res.iter().filter(|r| r.gap_condition_met).collect();
            rows.push(SubspaceRow {
                d,
                n,
                k,
                epsilon,
                trials,
                gap: res[0].gap,
                median_noise_norm: median(&noise),
                qualifying_trials: qualifying.len(),
                bound_violations: res.iter().filter(|r| r.bound_holds == Some(false)).count(),
                davis_kahan_violations: res
                    .iter()
                    .filter(|r| r.davis_kahan_holds == Some(false))
                    .count(),
                weyl_violations: res.iter().filter(|r| !r.weyl_holds).count(),
                median_projector_distance: median(&dist),
                max_distance_over_bound: qualifying
                    .iter()
                    .map(|r| r.projector_distance_f / r.bound)
                    .fold(f64::NAN, f64::max),
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub d: usize,
    pub epsilon: f64,
    pub rho: f64,
    pub eta: f64,
    pub gap: f64,
    pub n: usize,
    pub n_star: f64,
    pub realized_gap: f64,
    pub trials: usize,
    pub success_rate: f64,
    pub standard_error: f64,
    pub passed: Option<bool>,
}

pub fn complexity_rows(
    dims: &[usize],
    epsilons: &[f64],
    params: &CloseApproxParams,
    trials: usize,
    rng: &RngStream,
) -> Result<Vec<ComplexityRow>> {
    let mut rows = Vec::new();
    let mut cell = 0u64;
    for &d in dims {
        for &epsilon in epsilons {
            let r = close_approx_audit(
                d,
                epsilon,
                params,
                SampleSize::AtBound,
                trials,
                &rng.substream(cell),
            )?;
            cell += 1;
            rows.push(ComplexityRow {
                d,
                epsilon,
                rho: params.rho,
                eta: params.eta,
                gap: params.gap,
                n: r.n,
                n_star: r.n_star,
                realized_gap: r.realized_gap,
                trials,
                success_rate: r.success_rate,
                standard_error: r.standard_error,
                passed: r.passed,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowRankRow {
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub lambda_next: f64,
    pub violations: usize,
    pub median_excess: f64,
    pub median_noise_norm: f64,
    /// Slope, intercept and R² of median excess on `d ln d`, for this `ε`.
    pub fit_slope: f64,
    pub fit_intercept: f64,
    pub fit_r_squared: f64,
}

pub fn low_rank_rows(
    dims: &[usize],
    n: usize,
    k: usize,
    epsilons: &[f64],
    trials: usize,
    rng: &RngStream,
) -> Result<Vec<LowRankRow>> {
    let mut rows = Vec::new();
    for (i, &epsilon) in epsilons.iter().enumerate() {
        let sweep = low_rank_sweep(
            dims,
            k,
            epsilon,
            trials,
            &rng.substream(i as u64),
            |d, r| synthetic_dataset(&gapped_spectrum(d, k)?, n, r, true),
        )?;
        let LinearFit {
            slope,
            intercept,
            r_squared,
        } = sweep.fit;
        rows.extend(sweep.reports.into_iter().map(|r| LowRankRow {
            d: r.d,
            n: r.n,
            k,
            epsilon,
            trials,
            lambda_next: r.lambda_next,
            violations: r.violations,
            median_excess: r.median_excess,
            median_noise_norm: r.median_noise_norm,
            fit_slope: slope,
            fit_intercept: intercept,
            fit_r_squared: r_squared,
        }));
    }
    Ok(rows)
}

/// Adds the log-log slopes of each `ε` group to noise-scaling rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseScalingCsvRow {
    pub d: usize,
    pub n: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub median_wishart_norm: f64,
    pub median_laplace_norm: f64,
    pub wishart_slope: f64,
    pub laplace_slope: f64,
}

pub fn with_slopes(rows: Vec<NoiseScalingRow>) -> Vec<NoiseScalingCsvRow> {
    let slope = |eps: f64, pick: fn(&NoiseScalingRow) -> f64| {
        let group: Vec<&NoiseScalingRow> = rows.iter().filter(|r| r.epsilon == eps).collect();
        if group.len() < 2 {
            return f64::NAN;
        }
        let ds: Vec<f64> = group.iter().map(|r| (r.d as f64).ln()).collect();
        let ys: Vec<f64> = group.iter().map(|r| pick(r).ln()).collect();
        linear_fit(&ds, &ys).slope
    };
    rows.iter()
        .map(|r| NoiseScalingCsvRow {
            d: r.d,
            n: r.n,
            epsilon: r.epsilon,
            trials: r.trials,
            median_wishart_norm: r.median_wishart_norm,
            median_laplace_norm: r.median_laplace_norm,
            wishart_slope: slope(r.epsilon, |r| r.median_wishart_norm),
            laplace_slope: slope(r.epsilon, |r| r.median_laplace_norm),
        })
        .collect()
}

pub fn write_csv<T: Serialize>(rows: &[T], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gapped_spectrum_fits_in_ball() {
        for d in [2, 6, 128] {
            for k in [1, d / 2, d - 1] {
                let s = gapped_spectrum(d, k).unwrap();
                assert!(s.iter().sum::<f64>() <= 0.9 + 1e-12);
                assert!(s[k - 1] > s[k]);
            }
        }
        assert!(gapped_spectrum(4, 4).is_err());
    }

    #[test]
    fn noise_rows_are_reproducible() {
        let rng = RngStream::new(11, 0);
        let a = noise_scaling_rows(&[4, 8], 100, &[1.0], 20, &rng).unwrap();
        let b = noise_scaling_rows(&[4, 8], 100, &[1.0], 20, &rng).unwrap();
        assert_eq!(a, b);
        assert!(a[1].median_wishart_norm > a[0].median_wishart_norm);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let rows =
            with_slopes(noise_scaling_rows(&[2, 4], 50, &[1.0], 5, &RngStream::new(0, 0)).unwrap());
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "d,n,epsilon,trials,median_wishart_norm,median_laplace_norm,wishart_slope,laplace_slope"
        );
        assert_eq!(lines.count(), 2);
    }
}
