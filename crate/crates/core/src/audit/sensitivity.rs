//! Sensitivity audits: the nuclear norm of `Δ` (which calibrates the Wishart
//! mechanism) and the ℓ₁ sensitivity of the covariance map (which calibrates
//! the Laplace mechanism).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adjacent::{delta_matrix, sample_adjacent_pair, PairRegime};
use crate::error::{Error, Result};
use crate::matrix::{eigenvalues_sym, SymmetricMatrix};
use crate::mechanisms::CovarianceScaling;
use crate::sampling::RngStream;

/// Proven bound on `n‖Δ‖*`.
pub const NUCLEAR_BOUND: f64 = 3.0;
pub const NUCLEAR_TOLERANCE: f64 = 1e-9;
/// Third singular value of `nΔ` above which rank ≤ 2 is considered violated.
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuclearSensitivityReport {
    pub d: usize,
    pub n: usize,
    pub trials: usize,
    /// `max n‖Δ‖*`.
    pub max_scaled_nuclear: f64,
    /// `max n|tr Δ|`, at most 1.
    pub max_scaled_abs_trace: f64,
    /// Largest third singular value of `nΔ` seen.
    pub max_third_singular_value: f64,
    pub bound: f64,
    pub passed: bool,
}

struct Singulars {
    nuclear: f64,
    third: f64,
}

fn singulars(m: &SymmetricMatrix) -> Result<Singulars> {
    let mut s: Vec<f64> = eigenvalues_sym(m)?.into_iter().map(f64::abs).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(Singulars {
        nuclear: s.iter().sum(),
        third: s.get(2).copied().unwrap_or(0.0),
    })
}

/// Maximum of `n‖Δ‖*` over random adjacent pairs; trial `t` uses
/// `rng.substream(t)` and regime [`PairRegime::for_trial`].
pub fn nuclear_sensitivity_check(
    trials: usize,
    d: usize,
    n: usize,
    rng: &RngStream,
) -> Result<NuclearSensitivityReport> {
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let per_trial = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut r = rng.substream(t);
            let pair = sample_adjacent_pair(d, n, PairRegime::for_trial(t), &mut r)?;
            let scaled = delta_matrix(&pair, CovarianceScaling::Gram);
            let s = singulars(&scaled)?;
            Ok((s.nuclear, scaled.trace().abs(), s.third))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_scaled_nuclear = per_trial.iter().map(|x| x.0).fold(0.0, f64::max);
    let max_scaled_abs_trace = per_trial.iter().map(|x| x.1).fold(0.0, f64::max);
    let max_third_singular_value = per_trial.iter().map(|x| x.2).fold(0.0, f64::max);
    Ok(NuclearSensitivityReport {
        d,
        n,
        trials,
        max_scaled_nuclear,
        max_scaled_abs_trace,
        max_third_singular_value,
        bound: NUCLEAR_BOUND,
        passed: max_scaled_nuclear <= NUCLEAR_BOUND + NUCLEAR_TOLERANCE
            && max_scaled_abs_trace <= 1.0 + NUCLEAR_TOLERANCE
            && max_third_singular_value <= RANK_TOLERANCE,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuclearGridReport {
    pub resolution: f64,
    pub evaluations: usize,
    pub max_scaled_nuclear: f64,
    pub v: [f64; 2],
    pub v_hat: [f64; 2],
}

/// Exhaustive `d = 2` search of `‖v vᵀ − v̂ v̂ᵀ‖*`.
///
/// The nuclear norm is invariant under a common rotation of `v` and `v̂`, so
/// `v` ranges over `(r, 0)` with `r` on the grid while `v̂` ranges over every
/// point of the square grid of spacing `resolution` inside the unit disk.
/// Membership in the disk is decided in integer arithmetic.
pub fn nuclear_sensitivity_grid(resolution: f64) -> Result<NuclearGridReport> {
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::param(
            "grid resolution",
            format!("must be in (0, 1], got {resolution}"),
        ));
    }
    let m = (1.0 / resolution).round() as i64;
    let mf = m as f64;
    let best = (0..=m)
        .into_par_iter()
        .map(|ri| {
            let v = [ri as f64 / mf, 0.0];
            let mut best = (f64::NEG_INFINITY, v, [0.0; 2], 0usize);
            for a in -m..=m {
                for b in -m..=m {
                    if a * a + b * b > m * m {
                        continue;
                    }
                    let w = [a as f64 / mf, b as f64 / mf];
                    let delta = SymmetricMatrix::from_fn(2, |i, j| v[i] * v[j] - w[i] * w[j])?;
                    let nuc = singulars(&delta)?.nuclear;
                    best.3 += 1;
                    if nuc > best.0 {
                        best = (nuc, v, w, best.3);
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    let evaluations = best.iter().map(|b| b.3).sum();
    let top = best
        .into_iter()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .expect("non-empty grid");
    Ok(NuclearGridReport {
        resolution,
        evaluations,
        max_scaled_nuclear: top.0,
        v: top.1,
        v_hat: top.2,
    })
}

/// `Σ_{i,j} |p_i p_j − q_i q_j|`.
pub fn l1_objective(p: &[f64], q: &[f64]) -> f64 {
    let d = p.len();
    let mut sum = 0.0;
    for i in 0..d {
        sum += (p[i] * p[i] - q[i] * q[i]).abs();
        for j in (i + 1)..d {
            sum += 2.0 * (p[i] * p[j] - q[i] * q[j]).abs();
        }
    }
    sum
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L1Bracket {
    pub d: usize,
    pub n: usize,
    pub resolution: f64,
    /// `d/n`.
    pub lower_bound: f64,
    /// `2d/n`.
    pub upper_bound: f64,
    /// Objective at `p = 1/√d · 1`, `q = 0`, divided by `n`.
    pub construction_value: f64,
    /// `construction_value ≥ d/n` up to a few ulps; the rounded `1/√d` can
    /// land a hair below.
    pub construction_attains_lower: bool,
    /// Best grid value divided by `n`.
    pub estimate: f64,
    pub maximizer_p: Vec<f64>,
    pub maximizer_q: Vec<f64>,
    pub evaluations: usize,
    /// `lower_bound < estimate < upper_bound`.
    pub within_bracket: bool,
}

fn angle_grid(upper: f64, step: f64, include_upper: bool) -> Vec<f64> {
    let count = (upper / step).floor() as usize;
    let mut out: Vec<f64> = (0..=count).map(|k| k as f64 * step).collect();
    if let Some(&last) = out.last() {
        if last >= upper {
            out.pop();
        }
    }
    if include_upper {
        out.push(upper);
    }
    out
}

/// Hyperspherical coordinates: `x_1 = cos φ_1`, `x_2 = sin φ_1 cos φ_2`, …,
/// `x_d = sin φ_1 ⋯ sin φ_{d−1}`.
fn sphere_point(angles: &[f64]) -> Vec<f64> {
    let d = angles.len() + 1;
    let mut x = Vec::with_capacity(d);
    let mut sin_prod = 1.0;
    for &phi in angles {
        x.push(sin_prod * phi.cos());
        sin_prod *= phi.sin();
    }
    x.push(sin_prod);
    x
}

fn cartesian(grids: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for g in grids {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                g.iter().map(move |&a| {
                    let mut p = prefix.clone();
                    p.push(a);
                    p
                })
            })
            .collect();
    }
    out
}

/// Grid estimate of the ℓ₁ sensitivity of `X ↦ (1/n) X Xᵀ` for `2 ≤ d ≤ 4`.
///
/// Along a ray `p = t u` every term `|t² a − b|` is convex in `t²`, so the
/// maximum over the ball sits at `‖p‖ ∈ {0, 1}` and likewise for `q`. With
/// one vector zero the objective is `(Σ|p_i|)² ≤ d`, so the search covers
/// unit `p` against unit-or-zero `q`. The objective is unchanged by a common
/// coordinate permutation or sign flip of `p` and `q`, and by `q ↦ −q`, so `p`
/// is restricted to the sorted non-negative orthant and `q` to a hemisphere.
/// Angles are gridded with spacing `resolution`; cost grows like
/// `resolution^{-2(d-1)}`, so `d = 4` needs a coarse grid.
pub fn l1_sensitivity_bracket(d: usize, n: usize, resolution: f64) -> Result<L1Bracket> {
    if !(2..=4).contains(&d) {
        return Err(Error::param(
            "d",
            format!("grid search supports 2 <= d <= 4, got {d}"),
        ));
    }
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    if !(resolution > 0.0 && resolution < 1.0) {
        return Err(Error::param(
            "grid resolution",
            format!("must be in (0, 1), got {resolution}"),
        ));
    }
    use std::f64::consts::{FRAC_PI_2, PI};

    let quarter = angle_grid(FRAC_PI_2, resolution, true);
    let p_points: Vec<Vec<f64>> = cartesian(&vec![quarter; d - 1])
        .iter()
        .map(|a| sphere_point(a))
        .filter(|p| p.windows(2).all(|w| w[0] >= w[1] - 1e-15))
        .collect();

    let mut q_grids = vec![angle_grid(PI, resolution, true); d - 2];
    q_grids.push(angle_grid(PI, resolution, false));
    let mut q_points: Vec<Vec<f64>> = cartesian(&q_grids)
        .iter()
        .map(|a| sphere_point(a))
        .collect();
    q_points.push(vec![0.0; d]);

    let (best, p_best, q_best) = p_points
        .par_iter()
        .map(|p| {
            let mut best = (f64::NEG_INFINITY, 0usize);
            for (k, q) in q_points.iter().enumerate() {
                let v = l1_objective(p, q);
                if v > best.0 {
                    best = (v, k);
                }
            }
            (best.0, p.clone(), q_points[best.1].clone())
        })
        .reduce(
            || (f64::NEG_INFINITY, Vec::new(), Vec::new()),
            |a, b| if b.0 > a.0 { b } else { a },
        );

    let nf = n as f64;
    let uniform = vec![1.0 / (d as f64).sqrt(); d];
    let construction_value = l1_objective(&uniform, &vec![0.0; d]) / nf;
    let lower_bound = d as f64 / nf;
    let upper_bound = 2.0 * d as f64 / nf;
    let estimate = best / nf;
    Ok(L1Bracket {
        d,
        n,
        resolution,
        lower_bound,
        upper_bound,
        construction_value,
        construction_attains_lower: construction_value >= lower_bound * (1.0 - 4.0 * f64::EPSILON),
        estimate,
        maximizer_p: p_best,
        maximizer_q: q_best,
        evaluations: p_points.len() * q_points.len(),
        within_bracket: lower_bound < estimate && estimate < upper_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::nuclear_norm;

    #[test]
    fn orthogonal_basis_pair_has_nuclear_two() {
        let delta = SymmetricMatrix::from_diagonal(&[1.0, -1.0]).unwrap();
        assert_eq!(nuclear_norm(&delta).unwrap(), 2.0);
        let one_zero = SymmetricMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        assert_eq!(nuclear_norm(&one_zero).unwrap(), 1.0);
    }

    #[test]
    fn l1_objective_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((l1_objective(&[h, h], &[0.0, 0.0]) - 2.0).abs() < 1e-15);
        assert_eq!(l1_objective(&[0.3, 0.4], &[0.3, 0.4]), 0.0);
        // p = (1,1)/√2, q = (1,-1)/√2: pp' − qq' = [[0,1],[1,0]]
        assert!((l1_objective(&[h, h], &[h, -h]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_points_are_unit() {
        for a in cartesian(&[vec![0.3, 1.2], vec![2.0, 5.0], vec![0.1]]) {
            let p = sphere_point(&a);
            assert_eq!(p.len(), 4);
            assert!((p.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn angle_grid_endpoints() {
        let g = angle_grid(1.0, 0.25, true);
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = angle_grid(1.0, 0.25, false);
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75]);
    }

    #[test]
    fn small_nuclear_check_passes() {
        let r = nuclear_sensitivity_check(400, 3, 5, &RngStream::new(1, 0)).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.max_scaled_nuclear > 1.0);
    }

    #[test]
    fn l1_bracket_rejects_bad_input() {
        assert!(l1_sensitivity_bracket(1, 1, 0.1).is_err());
        assert!(l1_sensitivity_bracket(5, 1, 0.1).is_err());
        assert!(l1_sensitivity_bracket(2, 0, 0.1).is_err());
        assert!(l1_sensitivity_bracket(2, 1, 0.0).is_err());
    }
}
