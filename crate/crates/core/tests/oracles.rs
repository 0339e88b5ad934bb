//! Library results checked against independent computations.

use wishart_dp::audit::{
    delta_matrix, l1_objective, l1_sensitivity_bracket, nuclear_sensitivity_grid, AdjacentPair,
};
use wishart_dp::matrix::{
    eig_sym, eigenvalues_sym, frobenius_norm, l11_norm, nuclear_norm, rank_k_truncation,
    spectral_norm,
};
use wishart_dp::mechanisms::covariance;
use wishart_dp::utility::{projector_distance, random_orthogonal, top_k_subspace};
use wishart_dp::{CovarianceScaling, DataMatrix, RngStream, SymmetricMatrix};

use rand::Rng;

fn random_symmetric(d: usize, rng: &mut RngStream) -> SymmetricMatrix {
    SymmetricMatrix::from_fn(d, |_, _| rng.random_range(-1.0..1.0)).unwrap()
}

/// Roots of the characteristic polynomial, descending. Closed forms for
/// d = 1, 2 and the trigonometric cubic solution for d = 3.
fn char_poly_roots(a: &SymmetricMatrix) -> Vec<f64> {
    let g = |i, j| a.get(i, j);
    let mut r = match a.dim() {
        1 => vec![g(0, 0)],
        2 => {
            let m = 0.5 * (g(0, 0) + g(1, 1));
            let h = (0.25 * (g(0, 0) - g(1, 1)).powi(2) + g(0, 1).powi(2)).sqrt();
            vec![m + h, m - h]
        }
        3 => {
            let p1 = g(0, 1).powi(2) + g(0, 2).powi(2) + g(1, 2).powi(2);
            let q = (g(0, 0) + g(1, 1) + g(2, 2)) / 3.0;
            let p2 =
                (g(0, 0) - q).powi(2) + (g(1, 1) - q).powi(2) + (g(2, 2) - q).powi(2) + 2.0 * p1;
            let p = (p2 / 6.0).sqrt();
            if p == 0.0 {
                return vec![q; 3];
            }
            let b = |i: usize, j: usize| (g(i, j) - if i == j { q } else { 0.0 }) / p;
            let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
                - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
                + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
            let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
            let l1 = q + 2.0 * p * phi.cos();
            let l3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
            vec![l1, 3.0 * q - l1 - l3, l3]
        }
        _ => unreachable!(),
    };
    r.sort_by(|x, y| y.total_cmp(x));
    r
}

#[test]
fn eigenvalues_match_characteristic_polynomial() {
    let mut rng = RngStream::new(101, 0);
    for trial in 0..600 {
        let d = 1 + trial % 3;
        let a = random_symmetric(d, &mut rng);
        let got = eigenvalues_sym(&a).unwrap();
        let want = char_poly_roots(&a);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-8, "d = {d}: {got:?} vs {want:?}");
        }
    }
}

fn power_iteration(a: &SymmetricMatrix, iters: usize) -> f64 {
    let d = a.dim();
    let mut x: Vec<f64> = (0..d).map(|i| 1.0 + 0.01 * i as f64).collect();
    let mut lambda = 0.0;
    for _ in 0..iters {
        let y = a.mul_vec(&x);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        lambda = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>()
            / x.iter().map(|v| v * v).sum::<f64>();
        x = y.into_iter().map(|v| v / norm).collect();
    }
    lambda
}

#[test]
fn top_eigenvalue_matches_power_iteration() {
    let mut rng = RngStream::new(102, 0);
    for d in [4, 9, 20] {
        // PSD with a dominant eigenvalue so power iteration converges fast
        let b = random_symmetric(d, &mut rng);
        let a = b
            .scale(0.1)
            .add(&SymmetricMatrix::outer(&vec![1.0; d]).unwrap())
            .unwrap();
        let top = eigenvalues_sym(&a).unwrap()[0];
        assert!((top - power_iteration(&a, 500)).abs() < 1e-9 * top.abs().max(1.0));
    }
}

#[test]
fn covariance_matches_brute_force_sum() {
    let mut rng = RngStream::new(103, 0);
    for t in 0..100 {
        let d = 1 + t % 7;
        let n = 1 + (t * 13) % 40;
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
                v.into_iter().map(|x| x / norm).collect()
            })
            .collect();
        let x = DataMatrix::from_columns(&cols).unwrap();
        for scaling in [CovarianceScaling::Mean, CovarianceScaling::Gram] {
            let got = covariance(&x, scaling);
            let f = if scaling == CovarianceScaling::Mean {
                1.0 / n as f64
            } else {
                1.0
            };
            for i in 0..d {
                for j in 0..d {
                    let mut s = 0.0;
                    for c in &cols {
                        s += c[i] * c[j];
                    }
                    assert!((got.get(i, j) - f * s).abs() < 1e-12);
                }
            }
        }
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

#[test]
fn truncation_is_best_eigenpair_subset() {
    let mut rng = RngStream::new(104, 0);
    for _ in 0..30 {
        let d = 5;
        let b = random_symmetric(d, &mut rng);
        let a = SymmetricMatrix::from_fn(d, |i, j| (0..d).map(|l| b.get(i, l) * b.get(j, l)).sum())
            .unwrap();
        let e = eig_sym(&a).unwrap();
        for k in 1..d {
            let best = spectral_norm(&a.sub(&rank_k_truncation(&e, k).unwrap()).unwrap()).unwrap();
            assert!((best - e.eigenvalues()[k]).abs() < 1e-10);
            for s in subsets(d, k) {
                let approx = SymmetricMatrix::from_fn(d, |i, j| {
                    s.iter()
                        .map(|&l| {
                            e.eigenvalues()[l]
                                * e.eigenvectors().get(i, l)
                                * e.eigenvectors().get(j, l)
                        })
                        .sum()
                })
                .unwrap();
                let err = spectral_norm(&a.sub(&approx).unwrap()).unwrap();
                assert!(best <= err + 1e-10);
            }
        }
    }
}

#[test]
fn norms_match_definitions() {
    let mut rng = RngStream::new(105, 0);
    for d in 1..8 {
        let a = random_symmetric(d, &mut rng);
        let l11: f64 = a.rows().iter().flatten().map(|v| v.abs()).sum();
        let fro: f64 = a.rows().iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        assert!((l11_norm(&a) - l11).abs() < 1e-12);
        assert!((frobenius_norm(&a) - fro).abs() < 1e-12);
        // Frobenius is also the ℓ₂ norm of the spectrum
        let lam = eigenvalues_sym(&a).unwrap();
        assert!((lam.iter().map(|l| l * l).sum::<f64>().sqrt() - fro).abs() < 1e-10);
        assert!(
            (nuclear_norm(&a).unwrap() - lam.iter().map(|l| l.abs()).sum::<f64>()).abs() < 1e-12
        );
    }
}

#[test]
fn projector_distance_matches_entrywise_sum() {
    let mut rng = RngStream::new(106, 0);
    for _ in 0..20 {
        let q1 = random_orthogonal(5, &mut rng);
        let q2 = random_orthogonal(5, &mut rng);
        let values: Vec<f64> = vec![5.0, 4.0, 3.0, 2.0, 1.0];
        let rot = |q: &wishart_dp::Matrix| {
            SymmetricMatrix::from_fn(5, |i, j| {
                (0..5).map(|l| values[l] * q.get(i, l) * q.get(j, l)).sum()
            })
            .unwrap()
        };
        let p = top_k_subspace(&rot(&q1), 2).unwrap();
        let r = top_k_subspace(&rot(&q2), 2).unwrap();
        let mut s = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                let pij: f64 = (0..2).map(|l| q1.get(i, l) * q1.get(j, l)).sum();
                let rij: f64 = (0..2).map(|l| q2.get(i, l) * q2.get(j, l)).sum();
                s += (pij - rij).powi(2);
            }
        }
        let dist = projector_distance(&p, &r).unwrap();
        assert!((dist.frobenius - s.sqrt()).abs() < 1e-10);
        assert!(dist.frobenius >= dist.spectral - 1e-12);
        // √(2k) with k = 2
        assert!(dist.frobenius <= 2.0 + 1e-12);
        let back = projector_distance(&r, &p).unwrap();
        assert_eq!(dist, back);
    }
}

/// Singular values of `vvᵀ − wwᵀ` in closed form: with `a = ‖v‖²`,
/// `b = ‖w‖²`, `c = v·w`, the nuclear norm is `√((a + b)² − 4c²)`.
fn nuclear_closed_form(v: &[f64], w: &[f64]) -> f64 {
    let a: f64 = v.iter().map(|x| x * x).sum();
    let b: f64 = w.iter().map(|x| x * x).sum();
    let c: f64 = v.iter().zip(w).map(|(x, y)| x * y).sum();
    ((a + b).powi(2) - 4.0 * c * c).max(0.0).sqrt()
}

#[test]
fn delta_nuclear_norm_matches_closed_form() {
    let mut rng = RngStream::new(107, 0);
    for _ in 0..300 {
        let d = 2 + rng.random_range(0..6);
        let base_cols: Vec<Vec<f64>> = (0..4)
            .map(|_| wishart_dp::audit::random_ball_vector(d, &mut rng))
            .collect();
        let w = wishart_dp::audit::random_ball_vector(d, &mut rng);
        let pair = AdjacentPair::new(DataMatrix::from_columns(&base_cols).unwrap(), 1, &w).unwrap();
        let got = nuclear_norm(&delta_matrix(&pair, CovarianceScaling::Gram)).unwrap();
        assert!((got - nuclear_closed_form(pair.v(), &w)).abs() < 1e-10);
    }
}

#[test]
fn nuclear_grid_reaches_orthogonal_unit_pair() {
    let g = nuclear_sensitivity_grid(0.05).unwrap();
    // √((1 + 1)² − 0) = 2 at orthogonal unit vectors, which the grid contains
    assert!((g.max_scaled_nuclear - 2.0).abs() < 1e-12);
    assert!((nuclear_closed_form(&g.v, &g.v_hat) - g.max_scaled_nuclear).abs() < 1e-12);
}

#[test]
fn l1_grid_is_below_random_search_ceiling() {
    // random search over the ball can never beat the true supremum; the grid
    // should come within its discretization error of the best random value
    let mut rng = RngStream::new(108, 0);
    for d in [2usize, 3] {
        let mut best: f64 = 0.0;
        for _ in 0..200_000 {
            let p = wishart_dp::audit::random_unit_vector(d, &mut rng);
            let q = wishart_dp::audit::random_unit_vector(d, &mut rng);
            best = best.max(l1_objective(&p, &q));
        }
        let grid = l1_sensitivity_bracket(d, 1, 0.02).unwrap();
        assert!(
            grid.estimate >= best - 0.01,
            "d = {d}: grid {} vs random {best}",
            grid.estimate
        );
        let exact = [0.0, 0.0, 8f64.sqrt(), 17f64.sqrt()][d];
        assert!(grid.estimate <= exact + 1e-12 && best <= exact + 1e-12);
    }
}
