#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;

use wishart_dp::audit::{delta_matrix, density_log_ratio, AdjacentPair};
use wishart_dp::matrix::{
    eig_sym, eigenvalues_sym, format_matrix_text, frobenius_norm, l11_norm, nuclear_norm,
    parse_matrix_text, spectral_norm,
};
use wishart_dp::mechanisms::{covariance, laplace_perturb, wishart_perturb};
use wishart_dp::utility::{projector_distance, top_k_subspace};
use wishart_dp::{CovarianceScaling, DataMatrix, PrivacyBudget, RngStream, SymmetricMatrix};

fn symmetric(max_d: usize) -> impl Strategy<Value = SymmetricMatrix> {
    (1..=max_d).prop_flat_map(|d| {
        prop::collection::vec(-10.0f64..10.0, d * (d + 1) / 2)
            .prop_map(move |upper| SymmetricMatrix::from_upper_triangle(d, upper).unwrap())
    })
}

fn pair_of_symmetric(max_d: usize) -> impl Strategy<Value = (SymmetricMatrix, SymmetricMatrix)> {
    (1..=max_d).prop_flat_map(|d| {
        let n = d * (d + 1) / 2;
        (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(-5.0f64..5.0, n),
        )
            .prop_map(move |(a, b)| {
                (
                    SymmetricMatrix::from_upper_triangle(d, a).unwrap(),
                    SymmetricMatrix::from_upper_triangle(d, b).unwrap(),
                )
            })
    })
}

fn dataset(max_d: usize, max_n: usize) -> impl Strategy<Value = DataMatrix> {
    (1..=max_d, 1..=max_n).prop_flat_map(|(d, n)| {
        prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), n).prop_map(|cols| {
            let cols: Vec<Vec<f64>> = cols
                .into_iter()
                .map(|c| {
                    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
                    c.into_iter().map(|x| x / norm).collect()
                })
                .collect();
            DataMatrix::from_columns(&cols).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn norm_ordering(a in symmetric(8)) {
        let s = spectral_norm(&a).unwrap();
        let f = frobenius_norm(&a);
        let nuc = nuclear_norm(&a).unwrap();
        let r = a.dim() as f64;
        let tol = 1e-9 * (1.0 + l11_norm(&a));
        prop_assert!(s <= f + tol);
        prop_assert!(f <= nuc + tol);
        prop_assert!(nuc <= r.sqrt() * f + tol);
        prop_assert!(nuc <= l11_norm(&a) + tol);
    }

    #[test]
    fn eigendecomposition_reconstructs(a in symmetric(10)) {
        let e = eig_sym(&a).unwrap();
        let scale = 1.0 + frobenius_norm(&a);
        prop_assert!(e.reconstruction_residual(&a) <= 1e-10 * scale);
        prop_assert!(e.orthogonality_residual() <= 1e-10);
        prop_assert!(e.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn weyl_sandwich((a, w) in pair_of_symmetric(7)) {
        let la = eigenvalues_sym(&a).unwrap();
        let lw = eigenvalues_sym(&w).unwrap();
        let ls = eigenvalues_sym(&a.add(&w).unwrap()).unwrap();
        let tol = 1e-9 * (1.0 + frobenius_norm(&a) + frobenius_norm(&w));
        let (wmax, wmin) = (lw[0], lw[lw.len() - 1]);
        for i in 0..la.len() {
            prop_assert!(la[i] + wmin - tol <= ls[i] && ls[i] <= la[i] + wmax + tol);
        }
    }

    #[test]
    fn projector_distance_is_symmetric((a, b) in pair_of_symmetric(6), k in 1usize..6) {
        let k = k.min(a.dim());
        let p = top_k_subspace(&a, k).unwrap();
        let q = top_k_subspace(&b, k).unwrap();
        let pq = projector_distance(&p, &q).unwrap();
        prop_assert_eq!(pq, projector_distance(&q, &p).unwrap());
        prop_assert!(pq.frobenius >= pq.spectral - 1e-12);
        prop_assert!(pq.frobenius <= (2.0 * k as f64).sqrt() + 1e-9);
        prop_assert!(p.idempotence_residual() <= 1e-8);
    }

    #[test]
    fn density_ratio_is_linear_in_delta(
        v in prop::collection::vec(-0.5f64..0.5, 3),
        w in prop::collection::vec(-0.5f64..0.5, 3),
        alpha in 0.0f64..1.0,
        c in 0.05f64..2.0,
    ) {
        let x = DataMatrix::from_columns(&[v, vec![0.1, 0.2, 0.3]]).unwrap();
        let pair = AdjacentPair::new(x, 0, &w).unwrap();
        let delta = delta_matrix(&pair, CovarianceScaling::Mean);
        let w0 = SymmetricMatrix::identity(3).unwrap().scale(5.0);
        let full = density_log_ratio(&w0, &delta, c).unwrap();
        let part = density_log_ratio(&w0, &delta.scale(alpha), c).unwrap();
        prop_assert!((part - alpha * full).abs() <= 1e-12);
    }

    #[test]
    fn delta_has_rank_at_most_two(
        d in 2usize..9,
        seed in any::<u64>(),
    ) {
        let mut rng = RngStream::new(seed, 0);
        let base: Vec<Vec<f64>> = (0..3).map(|_| wishart_dp::audit::random_ball_vector(d, &mut rng)).collect();
        let w = wishart_dp::audit::random_ball_vector(d, &mut rng);
        let pair = AdjacentPair::new(DataMatrix::from_columns(&base).unwrap(), 2, &w).unwrap();
        let mut s: Vec<f64> = eigenvalues_sym(&delta_matrix(&pair, CovarianceScaling::Gram))
            .unwrap()
            .into_iter()
            .map(f64::abs)
            .collect();
        s.sort_by(|a, b| b.total_cmp(a));
        prop_assert!(s.get(2).copied().unwrap_or(0.0) <= 1e-12);
        prop_assert!(s.iter().sum::<f64>() <= 3.0 + 1e-9);
    }

    #[test]
    fn covariance_is_psd_and_bounded(x in dataset(6, 30)) {
        let a = covariance(&x, CovarianceScaling::Mean);
        let lam = eigenvalues_sym(&a).unwrap();
        prop_assert!(lam[lam.len() - 1] >= -1e-12);
        // trace = mean squared norm ≤ 1
        prop_assert!(a.trace() <= 1.0 + 1e-12);
    }

    #[test]
    fn wishart_release_is_psd(x in dataset(6, 20), eps in 0.01f64..10.0, seed in any::<u64>()) {
        let budget = PrivacyBudget::pure(eps).unwrap();
        let p = wishart_perturb(&x, &budget, CovarianceScaling::Mean, &mut RngStream::new(seed, 0)).unwrap();
        prop_assert!(p.report.output_is_psd);
    }

    #[test]
    fn laplace_noise_is_exactly_symmetric(x in dataset(6, 20), seed in any::<u64>()) {
        let budget = PrivacyBudget::pure(1.0).unwrap();
        let p = laplace_perturb(&x, &budget, CovarianceScaling::Mean, &mut RngStream::new(seed, 1)).unwrap();
        let rows = p.noise.rows();
        for i in 0..rows.len() {
            for j in 0..rows.len() {
                prop_assert_eq!(rows[i][j].to_bits(), rows[j][i].to_bits());
            }
        }
    }

    #[test]
    fn matrix_text_round_trips_exactly(a in symmetric(8)) {
        let back = parse_matrix_text(&format_matrix_text(&a)).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn substreams_are_reproducible(seed in any::<u64>(), stream in any::<u64>(), idx in any::<u64>()) {
        use rand::RngCore;
        let base = RngStream::new(seed, stream);
        let mut a = base.substream(idx);
        let mut b = base.substream(idx);
        let mut c = base.substream(idx.wrapping_add(1));
        let xa = a.next_u64();
        prop_assert_eq!(xa, b.next_u64());
        prop_assert_ne!(xa, c.next_u64());
    }
}
