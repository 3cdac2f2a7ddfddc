use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use ssa_lab::estimate::{esprit_ls_matrix, esprit_tls_matrix, MusicEstimator};
use ssa_lab::forecast::forward_backward_root_pair;
use ssa_lab::linalg::{orthonormality_deviation, orthonormalize, spectral_norm};
use ssa_lab::poles::max_matching_distance;
use ssa_lab::ssa::{center, decompose_leading, group_matrix, hankelize};
use ssa_lab::{
    decompose, embed, min_norm_lrf, projector, reconstruct, signal_basis, subspace_distance, DecompositionMethod,
    Direction, SubspaceBasis, TimeSeries,
};

fn series_and_window() -> impl Strategy<Value = (Vec<f64>, usize)> {
    (4usize..60)
        .prop_flat_map(|n| (prop::collection::vec(-10.0f64..10.0, n), 2..n))
        .prop_filter("nonzero series", |(v, _)| v.iter().any(|x| x.abs() > 1e-3))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, rows * cols).prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

/// A random orthonormal `l x r` basis, `1 <= r < l`.
fn basis() -> impl Strategy<Value = SubspaceBasis> {
    (3usize..12)
        .prop_flat_map(|l| (Just(l), 1..l))
        .prop_flat_map(|(l, r)| matrix(l, r))
        .prop_filter_map("full column rank", |m| SubspaceBasis::spanning(&m).ok())
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn trajectory_matrix_is_hankel((v, l) in series_and_window()) {
        let x = embed(&TimeSeries::new(v.clone()).unwrap(), l).unwrap();
        let m = x.matrix();
        prop_assert_eq!(m.shape(), (l, v.len() - l + 1));
        for j in 0..m.ncols() {
            for i in 0..l {
                prop_assert_eq!(m[(i, j)], v[i + j]);
            }
        }
        prop_assert!(max_abs(&hankelize(m), &v) <= 1e-13);
    }

    #[test]
    fn decomposition_reassembles((v, l) in series_and_window()) {
        let x = embed(&TimeSeries::new(v).unwrap(), l).unwrap();
        let ets = decompose(&x).unwrap();
        let s = ets.sigmas();
        prop_assert!(s.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(orthonormality_deviation(ets.u()) < 1e-10);
        prop_assert!(orthonormality_deviation(ets.v()) < 1e-10);
        let all: Vec<usize> = (0..ets.len()).collect();
        let back = group_matrix(&ets, &all).unwrap();
        prop_assert!((back - x.matrix()).norm() <= 1e-10 * x.matrix().norm());
    }

    #[test]
    fn elementary_reconstructions_sum_to_series((v, l) in series_and_window()) {
        let series = TimeSeries::new(v.clone()).unwrap();
        let ets = decompose(&embed(&series, l).unwrap()).unwrap();
        let mut total = vec![0.0; v.len()];
        for i in 0..ets.len() {
            for (t, x) in total.iter_mut().zip(hankelize(&group_matrix(&ets, &[i]).unwrap())) {
                *t += x;
            }
        }
        let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        prop_assert!(max_abs(&total, &v) <= 1e-9 * scale);
    }

    #[test]
    fn leading_triples_match_full_decomposition((v, l) in series_and_window()) {
        let series = TimeSeries::new(v.clone()).unwrap();
        let full = decompose(&embed(&series, l).unwrap()).unwrap();
        let r = 1;
        let lead = decompose_leading(&v, l, r).unwrap();
        // only compare a well-separated leading value
        prop_assume!(full.sigmas().len() < 2 || full.sigmas()[1] < 0.9 * full.sigmas()[0]);
        prop_assert!((lead.sigmas()[0] - full.sigmas()[0]).abs() <= 1e-8 * full.sigmas()[0]);
    }

    #[test]
    fn projector_properties(b in basis()) {
        let p = projector(&b).unwrap();
        let m = p.matrix();
        prop_assert!((m - m.transpose()).amax() <= 1e-10);
        prop_assert!((m * m - m).amax() <= 1e-8);
        prop_assert!((p.trace() - b.rank() as f64).abs() <= 1e-8);
        let q = p.complement();
        prop_assert!((q.matrix() * m).amax() <= 1e-8);
    }

    #[test]
    fn subspace_distance_bounds(b in basis(), seed in matrix(12, 11)) {
        let (l, r) = (b.dim(), b.rank());
        let other = SubspaceBasis::spanning(&seed.view((0, 0), (l, r)).into_owned());
        prop_assume!(other.is_ok());
        let other = other.unwrap();
        let d = subspace_distance(&b, &other).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((d - subspace_distance(&other, &b).unwrap()).abs() <= 1e-10);
        prop_assert!(subspace_distance(&b, &b).unwrap() <= 1e-12);
        // agrees with the explicit projector difference
        let diff = projector(&b).unwrap().matrix() - projector(&other).unwrap().matrix();
        prop_assert!((d - spectral_norm(&diff)).abs() <= 1e-8);
    }

    #[test]
    fn esprit_is_basis_invariant(b in basis(), p in matrix(11, 11), q in matrix(11, 11)) {
        let r = b.rank();
        prop_assume!(b.dim() >= r + 2);
        let p = p.view((0, 0), (r, r)).into_owned() + DMatrix::identity(r, r) * 2.0;
        let q = orthonormalize(q.view((0, 0), (r, r)).into_owned() + DMatrix::identity(r, r));
        prop_assume!(orthonormality_deviation(&q) < 1e-12);
        let ls = esprit_ls_matrix(b.matrix());
        let tls = esprit_tls_matrix(b.matrix());
        prop_assume!(ls.is_ok() && tls.is_ok());
        let ls = ls.unwrap().eigenvalues().unwrap();
        let tls = tls.unwrap().eigenvalues().unwrap();
        let scale = ls.iter().chain(&tls).fold(1.0f64, |m, z| m.max(z.norm()));
        let ls2 = esprit_ls_matrix(&(b.matrix() * p)).unwrap().eigenvalues().unwrap();
        let tls2 = esprit_tls_matrix(&(b.matrix() * q)).unwrap().eigenvalues().unwrap();
        prop_assert!(max_matching_distance(&ls, &ls2) <= 1e-6 * scale);
        prop_assert!(max_matching_distance(&tls, &tls2) <= 1e-6 * scale);
    }

    #[test]
    fn music_alignment_is_a_squared_cosine(b in basis(), omega in 0.0f64..0.5) {
        let f = MusicEstimator::new(b.matrix()).unwrap().alignment(omega);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f), "f = {}", f);
    }

    #[test]
    fn centering_removes_the_mean(v in prop::collection::vec(-100.0f64..100.0, 3..50)) {
        let (c, mean) = center(&TimeSeries::new(v.clone()).unwrap());
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(c.mean().abs() <= 1e-12 * scale.max(1.0));
        prop_assert!(max_abs(&c.iter().map(|x| x + mean).collect::<Vec<_>>(), &v) <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn min_norm_verticality_is_below_one((v, l) in series_and_window()) {
        prop_assume!(l >= 3);
        let ets = decompose(&embed(&TimeSeries::new(v).unwrap(), l).unwrap()).unwrap();
        if let Ok(lrf) = signal_basis(&ets, 1).and_then(|b| min_norm_lrf(&b, Direction::Forward)) {
            prop_assert!((0.0..1.0).contains(&lrf.nu2()));
            prop_assert!(lrf.coeffs().iter().all(|c| c.is_finite()));
            prop_assert_eq!(lrf.order(), l - 1);
        }
    }

    #[test]
    fn root_pair_map_is_an_involution(re in -5.0f64..5.0, im in -5.0f64..5.0) {
        let z = Complex64::new(re, im);
        prop_assume!(z.norm() > 1e-3);
        let back = forward_backward_root_pair(forward_backward_root_pair(z).unwrap()).unwrap();
        prop_assert!((back - z).norm() <= 1e-12 * z.norm());
    }

    #[test]
    fn rank_r_series_reconstruct_exactly(
        freq in 0.03f64..0.47,
        base in 0.97f64..1.03,
        phase in 0.0f64..6.0,
        n in 20usize..120,
        frac in 0.2f64..0.8,
    ) {
        let v: Vec<f64> = (0..n).map(|i| base.powi(i as i32) * (std::f64::consts::TAU * freq * i as f64 + phase).cos()).collect();
        let l = ((n as f64 * frac) as usize).clamp(3, n - 3);
        let rec = reconstruct(&TimeSeries::new(v.clone()).unwrap(), l, &[0, 1], DecompositionMethod::Basic).unwrap();
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(max_abs(&rec, &v) <= 1e-8 * scale);
    }
}
