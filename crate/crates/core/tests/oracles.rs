//! Checks against independent computations: closed forms, brute-force grids
//! and distributional moments.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ssa_lab::estimate::{estimate_pseudospectrum, noise_subspace, MusicEstimator};
use ssa_lab::linalg::singular_values;
use ssa_lab::simlab::asymptotic::{d1, d2, d3, variance_factor};
use ssa_lab::simlab::signals::red_noise;
use ssa_lab::simlab::{mc_error_surface, run_experiment, ExperimentConfig, Functional, SignalKind, SignalSpec};
use ssa_lab::ssa::snr;
use ssa_lab::{
    decompose, embed, find_peaks, signal_basis, subspace_distance, EstimationMethod, MinNormEstimator, TimeSeries,
};

fn cos_series(n: usize, periods: &[f64]) -> TimeSeries {
    TimeSeries::from_fn(n, |i| periods.iter().map(|p| (2.0 * PI * i as f64 / p).cos()).sum()).unwrap()
}

#[test]
fn subspace_distance_matches_the_cosine_form() {
    // away from coincidence the sine of the largest principal angle is
    // sqrt(1 - sigma_min(A^T B)^2)
    let a = cos_series(80, &[10.0]);
    let b = TimeSeries::from_fn(80, |i| (2.0 * PI * i as f64 / 9.0).cos() + 0.3 * (i as f64 * 0.7).sin()).unwrap();
    let ba = signal_basis(&decompose(&embed(&a, 20).unwrap()).unwrap(), 2).unwrap();
    let bb = signal_basis(&decompose(&embed(&b, 20).unwrap()).unwrap(), 2).unwrap();
    let s = singular_values(&(ba.matrix().transpose() * bb.matrix())).unwrap();
    let cosine_form = (1.0 - s[1] * s[1]).max(0.0).sqrt();
    assert_relative_eq!(subspace_distance(&ba, &bb).unwrap(), cosine_form, epsilon = 1e-10);
}

#[test]
fn music_vanishes_at_true_frequencies() {
    let x = embed(&cos_series(120, &[10.0]), 40).unwrap();
    let (noise, _) = noise_subspace(&x, 2).unwrap();
    let f = MusicEstimator::new(&noise).unwrap().alignment(0.1);
    assert!(f <= 1e-12, "f(0.1) = {f:e}");
    assert!(MusicEstimator::new(&noise).unwrap().alignment(0.23) > 1e-3);
}

#[test]
fn min_norm_vector_is_orthogonal_to_signal_steering() {
    let x = embed(&cos_series(120, &[10.0]), 40).unwrap();
    let basis = signal_basis(&decompose(&x).unwrap(), 2).unwrap();
    let est = MinNormEstimator::new(&basis).unwrap();
    assert!(est.alignment(0.1) <= 1e-12);
}

#[test]
fn peaks_agree_with_a_dense_grid() {
    let series = cos_series(300, &[19.0, 21.0]);
    let ps = estimate_pseudospectrum(&series, 100, 4, EstimationMethod::Music, 2048).unwrap();
    let peaks = find_peaks(&ps, 2).unwrap();
    // brute force: maximize 1/f on a grid 100x finer around each peak
    let (noise, _) = noise_subspace(&embed(&series, 100).unwrap(), 4).unwrap();
    let music = MusicEstimator::new(&noise).unwrap();
    for (&p, truth) in peaks.iter().zip([1.0 / 21.0, 1.0 / 19.0]) {
        let dense = (0..=2000)
            .map(|k| p - 1e-3 + k as f64 * 1e-6)
            .max_by(|a, b| (1.0 / music.alignment(*a).max(1e-300)).total_cmp(&(1.0 / music.alignment(*b).max(1e-300))))
            .unwrap();
        assert!((p - dense).abs() <= 1e-4, "peak {p} vs dense {dense}");
        assert!((p - truth).abs() <= 1e-3, "peak {p} vs {truth}");
    }
}

#[test]
fn asymptotic_branches_join_continuously() {
    for beta in [0.1, 0.2, 0.3, 0.4, 0.45] {
        let g2 = 2.0 * beta;
        assert_relative_eq!(d2(beta, g2), d3(beta, g2), max_relative = 1e-10);
        let g1 = 2.0 * beta.min(1.0 - 2.0 * beta);
        if beta < 1.0 / 3.0 {
            assert_relative_eq!(d1(beta, g1), d3(beta, g1), max_relative = 1e-10);
        } else {
            assert_relative_eq!(d1(beta, g1), d2(beta, g1), max_relative = 1e-10);
        }
    }
    // symmetric under L <-> K and time reversal
    assert_relative_eq!(variance_factor(0.3, 0.4).unwrap(), variance_factor(0.7, 1.6).unwrap(), max_relative = 1e-12);
    assert_relative_eq!(variance_factor(0.5, 1.0).unwrap(), 4.0 / 3.0, max_relative = 1e-12);
}

#[test]
fn asymptotic_variance_matches_simulation_off_centre() {
    // N = 400, L = 120 (beta = 0.3), a point near the start (gamma = 0.3, branch D1)
    let cfg = ExperimentConfig::from_json(
        r#"{"experiment": "pointwise_variance",
            "signal": {"kind": "custom", "n": 400, "terms": [{"amplitude": 1.0}]},
            "noise": {"sigma": 0.1}, "windows": [120], "reps": 1500, "rank": 1, "index": 60, "seed": 8}"#,
    )
    .unwrap();
    let ssa_lab::simlab::ExperimentOutput::PointwiseVariance { rows } = run_experiment(&cfg).unwrap() else {
        panic!("wrong output kind")
    };
    let row = &rows[0];
    let model = row.asymptotic.unwrap();
    assert!((row.variance / model - 1.0).abs() < 0.2, "empirical {} vs model {model}", row.variance);
}

#[test]
fn red_noise_has_unit_variance_and_lag_one_correlation_alpha() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let eta = red_noise(1_000_000, 0.5, &mut rng);
    let n = eta.len() as f64;
    let mean = eta.iter().sum::<f64>() / n;
    let var = eta.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let lag1 = eta.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / (n - 1.0) / var;
    assert!((var - 1.0).abs() <= 0.01, "variance {var}");
    assert!((lag1 - 0.5).abs() <= 0.01, "lag-1 correlation {lag1}");
}

#[test]
fn perturbed_series_share_one_snr() {
    let kinds =
        [SignalKind::DampedCosConst, SignalKind::DampedCosWn, SignalKind::DampedCosMix, SignalKind::DampedCosRn];
    let snrs: Vec<f64> = kinds
        .iter()
        .map(|&k| {
            let spec = SignalSpec::new(k, 1_000_000);
            snr(&spec.signal(), &spec.residual(5)).unwrap()
        })
        .collect();
    for s in &snrs {
        assert!((s / snrs[0] - 1.0).abs() <= 0.02, "{snrs:?}");
    }
}

#[test]
fn msd_equals_rmse_for_one_replication() {
    let spec = SignalSpec::new(SignalKind::DampedCosWn, 100);
    let s =
        mc_error_surface(&spec, &[20, 50], 1, &[Functional::Reconstruction, Functional::Frequency], None, 3).unwrap();
    for surface in s {
        for (m, r) in surface.msd.iter().zip(&surface.rmse) {
            assert_relative_eq!(m, r, max_relative = 1e-12);
        }
    }
}

#[test]
fn esprit_frequency_and_damping_errors_agree() {
    // equal first-order variances of the frequency and log-modulus estimates
    // with L proportional to N
    let spec = SignalSpec { b: 0.99, ..SignalSpec::new(SignalKind::DampedCosWn, 200) };
    let s = mc_error_surface(&spec, &[100], 1000, &[Functional::Frequency, Functional::Base], None, 17).unwrap();
    let (freq, base) = (s[0].rmse[0], s[1].rmse[0]);
    // the frequency is in cycles; put it on the angular scale of ln|mu|
    let freq = 2.0 * PI * freq;
    assert!((freq / base - 1.0).abs() <= 0.25, "frequency {freq:e} vs damping {base:e}");
}

#[test]
fn toeplitz_trajectory_space_differs_for_growth() {
    let series = TimeSeries::from_fn(399, |n| 1.005f64.powi(n as i32)).unwrap();
    let t = ssa_lab::decompose_toeplitz(&series, 200).unwrap();
    let b = decompose(&embed(&series, 200).unwrap()).unwrap();
    let u_t = DMatrix::from_column_slice(200, 1, t.u().column(0).as_slice());
    let u_b = DMatrix::from_column_slice(200, 1, b.u().column(0).as_slice());
    let cos = (u_t.transpose() * u_b)[(0, 0)].abs();
    assert!(cos < 1.0 - 1e-6, "leading vectors coincide: {cos}");
}
