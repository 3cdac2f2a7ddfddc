//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p ssa-lab --test acceptance --release`.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ssa_lab::estimate::noise_subspace;
use ssa_lab::forecast::{ssa_forecast, ForecastParams};
use ssa_lab::linalg;
use ssa_lab::poles::max_matching_distance;
use ssa_lab::simlab::{
    asymptotic_variance, convergence_ratio, mc_error_surface, pointwise_reconstruction_errors,
    red_noise_projector_term, Functional, NoiseKind, SignalKind, SignalSpec, Term, WindowPolicy,
};
use ssa_lab::ssa::decompose_leading;
use ssa_lab::{
    decompose, decompose_toeplitz, embed, esprit_ls, esprit_tls, min_norm_lrf, reconstruct, root_min_norm, root_music,
    signal_basis, subspace_distance, DecompositionMethod, Direction, SubspaceBasis, TimeSeries,
};

struct Gate {
    failed: usize,
}

impl Gate {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed += 1;
        }
    }
}

fn custom(n: usize, terms: &[(f64, f64, f64)]) -> SignalSpec {
    SignalSpec {
        sigma: 0.0,
        terms: terms
            .iter()
            .map(|&(amplitude, base, frequency)| Term { amplitude, base, frequency, phase: 0.3 })
            .collect(),
        ..SignalSpec::new(SignalKind::Custom, n)
    }
}

fn reflect(z: Complex64) -> Complex64 {
    if z.norm() > 1.0 {
        z.conj() / z.norm_sqr()
    } else {
        z
    }
}

/// Worst error over reconstruction, a 10-step forecast and the four pole
/// estimators for one noise-free signal.
fn exactness_error(spec: &SignalSpec, window: usize) -> ssa_lab::Result<f64> {
    let r = spec.rank().unwrap();
    let truth = spec.true_poles().unwrap();
    let series = TimeSeries::new(spec.signal())?;
    let indices: Vec<usize> = (0..r).collect();

    let rec = reconstruct(&series, window, &indices, DecompositionMethod::Basic)?;
    let mut worst = rec.iter().zip(series.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let params = ForecastParams {
        reconstruction_window: window,
        recurrence_window: window,
        rank: r,
        steps: 10,
        method: DecompositionMethod::Basic,
    };
    for (k, f) in ssa_forecast(&series, params)?.iter().enumerate() {
        let t = spec.signal_at(spec.n + k);
        worst = worst.max((f - t).abs() / t.abs().max(1.0));
    }

    let x = embed(&series, window)?;
    let basis = signal_basis(&decompose(&x)?, r)?;
    worst = worst.max(max_matching_distance(esprit_ls(&basis)?.poles()?.poles(), &truth));
    worst = worst.max(max_matching_distance(esprit_tls(&basis)?.poles()?.poles(), &truth));
    let lrf = min_norm_lrf(&basis, Direction::Forward)?;
    worst = worst.max(max_matching_distance(root_min_norm(&lrf, r)?.poles(), &truth));
    let reflected: Vec<Complex64> = truth.iter().map(|&z| reflect(z)).collect();
    let (noise, _) = noise_subspace(&x, r)?;
    worst = worst.max(max_matching_distance(root_music(&noise, r)?.poles(), &reflected));
    Ok(worst)
}

fn noise_free_exactness(g: &mut Gate) {
    let start = Instant::now();
    let cases = [
        ("exponential", custom(100, &[(1.0, 1.01, 0.0)])),
        ("damped cosine", custom(100, &[(1.0, 0.99, 0.1)])),
        ("undamped cosine", custom(100, &[(1.0, 1.0, 0.1)])),
        ("two cosines", SignalSpec { sigma: 0.0, ..SignalSpec::new(SignalKind::TwoCos, 100) }),
    ];
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for (name, spec) in &cases {
        for window in [20, 50] {
            match exactness_error(spec, window) {
                Ok(e) => worst = worst.max(e),
                Err(e) => {
                    worst = f64::INFINITY;
                    notes.push(format!("{name} L={window}: {e}"));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    g.check(
        "noise-free exactness",
        worst <= 1e-6 && secs < 10.0,
        format!("max error {worst:.2e} (<= 1e-6), {secs:.2}s (< 10s) {}", notes.join("; ")),
    );
}

fn exact_separability(g: &mut Gate) {
    let spec = SignalSpec::new(SignalKind::ConstSaw, 99);
    let s = mc_error_surface(&spec, &[50, 51], 1, &[Functional::Projector], Some(1), 0).unwrap();
    let (e50, e51) = (s[0].rmse[0], s[0].rmse[1]);
    g.check(
        "exact separability",
        e50 <= 1e-10 && e51 > 1e-4,
        format!("projector error L=50 {e50:.2e} (<= 1e-10), L=51 {e51:.2e} (> 1e-4)"),
    );
}

fn asymptotic_variance_match(g: &mut Gate) {
    let (n, window, reps) = (1000, 500, 2000);
    let spec = SignalSpec { sigma: 0.1, ..custom(n, &[(1.0, 1.0, 0.0)]) };
    let index = n / 2;
    let e = pointwise_reconstruction_errors(&spec, window, 1, index, reps, 2024).unwrap();
    let mean = e.iter().sum::<f64>() / reps as f64;
    let var = e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let target = 4.0 / 3.0 * spec.sigma * spec.sigma / n as f64;
    let model = asymptotic_variance(window as f64 / n as f64, 2.0 * index as f64 / n as f64, spec.sigma, n).unwrap();
    let rel = (var / target - 1.0).abs();
    g.check(
        "asymptotic variance",
        rel <= 0.2,
        format!("empirical {var:.4e}, (4/3) sigma^2/N = {target:.4e}, model {model:.4e}, rel dev {rel:.3} (<= 0.2)"),
    );
}

fn two_cos_rmse(g: &mut Gate) {
    let spec = SignalSpec { sigma: 1.0, ..SignalSpec::new(SignalKind::TwoCos, 99) };
    let short = mc_error_surface(&spec, &[40], 100, &[Functional::Reconstruction], Some(2), 5).unwrap()[0].rmse[0];
    let long =
        mc_error_surface(&spec.with_n(399), &[200], 100, &[Functional::Reconstruction], Some(4), 5).unwrap()[0].rmse[0];
    g.check(
        "two-cosine rmse",
        (short - 0.27).abs() <= 0.05 && (long - 0.16).abs() <= 0.05,
        format!("N=99 L=40 r=2 {short:.4} (0.27 +- 0.05), N=399 L=200 r=4 {long:.4} (0.16 +- 0.05)"),
    );
}

fn convergence(g: &mut Gate) {
    let reps = 500;
    let half = WindowPolicy::Half { minus: 0 };
    let fixed = WindowPolicy::Fixed { window: 20 };
    let wn = SignalSpec::new(SignalKind::DampedCosWn, 399);
    let rn = SignalSpec { noise: NoiseKind::Red, ..SignalSpec::new(SignalKind::DampedCosRn, 399) };
    let freq_rec =
        convergence_ratio(&wn, &[Functional::Frequency, Functional::Reconstruction], &[half], reps, None, 9).unwrap();
    let proj = convergence_ratio(&rn, &[Functional::Projector], &[fixed], reps, None, 9).unwrap();
    let delta = |d: Option<f64>| d.unwrap_or(f64::NAN);
    let df = delta(freq_rec.cell(half, Functional::Frequency).unwrap().delta);
    let dr = delta(freq_rec.cell(half, Functional::Reconstruction).unwrap().delta);
    let dp = delta(proj.cell(fixed, Functional::Projector).unwrap().delta);
    let inside = |d: f64, lo: f64, hi: f64| (lo..=hi).contains(&d);
    g.check(
        "convergence ratios",
        inside(df, 6.0, 11.0) && inside(dr, 1.7, 2.4) && inside(dp, 0.9, 1.4),
        format!(
            "frequency/wn {df:.3} [6, 11], reconstruction/wn {dr:.3} [1.7, 2.4], projector/rn L=20 {dp:.3} [0.9, 1.4]"
        ),
    );
    // the projector error under red noise tends to a nonzero floor; at N=399
    // the decaying part still dominates it, which is what pushes Delta up
    let c = proj.cell(fixed, Functional::Projector).unwrap();
    let floor = red_noise_projector_term(&rn, 20, 2).unwrap();
    println!(
        "     projector/rn L=20: RMSE {:.3e} (N={}) -> {:.3e} (N={}), non-vanishing floor {floor:.3e}",
        c.rmse1, proj.n1, c.rmse2, proj.n2
    );
}

fn random_finite_rank(rng: &mut ChaCha8Rng) -> SignalSpec {
    let n = rng.random_range(30..=150);
    let mut terms = Vec::new();
    let mut freqs: Vec<f64> = Vec::new();
    if rng.random_bool(0.5) {
        terms.push(Term {
            amplitude: rng.random_range(0.5..2.0),
            base: rng.random_range(0.98..1.02),
            frequency: 0.0,
            phase: 0.0,
        });
        freqs.push(0.0);
    }
    let count = rng.random_range(1..=3);
    while terms.len() < count + freqs.len().min(1) {
        let f: f64 = rng.random_range(0.02..0.48);
        if freqs.iter().all(|g| (g - f).abs() > 0.04) {
            freqs.push(f);
            terms.push(Term {
                amplitude: rng.random_range(0.5..2.0),
                base: rng.random_range(0.98..1.02),
                frequency: f,
                phase: rng.random_range(0.0..2.0 * PI),
            });
        }
    }
    SignalSpec { sigma: 0.0, terms, ..SignalSpec::new(SignalKind::Custom, n) }
}

fn extraneous_roots(g: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let (mut violations, mut failures, mut largest) = (0usize, 0usize, 0.0f64);
    for _ in 0..1000 {
        let spec = random_finite_rank(&mut rng);
        let truth = spec.true_poles().unwrap();
        let r = truth.len();
        let window = rng.random_range(r + 1..=spec.n - r);
        let roots = TimeSeries::new(spec.signal())
            .and_then(|s| embed(&s, window))
            .and_then(|x| decompose(&x))
            .and_then(|e| signal_basis(&e, r))
            .and_then(|b| min_norm_lrf(&b, Direction::Forward))
            .and_then(|l| ssa_lab::characteristic_roots(&l));
        let Ok(roots) = roots else {
            failures += 1;
            continue;
        };
        // drop the root nearest each true pole; the rest are extraneous
        let mut rest: Vec<Complex64> = roots.poles().to_vec();
        for t in &truth {
            if let Some(i) = (0..rest.len()).min_by(|&a, &b| (rest[a] - t).norm().total_cmp(&(rest[b] - t).norm())) {
                rest.swap_remove(i);
            }
        }
        for z in rest {
            largest = largest.max(z.norm());
            if z.norm() >= 1.0 {
                violations += 1;
            }
        }
    }
    g.check(
        "extraneous roots inside unit circle",
        violations == 0 && failures == 0,
        format!("1000 signals, {violations} violations, {failures} failures, largest extraneous |mu| {largest:.4}"),
    );
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn invariance(g: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let spec = SignalSpec::new(SignalKind::DampedCosWn, 120);
    let obs: Vec<f64> = spec.signal().iter().zip(spec.residual(3)).map(|(s, r)| s + r).collect();
    let other: Vec<f64> = spec.signal().iter().zip(spec.residual(4)).map(|(s, r)| s + r).collect();
    let u = signal_basis(&decompose_leading(&obs, 40, 4).unwrap(), 4).unwrap();
    let w = signal_basis(&decompose_leading(&other, 40, 4).unwrap(), 4).unwrap();
    let ls = esprit_ls(&u).unwrap().eigenvalues().unwrap();
    let tls = esprit_tls(&u).unwrap().eigenvalues().unwrap();
    let dist = subspace_distance(&u, &w).unwrap();

    let (mut ls_dev, mut tls_dev, mut dist_dev) = (0.0f64, 0.0f64, 0.0f64);
    let mut done = 0;
    while done < 100 {
        let p = gaussian(&mut rng, 4, 4);
        let sv = linalg::singular_values(&p).unwrap();
        if sv[0] / sv[3] > 1e4 {
            continue;
        }
        done += 1;
        let e = ssa_lab::estimate::esprit_ls_matrix(&(u.matrix() * &p)).unwrap().eigenvalues().unwrap();
        ls_dev = ls_dev.max(max_matching_distance(&e, &ls));

        let q = gaussian(&mut rng, 4, 4).qr().q();
        let uq = u.matrix() * &q;
        let e = ssa_lab::estimate::esprit_tls_matrix(&uq).unwrap().eigenvalues().unwrap();
        tls_dev = tls_dev.max(max_matching_distance(&e, &tls));
        let d = subspace_distance(&SubspaceBasis::new(uq).unwrap(), &w).unwrap();
        dist_dev = dist_dev.max((d - dist).abs());
    }
    g.check(
        "invariance",
        ls_dev <= 1e-8 && tls_dev <= 1e-8 && dist_dev <= 1e-8,
        format!("LS-ESPRIT {ls_dev:.2e}, TLS-ESPRIT {tls_dev:.2e}, subspace distance {dist_dev:.2e} (all <= 1e-8)"),
    );
}

fn toeplitz_pitfall(g: &mut Gate) {
    let series = TimeSeries::from_fn(399, |n| 1.005f64.powi(n as i32)).unwrap();
    let toeplitz = decompose_toeplitz(&series, 200).unwrap().count_above(1e-6);
    let basic = decompose(&embed(&series, 200).unwrap()).unwrap().count_above(1e-6);
    g.check(
        "toeplitz structure loss",
        toeplitz > 1 && basic == 1,
        format!("sigmas above 1e-6 sigma_1: toeplitz {toeplitz} (> 1), basic {basic} (== 1)"),
    );
}

fn main() {
    let mut g = Gate { failed: 0 };
    let checks: [(&str, fn(&mut Gate)); 8] = [
        ("exactness", noise_free_exactness),
        ("separability", exact_separability),
        ("asymptotic", asymptotic_variance_match),
        ("two-cos", two_cos_rmse),
        ("convergence", convergence),
        ("extraneous", extraneous_roots),
        ("invariance", invariance),
        ("toeplitz", toeplitz_pitfall),
    ];
    let only = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    for (key, f) in checks {
        if only.as_deref().is_none_or(|o| key.contains(o)) {
            let t = Instant::now();
            f(&mut g);
            eprintln!("  ({key}: {:.1}s)", t.elapsed().as_secs_f64());
        }
    }
    if g.failed > 0 {
        std::process::exit(1);
    }
}
