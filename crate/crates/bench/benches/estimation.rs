use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ssa_lab::estimate::{estimate_poles, estimate_pseudospectrum, DEFAULT_GRID};
use ssa_lab::simlab::{mc_error_surface, Functional, SignalKind, SignalSpec};
use ssa_lab::{EstimationMethod, TimeSeries};

fn two_tones(n: usize) -> TimeSeries {
    TimeSeries::from_fn(n, |i| {
        let t = i as f64;
        (2.0 * PI * t / 19.0).cos() + (2.0 * PI * t / 21.0).cos() + 0.05 * (t * 2.39).sin()
    })
    .unwrap()
}

fn poles(c: &mut Criterion) {
    let s = two_tones(199);
    let mut g = c.benchmark_group("poles");
    for m in [
        EstimationMethod::EspritLs,
        EstimationMethod::EspritTls,
        EstimationMethod::RootMusic,
        EstimationMethod::RootMinNorm,
    ] {
        g.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| estimate_poles(&s, 100, 4, m).unwrap())
        });
    }
    g.finish();
}

fn pseudospectra(c: &mut Criterion) {
    let s = two_tones(199);
    let mut g = c.benchmark_group("pseudospectrum");
    for m in [EstimationMethod::MinNorm, EstimationMethod::Music, EstimationMethod::Ev] {
        g.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| estimate_pseudospectrum(&s, 100, 4, m, DEFAULT_GRID).unwrap())
        });
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let spec = SignalSpec::new(SignalKind::DampedCosWn, 399);
    let mut g = c.benchmark_group("simulation");
    g.sample_size(10);
    g.bench_function("surface/N=399,3 windows,20 reps", |b| {
        b.iter(|| {
            mc_error_surface(&spec, &[20, 100, 200], 20, &[Functional::Projector, Functional::Frequency], None, 1)
                .unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, poles, pseudospectra, monte_carlo);
criterion_main!(benches);
