//! Simulation lab: test-series catalog, Monte-Carlo error surfaces,
//! convergence ratios, the asymptotic reconstruction variance and the
//! forecast-error split.

pub mod asymptotic;
pub mod config;
pub mod convergence;
pub mod forecast_split;
pub mod rng;
pub mod signals;
pub mod surface;

pub use asymptotic::asymptotic_variance;
pub use config::{run_experiment, ExperimentConfig, ExperimentKind, ExperimentOutput};
pub use convergence::{convergence_ratio, paired_length, red_noise_projector_term, ConvergenceReport, WindowPolicy};
pub use forecast_split::{forecast_error_split, SplitRow};
pub use rng::rep_seed;
pub use signals::{gen_series, NoiseKind, SignalKind, SignalSpec, Term};
pub use surface::{mc_error_surface, pointwise_reconstruction_errors, ErrorSurface, Functional};
