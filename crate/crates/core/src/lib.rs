//! Singular spectrum analysis and subspace-based signal estimation.
//!
//! The pipeline embeds a series into its Hankel trajectory matrix,
//! decomposes it ([`ssa`]), and works with the leading left singular
//! vectors as an estimate of the signal subspace ([`subspace`]). From that
//! subspace come reconstructions, linear recurrent forecasts ([`forecast`])
//! and frequency/damping estimates ([`estimate`]). [`simlab`] runs the
//! Monte-Carlo studies of how the errors depend on the window length.
//!
//! ```
//! use ssa_lab::{reconstruct, DecompositionMethod, TimeSeries};
//!
//! let s = TimeSeries::from_fn(100, |n| (0.2 * std::f64::consts::PI * n as f64).cos()).unwrap();
//! let rec = reconstruct(&s, 50, &[0, 1], DecompositionMethod::Basic).unwrap();
//! assert!((rec[7] - s[7]).abs() < 1e-10);
//! ```

pub mod error;
pub mod estimate;
pub mod forecast;
pub mod io;
pub mod linalg;
pub mod poles;
pub mod series;
pub mod simlab;
pub mod ssa;
pub mod subspace;

pub use error::{Result, SsaError};
pub use estimate::{
    esprit_ls, esprit_tls, find_peaks, poles_to_params, root_min_norm, root_music, EstimationMethod, MinNormEstimator,
    MusicEstimator, ParamEstimates, Pseudospectrum, ShiftMatrixEstimate,
};
pub use forecast::{
    characteristic_roots, fit_signal_model, min_norm_lrf, recurrent_forecast, Direction, LinearRecurrence, SignalModel,
};
pub use poles::PoleSet;
pub use series::TimeSeries;
pub use ssa::{
    decompose, decompose_toeplitz, embed, reconstruct, DecompositionMethod, Eigentriple, EigentripleSet,
    TrajectoryMatrix,
};
pub use subspace::{projector, signal_basis, subspace_distance, Projector, SubspaceBasis};
