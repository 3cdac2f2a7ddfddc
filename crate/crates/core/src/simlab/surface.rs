//! Monte-Carlo error surfaces: error functionals of SSA estimates as a
//! function of the window length.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::{rep_seed, with_pool};
use super::signals::SignalSpec;
use crate::error::{Result, SsaError};
use crate::estimate::esprit_ls;
use crate::forecast::{min_norm_lrf, Direction};
use crate::poles::frequency_of;
use crate::ssa::{decompose_leading, hankelize_group, EigentripleSet};
use crate::subspace::{signal_basis, subspace_distance, SubspaceBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Functional {
    /// `||P_hat - P||_2` for the signal-subspace projectors.
    Projector,
    /// `||S_hat - S|| / sqrt(N)`.
    Reconstruction,
    /// Root mean square error over the last 10 points.
    #[serde(rename = "reconstruction-last-10")]
    ReconstructionLast10,
    /// `|s_hat_N - s_N|` for the recurrent forecast one step past the end.
    #[serde(rename = "forecast-1-step")]
    Forecast1Step,
    /// Frequency error of the LS-ESPRIT poles.
    Frequency,
    /// `|ln |mu_hat| - ln |mu||` of the LS-ESPRIT poles.
    Base,
}

impl Functional {
    pub const ALL: [Functional; 6] = [
        Self::Projector,
        Self::Reconstruction,
        Self::ReconstructionLast10,
        Self::Forecast1Step,
        Self::Frequency,
        Self::Base,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Projector => "projector",
            Self::Reconstruction => "reconstruction",
            Self::ReconstructionLast10 => "reconstruction-last-10",
            Self::Forecast1Step => "forecast-1-step",
            Self::Frequency => "frequency",
            Self::Base => "base",
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Functional {
    type Err = SsaError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| SsaError::Parse(format!("unknown functional '{s}'")))
    }
}

/// MSD (`mean e`) and RMSE (`sqrt(mean e^2)`) of one functional per window.
/// Replications whose estimate failed (for example a vertical subspace)
/// are counted in `failures` and left out of the statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSurface {
    pub functional: Functional,
    pub windows: Vec<usize>,
    pub msd: Vec<f64>,
    pub rmse: Vec<f64>,
    pub reps: usize,
    pub failures: Vec<usize>,
}

impl ErrorSurface {
    /// Long-format CSV: `L,functional,MSD,RMSE,reps,failures`.
    pub fn write_csv<W: Write>(surfaces: &[ErrorSurface], out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["L", "functional", "MSD", "RMSE", "reps", "failures"])?;
        for s in surfaces {
            for i in 0..s.windows.len() {
                w.write_record([
                    s.windows[i].to_string(),
                    s.functional.name().to_string(),
                    format!("{:.10e}", s.msd[i]),
                    format!("{:.10e}", s.rmse[i]),
                    s.reps.to_string(),
                    s.failures[i].to_string(),
                ])?;
            }
        }
        w.flush()
    }
}

/// Summary statistics of a list of per-replication errors.
pub fn msd_rmse(errors: &[f64]) -> (f64, f64) {
    if errors.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = errors.len() as f64;
    let msd = errors.iter().sum::<f64>() / n;
    let rmse = (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
    (msd, rmse)
}

/// Everything about the noise-free signal that the functionals compare to.
struct Truth {
    signal: Vec<f64>,
    next: f64,
    basis: Option<SubspaceBasis>,
    poles: Option<Vec<Complex64>>,
}

impl Truth {
    fn new(spec: &SignalSpec, window: usize, rank: usize, functionals: &[Functional]) -> Result<Self> {
        let signal = spec.signal();
        let basis = if functionals.contains(&Functional::Projector) {
            let ets = decompose_leading(&signal, window, rank)?;
            Some(signal_basis(&ets, rank)?)
        } else {
            None
        };
        let needs_poles = functionals.iter().any(|f| matches!(f, Functional::Frequency | Functional::Base));
        let poles = spec.true_poles();
        if needs_poles && poles.is_none() {
            return Err(SsaError::InvalidSpec(format!("{} has no finite-rank poles", spec.kind.name())));
        }
        Ok(Self { next: spec.signal_at(spec.n), signal, basis, poles })
    }
}

/// Frequency and base errors of the estimated poles: every true pole with
/// nonnegative imaginary part is matched to the nearest estimate, and the
/// errors are combined as a root mean square over the true poles.
pub fn pole_errors(estimated: &[Complex64], truth: &[Complex64]) -> (f64, f64) {
    let mut f2 = 0.0;
    let mut b2 = 0.0;
    let mut count = 0.0;
    for t in truth.iter().filter(|t| t.im >= 0.0) {
        let Some(e) = estimated.iter().min_by(|a, b| (*a - t).norm().total_cmp(&(*b - t).norm())) else {
            return (f64::INFINITY, f64::INFINITY);
        };
        f2 += (frequency_of(*e) - frequency_of(*t)).powi(2);
        b2 += (e.norm().ln() - t.norm().ln()).powi(2);
        count += 1.0;
    }
    ((f2 / count).sqrt(), (b2 / count).sqrt())
}

fn evaluate(truth: &Truth, ets: &EigentripleSet, rank: usize, functionals: &[Functional]) -> Vec<Result<f64>> {
    let indices: Vec<usize> = (0..rank).collect();
    let rec = hankelize_group(ets, &indices);
    let basis = signal_basis(ets, rank);
    let poles = || -> Result<Vec<Complex64>> { Ok(esprit_ls(basis.as_ref().map_err(Clone::clone)?)?.eigenvalues()?) };
    let mut pole_cache: Option<Result<(f64, f64)>> = None;
    let mut pole_err = || -> Result<(f64, f64)> {
        pole_cache
            .get_or_insert_with(|| poles().map(|p| pole_errors(&p, truth.poles.as_deref().unwrap_or(&[]))))
            .clone()
    };
    functionals
        .iter()
        .map(|f| match f {
            Functional::Projector => {
                let b = basis.as_ref().map_err(Clone::clone)?;
                subspace_distance(truth.basis.as_ref().expect("projector truth"), b)
            }
            Functional::Reconstruction => {
                let rec = rec.as_ref().map_err(Clone::clone)?;
                let n = rec.len() as f64;
                Ok((rec.iter().zip(&truth.signal).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n).sqrt())
            }
            Functional::ReconstructionLast10 => {
                let rec = rec.as_ref().map_err(Clone::clone)?;
                let k = rec.len().min(10);
                let tail = rec.len() - k;
                Ok((rec[tail..].iter().zip(&truth.signal[tail..]).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
                    / k as f64)
                    .sqrt())
            }
            Functional::Forecast1Step => {
                let rec = rec.as_ref().map_err(Clone::clone)?;
                let lrf = min_norm_lrf(basis.as_ref().map_err(Clone::clone)?, Direction::Forward)?;
                let pred = lrf.predict(&rec[rec.len() - lrf.order()..]);
                Ok((pred - truth.next).abs())
            }
            Functional::Frequency => pole_err().map(|e| e.0),
            Functional::Base => pole_err().map(|e| e.1),
        })
        .collect()
}

fn resolve_rank(spec: &SignalSpec, rank: Option<usize>) -> Result<usize> {
    rank.or_else(|| spec.rank())
        .filter(|&r| r > 0)
        .ok_or_else(|| SsaError::InvalidSpec(format!("a rank is required for {}", spec.kind.name())))
}

/// Error surfaces over `windows` for each requested functional. All
/// functionals of one replication and window share one decomposition of the
/// leading `rank` triples (default: the signal rank).
pub fn mc_error_surface(
    spec: &SignalSpec,
    windows: &[usize],
    reps: usize,
    functionals: &[Functional],
    rank: Option<usize>,
    seed: u64,
) -> Result<Vec<ErrorSurface>> {
    spec.validate()?;
    if reps == 0 {
        return Err(SsaError::InvalidSpec("reps must be at least 1".into()));
    }
    if functionals.is_empty() {
        return Err(SsaError::InvalidSpec("no functional requested".into()));
    }
    let rank = resolve_rank(spec, rank)?;
    let mut surfaces: Vec<ErrorSurface> = functionals
        .iter()
        .map(|&functional| ErrorSurface {
            functional,
            windows: windows.to_vec(),
            msd: vec![],
            rmse: vec![],
            reps,
            failures: vec![],
        })
        .collect();
    for &window in windows {
        let truth = Truth::new(spec, window, rank, functionals)?;
        let per_rep: Vec<Vec<Result<f64>>> = with_pool(|| {
            (0..reps)
                .into_par_iter()
                .map(|rep| {
                    let residual = spec.residual(rep_seed(seed, spec, rep));
                    let obs: Vec<f64> = truth.signal.iter().zip(&residual).map(|(s, r)| s + r).collect();
                    match decompose_leading(&obs, window, rank) {
                        Ok(ets) => evaluate(&truth, &ets, rank, functionals),
                        Err(e) => vec![Err(e); functionals.len()],
                    }
                })
                .collect()
        });
        for (k, surface) in surfaces.iter_mut().enumerate() {
            let mut ok = Vec::with_capacity(reps);
            let mut failed = 0;
            for rep in &per_rep {
                match &rep[k] {
                    Ok(e) if e.is_finite() => ok.push(*e),
                    _ => failed += 1,
                }
            }
            let (msd, rmse) = msd_rmse(&ok);
            surface.msd.push(msd);
            surface.rmse.push(rmse);
            surface.failures.push(failed);
        }
    }
    Ok(surfaces)
}

/// Reconstruction errors `s_hat_i - s_i` at one time index, one per
/// replication.
pub fn pointwise_reconstruction_errors(
    spec: &SignalSpec,
    window: usize,
    rank: usize,
    index: usize,
    reps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if index >= spec.n {
        return Err(SsaError::IndexOutOfRange { index, count: spec.n });
    }
    let signal = spec.signal();
    let indices: Vec<usize> = (0..rank).collect();
    with_pool(|| {
        (0..reps)
            .into_par_iter()
            .map(|rep| {
                let residual = spec.residual(rep_seed(seed, spec, rep));
                let obs: Vec<f64> = signal.iter().zip(&residual).map(|(s, r)| s + r).collect();
                let rec = hankelize_group(&decompose_leading(&obs, window, rank)?, &indices)?;
                Ok(rec[index] - signal[index])
            })
            .collect()
    })
}
