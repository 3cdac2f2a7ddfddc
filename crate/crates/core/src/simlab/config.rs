//! JSON experiment configurations and their plot-ready outputs.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::asymptotic::asymptotic_variance;
use super::convergence::{convergence_ratio, ConvergenceReport, WindowPolicy};
use super::forecast_split::{forecast_error_split, write_split_csv, SplitRow};
use super::signals::{NoiseKind, SignalSpec};
use super::surface::{mc_error_surface, pointwise_reconstruction_errors, ErrorSurface, Functional};
use crate::error::{Result, SsaError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[default]
    Surface,
    Convergence,
    ForecastSplit,
    PointwiseVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseConfig {
    #[serde(default)]
    pub kind: Option<NoiseKind>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            Self::One(x) => vec![x.clone()],
            Self::Many(v) => v.clone(),
        }
    }
}

/// `{start, end, step}` with `end` included when hit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowRange {
    pub start: usize,
    pub end: usize,
    #[serde(default = "one")]
    pub step: usize,
}

fn one() -> usize {
    1
}
fn default_reps() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: ExperimentKind,
    pub signal: SignalSpec,
    #[serde(default)]
    pub noise: NoiseConfig,
    /// Window lengths (for forecast splits: the recurrence windows).
    #[serde(default)]
    pub windows: Option<OneOrMany<usize>>,
    #[serde(default)]
    pub window_range: Option<WindowRange>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub functional: Option<OneOrMany<Functional>>,
    #[serde(default)]
    pub rank: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Output path; the CLI writes CSV there (and JSON next to it).
    #[serde(default)]
    pub output: Option<String>,
    /// Convergence experiments: window rows (default: the five table rows).
    #[serde(default)]
    pub policies: Option<Vec<WindowPolicy>>,
    /// Forecast splits: reconstruction window.
    #[serde(default)]
    pub reconstruction_window: Option<usize>,
    /// Pointwise variance: time index (default: the middle point).
    #[serde(default)]
    pub index: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SsaError::Parse(format!("experiment config: {e}")))
    }

    /// The signal spec with the `noise` overrides applied.
    pub fn spec(&self) -> SignalSpec {
        let mut s = self.signal.clone();
        if let Some(k) = self.noise.kind {
            s.noise = k;
        }
        if let Some(v) = self.noise.sigma {
            s.sigma = v;
        }
        if let Some(v) = self.noise.alpha {
            s.alpha = v;
        }
        s
    }

    pub fn window_list(&self) -> Result<Vec<usize>> {
        let mut w = self.windows.as_ref().map(|w| w.to_vec()).unwrap_or_default();
        if let Some(r) = self.window_range {
            if r.step == 0 || r.start > r.end {
                return Err(SsaError::InvalidSpec("window_range needs start <= end and step >= 1".into()));
            }
            w.extend((r.start..=r.end).step_by(r.step));
        }
        if w.is_empty() {
            return Err(SsaError::InvalidSpec("no windows given".into()));
        }
        Ok(w)
    }

    pub fn functionals(&self) -> Vec<Functional> {
        self.functional.as_ref().map(|f| f.to_vec()).unwrap_or_else(|| vec![Functional::Reconstruction])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseVariance {
    pub window: usize,
    pub index: usize,
    pub reps: usize,
    pub mean: f64,
    pub variance: f64,
    /// Asymptotic first-order variance for a constant signal in white noise.
    pub asymptotic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentOutput {
    Surface { surfaces: Vec<ErrorSurface> },
    Convergence { report: ConvergenceReport },
    ForecastSplit { reconstruction_window: usize, rows: Vec<SplitRow> },
    PointwiseVariance { rows: Vec<PointwiseVariance> },
}

impl ExperimentOutput {
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        match self {
            Self::Surface { surfaces } => ErrorSurface::write_csv(surfaces, out),
            Self::Convergence { report } => report.write_csv(out),
            Self::ForecastSplit { reconstruction_window, rows } => write_split_csv(rows, *reconstruction_window, out),
            Self::PointwiseVariance { rows } => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(["L", "index", "reps", "mean", "variance", "asymptotic"])?;
                for r in rows {
                    w.write_record([
                        r.window.to_string(),
                        r.index.to_string(),
                        r.reps.to_string(),
                        format!("{:.10e}", r.mean),
                        format!("{:.10e}", r.variance),
                        r.asymptotic.map(|a| format!("{a:.10e}")).unwrap_or_default(),
                    ])?;
                }
                w.flush()
            }
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let spec = cfg.spec();
    spec.validate()?;
    match cfg.experiment {
        ExperimentKind::Surface => Ok(ExperimentOutput::Surface {
            surfaces: mc_error_surface(&spec, &cfg.window_list()?, cfg.reps, &cfg.functionals(), cfg.rank, cfg.seed)?,
        }),
        ExperimentKind::Convergence => {
            let r = cfg.rank.or_else(|| spec.rank()).unwrap_or(2);
            let policies = cfg.policies.clone().unwrap_or_else(|| WindowPolicy::table_rows(r));
            Ok(ExperimentOutput::Convergence {
                report: convergence_ratio(&spec, &cfg.functionals(), &policies, cfg.reps, cfg.rank, cfg.seed)?,
            })
        }
        ExperimentKind::ForecastSplit => {
            let l_rec = cfg.reconstruction_window.unwrap_or((spec.n + 1) / 2);
            Ok(ExperimentOutput::ForecastSplit {
                reconstruction_window: l_rec,
                rows: forecast_error_split(&spec, &cfg.window_list()?, l_rec, cfg.reps, cfg.rank, cfg.seed)?,
            })
        }
        ExperimentKind::PointwiseVariance => {
            let rank = cfg.rank.or_else(|| spec.rank()).unwrap_or(1);
            let index = cfg.index.unwrap_or(spec.n / 2);
            let mut rows = Vec::new();
            for window in cfg.window_list()? {
                let e = pointwise_reconstruction_errors(&spec, window, rank, index, cfg.reps, cfg.seed)?;
                let n = e.len() as f64;
                let mean = e.iter().sum::<f64>() / n;
                let variance = e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
                let beta = window as f64 / spec.n as f64;
                let gamma = 2.0 * index as f64 / spec.n as f64;
                let asymptotic = asymptotic_variance(beta, gamma, spec.sigma, spec.n).ok();
                rows.push(PointwiseVariance { window, index, reps: cfg.reps, mean, variance, asymptotic });
            }
            Ok(ExperimentOutput::PointwiseVariance { rows })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simlab::signals::SignalKind;

    #[test]
    fn parse_minimal_config() {
        let cfg = ExperimentConfig::from_json(
            r#"{"signal": {"kind": "damped_cos_rn", "n": 100}, "noise": {"sigma": 0.2},
                "windows": [10, 20], "reps": 5, "functional": "projector", "seed": 3}"#,
        )
        .unwrap();
        assert_eq!(cfg.spec().sigma, 0.2);
        assert_eq!(cfg.spec().kind, SignalKind::DampedCosRn);
        assert_eq!(cfg.functionals(), vec![Functional::Projector]);
        assert_eq!(cfg.window_list().unwrap(), vec![10, 20]);
        assert!(ExperimentConfig::from_json(r#"{"signal": {"kind": "nope", "n": 5}}"#).is_err());
    }

    #[test]
    fn window_range_expands() {
        let cfg = ExperimentConfig::from_json(
            r#"{"signal": {"kind": "two_cos", "n": 99}, "window_range": {"start": 5, "end": 20, "step": 5}}"#,
        )
        .unwrap();
        assert_eq!(cfg.window_list().unwrap(), vec![5, 10, 15, 20]);
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = ExperimentConfig::from_json(
            r#"{"signal": {"kind": "damped_cos_wn", "n": 60}, "windows": [10, 30], "reps": 8,
                "functional": ["reconstruction", "frequency"], "seed": 11}"#,
        )
        .unwrap();
        assert_eq!(run_experiment(&cfg).unwrap(), run_experiment(&cfg).unwrap());
    }
}
