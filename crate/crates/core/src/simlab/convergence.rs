//! Convergence ratios `Delta = RMSE(N1) / RMSE(N2)` with `N2 + 1 = 4 (N1 + 1)`.
//! Delta near 8 means a rate of `N^-1.5`, near 2 a rate of `N^-0.5`, near 1
//! no convergence.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::signals::SignalSpec;
use super::surface::{mc_error_surface, Functional};
use crate::error::{Result, SsaError};
use crate::linalg;
use crate::series::TimeSeries;
use crate::ssa::{decompose_leading, embed};

/// RMSE at or below this counts as exact (separability), so no ratio.
pub const EXACT_RMSE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum WindowPolicy {
    Fixed {
        window: usize,
    },
    /// `(N + 1) / 2 - minus`.
    Half {
        minus: usize,
    },
}

impl WindowPolicy {
    pub fn window(&self, n: usize) -> usize {
        match *self {
            Self::Fixed { window } => window,
            Self::Half { minus } => ((n + 1) / 2).saturating_sub(minus),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Self::Fixed { window } => window.to_string(),
            Self::Half { minus: 0 } => "(N+1)/2".into(),
            Self::Half { minus } => format!("(N+1)/2-{minus}"),
        }
    }

    /// The five window rows of the convergence tables for signal rank `r`.
    pub fn table_rows(r: usize) -> Vec<WindowPolicy> {
        vec![
            Self::Fixed { window: r + 1 },
            Self::Fixed { window: 20 },
            Self::Fixed { window: 25 },
            Self::Half { minus: 5 },
            Self::Half { minus: 0 },
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCell {
    pub policy: WindowPolicy,
    pub functional: Functional,
    pub window1: usize,
    pub window2: usize,
    pub rmse1: f64,
    pub rmse2: f64,
    /// `None` when either RMSE is exactly zero (exact separability).
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub n1: usize,
    pub n2: usize,
    pub reps: usize,
    pub cells: Vec<ConvergenceCell>,
}

impl ConvergenceReport {
    pub fn cell(&self, policy: WindowPolicy, functional: Functional) -> Option<&ConvergenceCell> {
        self.cells.iter().find(|c| c.policy == policy && c.functional == functional)
    }

    /// CSV: `policy,functional,N1,N2,L1,L2,RMSE1,RMSE2,delta` (blank delta
    /// when unavailable).
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["policy", "functional", "N1", "N2", "L1", "L2", "RMSE1", "RMSE2", "delta"])?;
        for c in &self.cells {
            w.write_record([
                c.policy.label(),
                c.functional.name().to_string(),
                self.n1.to_string(),
                self.n2.to_string(),
                c.window1.to_string(),
                c.window2.to_string(),
                format!("{:.10e}", c.rmse1),
                format!("{:.10e}", c.rmse2),
                c.delta.map(|d| format!("{d:.6}")).unwrap_or_default(),
            ])?;
        }
        w.flush()
    }
}

/// The longer length paired with `n1`: `4 (n1 + 1) - 1`, which keeps both
/// lengths odd when `n1` is odd.
pub fn paired_length(n1: usize) -> usize {
    4 * (n1 + 1) - 1
}

/// Runs the error surfaces at `N1 = spec.n` and `N2 = paired_length(N1)`
/// for every policy and functional.
pub fn convergence_ratio(
    spec: &SignalSpec,
    functionals: &[Functional],
    policies: &[WindowPolicy],
    reps: usize,
    rank: Option<usize>,
    seed: u64,
) -> Result<ConvergenceReport> {
    if spec.is_random() && reps < 100 {
        return Err(SsaError::InvalidSpec("convergence ratios need at least 100 replications".into()));
    }
    let n1 = spec.n;
    let n2 = paired_length(n1);
    let spec2 = spec.with_n(n2);
    let w1: Vec<usize> = policies.iter().map(|p| p.window(n1)).collect();
    let w2: Vec<usize> = policies.iter().map(|p| p.window(n2)).collect();
    let s1 = mc_error_surface(spec, &w1, reps, functionals, rank, seed)?;
    let s2 = mc_error_surface(&spec2, &w2, reps, functionals, rank, seed)?;
    let mut cells = Vec::new();
    for (k, &functional) in functionals.iter().enumerate() {
        for (i, &policy) in policies.iter().enumerate() {
            let (rmse1, rmse2) = (s1[k].rmse[i], s2[k].rmse[i]);
            let delta = (rmse1 > EXACT_RMSE && rmse2 > EXACT_RMSE).then(|| rmse1 / rmse2);
            cells.push(ConvergenceCell { policy, functional, window1: w1[i], window2: w2[i], rmse1, rmse2, delta });
        }
    }
    Ok(ConvergenceReport { n1, n2, reps, cells })
}

/// `K || (S S^T)^+ Sigma (I - U U^T) ||_2` for the signal trajectory matrix
/// `S`, its rank-`r` left basis `U` and the red-noise autocovariance
/// `Sigma_ij = sigma^2 alpha^|i-j|`: the leading projector perturbation term
/// that does not vanish as N grows. The norm is the spectral norm.
pub fn red_noise_projector_term(spec: &SignalSpec, window: usize, rank: usize) -> Result<f64> {
    spec.validate()?;
    let signal = spec.signal();
    let s = embed(&TimeSeries::new(signal.clone())?, window)?;
    let ets = decompose_leading(&signal, window, rank)?;
    let k = s.k() as f64;
    let u = ets.u();
    let inv =
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(rank, ets.sigmas().iter().map(|x| 1.0 / (x * x))));
    let pinv = u * inv * u.transpose();
    let sigma =
        DMatrix::from_fn(window, window, |i, j| spec.sigma * spec.sigma * spec.alpha.powi(i.abs_diff(j) as i32));
    let perp = DMatrix::identity(window, window) - u * u.transpose();
    Ok(k * linalg::spectral_norm(&(pinv * sigma * perp)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simlab::signals::SignalKind;

    #[test]
    fn policies() {
        assert_eq!(WindowPolicy::Half { minus: 5 }.window(399), 195);
        assert_eq!(WindowPolicy::Half { minus: 0 }.window(1599), 800);
        assert_eq!(paired_length(399), 1599);
        assert_eq!(paired_length(6399), 25599);
    }

    #[test]
    fn exact_separability_cell_is_unavailable() {
        let spec = SignalSpec::new(SignalKind::DampedCosConst, 399);
        let r = convergence_ratio(&spec, &[Functional::Reconstruction], &[WindowPolicy::Half { minus: 0 }], 1, None, 1)
            .unwrap();
        assert_eq!(r.cells[0].delta, None);
    }

    #[test]
    fn red_noise_term_is_small_and_positive() {
        let spec = SignalSpec::new(SignalKind::DampedCosRn, 399);
        let t = red_noise_projector_term(&spec, 10, 2).unwrap();
        assert!(t > 0.0 && t < 0.1, "{t}");
    }
}
