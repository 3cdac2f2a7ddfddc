//! Splits the one-step recurrent forecast error into the part caused by the
//! estimated recurrence and the part caused by the reconstructed seed values.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::{rep_seed, with_pool};
use super::signals::SignalSpec;
use super::surface::msd_rmse;
use crate::error::{Result, SsaError};
use crate::forecast::{min_norm_lrf, Direction, LinearRecurrence};
use crate::ssa::{decompose_leading, hankelize_group};
use crate::subspace::signal_basis;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRow {
    pub recurrence_window: usize,
    /// Estimated recurrence applied to reconstructed values.
    pub total: f64,
    /// Estimated recurrence applied to the true signal values.
    pub lrf_only: f64,
    /// True recurrence applied to reconstructed values.
    pub rec_only: f64,
    pub failures: usize,
}

pub fn write_split_csv<W: Write>(rows: &[SplitRow], reconstruction_window: usize, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["L_lrf", "L_rec", "total", "lrf_only", "rec_only", "failures"])?;
    for r in rows {
        w.write_record([
            r.recurrence_window.to_string(),
            reconstruction_window.to_string(),
            format!("{:.10e}", r.total),
            format!("{:.10e}", r.lrf_only),
            format!("{:.10e}", r.rec_only),
            r.failures.to_string(),
        ])?;
    }
    w.flush()
}

fn lrf_of(values: &[f64], window: usize, rank: usize) -> Result<LinearRecurrence> {
    min_norm_lrf(&signal_basis(&decompose_leading(values, window, rank)?, rank)?, Direction::Forward)
}

/// RMSE of the three one-step forecast errors for each recurrence window.
/// The true recurrence is the min-norm recurrence of the exact signal
/// subspace at the same window; the reconstruction uses window
/// `reconstruction_window` and the leading `rank` triples.
pub fn forecast_error_split(
    spec: &SignalSpec,
    recurrence_windows: &[usize],
    reconstruction_window: usize,
    reps: usize,
    rank: Option<usize>,
    seed: u64,
) -> Result<Vec<SplitRow>> {
    spec.validate()?;
    let rank = rank
        .or_else(|| spec.rank())
        .ok_or_else(|| SsaError::InvalidSpec(format!("{} has no finite rank; give a rank", spec.kind.name())))?;
    let signal = spec.signal();
    let next = spec.signal_at(spec.n);
    let indices: Vec<usize> = (0..rank).collect();
    let true_lrfs: Vec<LinearRecurrence> =
        recurrence_windows.iter().map(|&w| lrf_of(&signal, w, rank)).collect::<Result<_>>()?;

    // per replication: one reconstruction, then every recurrence window
    let per_rep: Vec<Vec<Option<(f64, f64, f64)>>> = with_pool(|| {
        (0..reps)
            .into_par_iter()
            .map(|rep| {
                let residual = spec.residual(rep_seed(seed, spec, rep));
                let obs: Vec<f64> = signal.iter().zip(&residual).map(|(s, r)| s + r).collect();
                let rec =
                    decompose_leading(&obs, reconstruction_window, rank).and_then(|e| hankelize_group(&e, &indices));
                recurrence_windows
                    .iter()
                    .zip(&true_lrfs)
                    .map(|(&w, true_lrf)| {
                        let rec = rec.as_ref().ok()?;
                        let est = lrf_of(&obs, w, rank).ok()?;
                        let t = est.order();
                        let total = est.predict(&rec[rec.len() - t..]) - next;
                        let lrf_only = est.predict(&signal[signal.len() - t..]) - next;
                        let rec_only = true_lrf.predict(&rec[rec.len() - t..]) - next;
                        Some((total, lrf_only, rec_only))
                    })
                    .collect()
            })
            .collect()
    });

    Ok(recurrence_windows
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let ok: Vec<(f64, f64, f64)> = per_rep.iter().filter_map(|r| r[i]).collect();
            let col = |f: fn(&(f64, f64, f64)) -> f64| msd_rmse(&ok.iter().map(|e| f(e).abs()).collect::<Vec<_>>()).1;
            SplitRow {
                recurrence_window: w,
                total: col(|e| e.0),
                lrf_only: col(|e| e.1),
                rec_only: col(|e| e.2),
                failures: reps - ok.len(),
            }
        })
        .collect())
}
