//! Basic SSA: embedding, decomposition (SVD or Toeplitz), grouping and
//! diagonal averaging.
//!
//! Eigentriples are stored column-wise: column `i` of [`EigentripleSet::u`]
//! and [`EigentripleSet::v`] together with `sigmas[i]` form the `i`-th triple
//! (0-based here; the CLI numbers them from 1).
//!
//! Sign convention: every left vector has its largest-magnitude coordinate
//! positive and the right vector is flipped with it. Triples with equal
//! singular values keep the backend order; grouping such triples apart is the
//! caller's responsibility since they are not strongly separable.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SsaError};
use crate::linalg::{self, HankelOperator};
use crate::series::TimeSeries;

/// Singular values at or below `DEFAULT_CUTOFF * sigma_1` are treated as
/// numerical zeros and dropped.
pub const DEFAULT_CUTOFF: f64 = 1e-12;

/// The L x K Hankel matrix of lagged windows.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMatrix {
    matrix: DMatrix<f64>,
}

impl TrajectoryMatrix {
    pub fn window(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn k(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

fn check_window(len: usize, window: usize) -> Result<()> {
    if window < 2 || window + 1 > len {
        return Err(SsaError::WindowOutOfRange { window, len });
    }
    Ok(())
}

/// Column `j` is `(f_j, ..., f_{j+L-1})`.
pub fn embed(series: &TimeSeries, window: usize) -> Result<TrajectoryMatrix> {
    check_window(series.len(), window)?;
    let k = series.len() - window + 1;
    Ok(TrajectoryMatrix { matrix: DMatrix::from_fn(window, k, |i, j| series[i + j]) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecompositionMethod {
    Basic,
    Toeplitz,
}

/// One `(sigma, u, v)` triple.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigentriple {
    pub sigma: f64,
    pub u: DVector<f64>,
    pub v: DVector<f64>,
}

/// Ordered eigentriples of a trajectory matrix.
///
/// For the basic method this is a truncated SVD. For the Toeplitz method the
/// `u` columns are eigenvectors of the lag-covariance matrix, `sigma = |X^T u|`
/// and `v = X^T u / sigma`; the `v` columns are then not orthogonal in
/// general.
#[derive(Debug, Clone, PartialEq)]
pub struct EigentripleSet {
    method: DecompositionMethod,
    sigmas: Vec<f64>,
    u: DMatrix<f64>,
    v: DMatrix<f64>,
}

impl EigentripleSet {
    /// Assembles a set from parts, checking shapes and ordering.
    pub fn from_parts(method: DecompositionMethod, sigmas: Vec<f64>, u: DMatrix<f64>, v: DMatrix<f64>) -> Result<Self> {
        if u.ncols() != sigmas.len() || v.ncols() != sigmas.len() {
            return Err(SsaError::DimensionMismatch(format!(
                "{} sigmas, {} u-vectors, {} v-vectors",
                sigmas.len(),
                u.ncols(),
                v.ncols()
            )));
        }
        if sigmas.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(SsaError::DecompositionFailed("negative or non-finite singular value".into()));
        }
        if sigmas.windows(2).any(|w| w[1] > w[0]) {
            return Err(SsaError::DecompositionFailed("singular values not nonincreasing".into()));
        }
        Ok(Self { method, sigmas, u, v })
    }

    pub fn method(&self) -> DecompositionMethod {
        self.method
    }

    /// Window length L.
    pub fn window(&self) -> usize {
        self.u.nrows()
    }

    pub fn k(&self) -> usize {
        self.v.nrows()
    }

    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    /// L x d matrix of left vectors.
    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    /// K x d matrix of right vectors.
    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn triple(&self, i: usize) -> Option<Eigentriple> {
        (i < self.len()).then(|| Eigentriple {
            sigma: self.sigmas[i],
            u: self.u.column(i).into_owned(),
            v: self.v.column(i).into_owned(),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = Eigentriple> + '_ {
        (0..self.len()).filter_map(|i| self.triple(i))
    }

    /// Number of singular values strictly above `rel * sigma_1`.
    pub fn count_above(&self, rel: f64) -> usize {
        match self.sigmas.first() {
            Some(&s1) => self.sigmas.iter().filter(|&&s| s > rel * s1).count(),
            None => 0,
        }
    }

    fn check_indices(&self, indices: &[usize]) -> Result<()> {
        for (pos, &i) in indices.iter().enumerate() {
            if i >= self.len() {
                return Err(SsaError::IndexOutOfRange { index: i, count: self.len() });
            }
            if indices[..pos].contains(&i) {
                return Err(SsaError::GroupSyntax(format!("duplicate index {}", i + 1)));
            }
        }
        Ok(())
    }
}

fn finalize(
    method: DecompositionMethod,
    mut sigmas: Vec<f64>,
    mut u: DMatrix<f64>,
    mut v: DMatrix<f64>,
    cutoff: f64,
) -> EigentripleSet {
    let keep = match sigmas.first() {
        Some(&s1) if s1 > 0.0 => sigmas.iter().take_while(|&&s| s > cutoff * s1).count(),
        _ => 0,
    };
    sigmas.truncate(keep);
    u = u.columns(0, keep).into_owned();
    v = v.columns(0, keep).into_owned();
    linalg::normalize_sign(&mut u, Some(&mut v));
    EigentripleSet { method, sigmas, u, v }
}

/// SVD of the trajectory matrix with the default relative cutoff.
pub fn decompose(x: &TrajectoryMatrix) -> Result<EigentripleSet> {
    decompose_with_cutoff(x, DEFAULT_CUTOFF)
}

pub fn decompose_with_cutoff(x: &TrajectoryMatrix, cutoff: f64) -> Result<EigentripleSet> {
    let (sigmas, u, v) = linalg::sorted_svd(&x.matrix)?;
    Ok(finalize(DecompositionMethod::Basic, sigmas, u, v, cutoff))
}

/// Only the `r` leading triples, computed without forming the trajectory
/// matrix. Intended for long series where a full SVD is too expensive.
pub fn decompose_leading(series: &[f64], window: usize, r: usize) -> Result<EigentripleSet> {
    check_window(series.len(), window)?;
    let op = HankelOperator::new(series, window);
    let (sigmas, u, v) = op.leading_svd(r)?;
    Ok(EigentripleSet { method: DecompositionMethod::Basic, sigmas, u, v })
}

/// Lag-covariance matrix with entries
/// `c_ij = 1/(N-|i-j|) * sum_{m=0}^{N-|i-j|-1} f_m f_{m+|i-j|}`.
pub fn toeplitz_lag_covariance(series: &TimeSeries, window: usize) -> Result<DMatrix<f64>> {
    check_window(series.len(), window)?;
    let n = series.len();
    let lags: Vec<f64> = (0..window)
        .map(|lag| {
            let s: f64 = (0..n - lag).map(|m| series[m] * series[m + lag]).sum();
            s / (n - lag) as f64
        })
        .collect();
    Ok(DMatrix::from_fn(window, window, |i, j| lags[i.abs_diff(j)]))
}

pub fn decompose_toeplitz(series: &TimeSeries, window: usize) -> Result<EigentripleSet> {
    decompose_toeplitz_with_cutoff(series, window, DEFAULT_CUTOFF)
}

pub fn decompose_toeplitz_with_cutoff(series: &TimeSeries, window: usize, cutoff: f64) -> Result<EigentripleSet> {
    let c = toeplitz_lag_covariance(series, window)?;
    let x = embed(series, window)?.matrix;
    let (_, vecs) = linalg::symmetric_eigen(&c)?;
    let proj = x.transpose() * &vecs; // K x L, column i = X^T u_i
    let norms: Vec<f64> = (0..window).map(|i| proj.column(i).norm()).collect();
    let mut order: Vec<usize> = (0..window).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let sigmas: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let u = DMatrix::from_fn(window, window, |r, c| vecs[(r, order[c])]);
    let v = DMatrix::from_fn(x.ncols(), window, |r, c| {
        let s = norms[order[c]];
        if s > 0.0 {
            proj[(r, order[c])] / s
        } else {
            0.0
        }
    });
    Ok(finalize(DecompositionMethod::Toeplitz, sigmas, u, v, cutoff))
}

/// Eigenvalues (nonincreasing) and the full orthonormal eigenvector matrix
/// (L x L) of `X X^T`. Supplies noise-subspace bases and EV weights.
pub fn left_spectrum(x: &TrajectoryMatrix) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let c = &x.matrix * x.matrix.transpose();
    let (vals, mut u) = linalg::symmetric_eigen(&c)?;
    linalg::normalize_sign(&mut u, None);
    Ok((vals.into_iter().map(|v| v.max(0.0)).collect(), u))
}

/// `X_I = sum_{i in I} sigma_i u_i v_i^T`.
pub fn group_matrix(ets: &EigentripleSet, indices: &[usize]) -> Result<DMatrix<f64>> {
    ets.check_indices(indices)?;
    let mut m = DMatrix::zeros(ets.window(), ets.k());
    for &i in indices {
        let scaled = ets.u.column(i) * ets.sigmas[i];
        m.ger(1.0, &scaled, &ets.v.column(i), 1.0);
    }
    Ok(m)
}

/// Diagonal averaging: element `i` of the result is the mean of the
/// entries `M(p, q)` with `p + q = i`.
pub fn hankelize(m: &DMatrix<f64>) -> Vec<f64> {
    let (l, k) = m.shape();
    if l == 0 || k == 0 {
        return Vec::new();
    }
    let n = l + k - 1;
    let mut sums = vec![0.0; n];
    for q in 0..k {
        for p in 0..l {
            sums[p + q] += m[(p, q)];
        }
    }
    for (i, s) in sums.iter_mut().enumerate() {
        *s /= diag_len(i, l, k) as f64;
    }
    sums
}

fn diag_len(i: usize, l: usize, k: usize) -> usize {
    let lo = i.saturating_sub(k - 1);
    let hi = i.min(l - 1);
    hi - lo + 1
}

/// Diagonal averaging of `X_I` without materializing the L x K matrix.
/// Agrees with `hankelize(group_matrix(..))` up to rounding.
pub fn hankelize_group(ets: &EigentripleSet, indices: &[usize]) -> Result<Vec<f64>> {
    ets.check_indices(indices)?;
    let (l, k) = (ets.window(), ets.k());
    let n = l + k - 1;
    let mut sums = vec![0.0; n];
    for &t in indices {
        let s = ets.sigmas[t];
        let u = ets.u.column(t);
        let v = ets.v.column(t);
        for p in 0..l {
            let up = s * u[p];
            for (q, vq) in v.iter().enumerate() {
                sums[p + q] += up * vq;
            }
        }
    }
    for (i, s) in sums.iter_mut().enumerate() {
        *s /= diag_len(i, l, k) as f64;
    }
    Ok(sums)
}

/// Full pipeline embed -> decompose -> group -> diagonal averaging.
pub fn reconstruct(
    series: &TimeSeries,
    window: usize,
    indices: &[usize],
    method: DecompositionMethod,
) -> Result<TimeSeries> {
    let ets = match method {
        DecompositionMethod::Basic => decompose(&embed(series, window)?)?,
        DecompositionMethod::Toeplitz => decompose_toeplitz(series, window)?,
    };
    reconstruct_from(&ets, indices)
}

/// Reconstruction from an existing decomposition.
pub fn reconstruct_from(ets: &EigentripleSet, indices: &[usize]) -> Result<TimeSeries> {
    TimeSeries::new(hankelize(&group_matrix(ets, indices)?))
}

/// Subtracts the series mean; returns the centered series and the mean.
pub fn center(series: &TimeSeries) -> (TimeSeries, f64) {
    let mean = series.mean();
    let centered = series.iter().map(|v| v - mean).collect();
    (TimeSeries::new(centered).expect("length and finiteness preserved"), mean)
}

/// Ratio of the mean squared signal to the mean squared residual.
pub fn snr(signal: &[f64], residual: &[f64]) -> Result<f64> {
    if signal.len() != residual.len() {
        return Err(SsaError::LengthMismatch { left: signal.len(), right: residual.len() });
    }
    let rs: f64 = residual.iter().map(|r| r * r).sum();
    if rs == 0.0 {
        return Err(SsaError::ZeroResidual);
    }
    let ss: f64 = signal.iter().map(|s| s * s).sum();
    Ok(ss / rs)
}

/// A partition of eigentriple indices into disjoint groups (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grouping {
    groups: Vec<Vec<usize>>,
}

impl Grouping {
    pub fn new(groups: Vec<Vec<usize>>, count: usize) -> Result<Self> {
        let mut seen = vec![false; count];
        for g in &groups {
            for &i in g {
                if i >= count {
                    return Err(SsaError::IndexOutOfRange { index: i, count });
                }
                if seen[i] {
                    return Err(SsaError::GroupSyntax(format!("index {} appears twice", i + 1)));
                }
                seen[i] = true;
            }
        }
        Ok(Self { groups })
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Reconstructs every group; the components add up to the
    /// reconstruction by the union of the groups.
    pub fn reconstruct(&self, ets: &EigentripleSet) -> Result<Vec<Vec<f64>>> {
        self.groups.iter().map(|g| group_matrix(ets, g).map(|m| hankelize(&m))).collect()
    }
}

/// Parses 1-based eigentriple numbers such as `1,2,5-8` into sorted,
/// deduplicated 0-based indices.
pub fn parse_indices(spec: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let parse = |s: &str| -> Result<usize> {
            let v: usize =
                s.trim().parse().map_err(|_| SsaError::GroupSyntax(format!("'{s}' is not a positive integer")))?;
            if v == 0 {
                return Err(SsaError::GroupSyntax("eigentriple numbers start at 1".into()));
            }
            Ok(v - 1)
        };
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (parse(a)?, parse(b)?);
                if a > b {
                    return Err(SsaError::GroupSyntax(format!("empty range '{part}'")));
                }
                out.extend(a..=b);
            }
            None => out.push(parse(part)?),
        }
    }
    if out.is_empty() {
        return Err(SsaError::GroupSyntax("no indices given".into()));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}
