//! Subspace-based parameter estimation: LS/TLS-ESPRIT, Min-Norm, MUSIC and
//! EV pseudospectra, root-MUSIC and root-Min-Norm.
//!
//! Shift notation: for an L x r basis `A`, `A_up` drops the last row and
//! `A_down` drops the first one. A signal subspace satisfies
//! `A_up D = A_down` for a matrix `D` whose eigenvalues are the poles.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SsaError};
use crate::forecast::{characteristic_roots, forward_backward_root_pair, min_norm_lrf, Direction, LinearRecurrence};
use crate::linalg;
use crate::poles::{frequency_of, select_closest_to_unit_circle, PoleSet};
use crate::series::TimeSeries;
use crate::ssa::{self, TrajectoryMatrix};
use crate::subspace::{signal_basis, SubspaceBasis};

/// Default number of grid points on `[0, 0.5]`.
pub const DEFAULT_GRID: usize = 2048;
// relative singular value below which the shifted basis counts as rank deficient
const RANK_TOL: f64 = 1e-12;
const ROOT_DEDUP_TOL: f64 = 1e-6;
// floor for f(omega) so that pseudospectrum values stay finite
const ALIGNMENT_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftMethod {
    Ls,
    Tls,
}

/// Estimated shift matrix `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftMatrixEstimate {
    matrix: DMatrix<f64>,
    method: ShiftMethod,
}

impl ShiftMatrixEstimate {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn method(&self) -> ShiftMethod {
        self.method
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        linalg::eigenvalues(&self.matrix)
    }

    pub fn poles(&self) -> Result<PoleSet> {
        PoleSet::new(self.eigenvalues()?)
    }
}

fn shifted(basis: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (l, r) = basis.shape();
    if r == 0 {
        return Err(SsaError::ZeroRank);
    }
    if l < r + 1 {
        return Err(SsaError::RankTooLarge { rank: r, available: l.saturating_sub(1) });
    }
    Ok((basis.rows(0, l - 1).into_owned(), basis.rows(1, l - 1).into_owned()))
}

/// LS-ESPRIT: `D = pinv(A_up) A_down`.
pub fn esprit_ls(basis: &SubspaceBasis) -> Result<ShiftMatrixEstimate> {
    esprit_ls_matrix(basis.matrix())
}

/// LS-ESPRIT for any L x r matrix whose columns span the signal subspace
/// (orthonormality is not required).
pub fn esprit_ls_matrix(basis: &DMatrix<f64>) -> Result<ShiftMatrixEstimate> {
    let (up, down) = shifted(basis)?;
    let (s, u, v) = linalg::sorted_svd(&up)?;
    let r = basis.ncols();
    if s.len() < r || !(s[r - 1] > RANK_TOL * s[0]) {
        return Err(SsaError::RankDeficientShift);
    }
    let inv_s = DMatrix::from_diagonal(&DVector::from_iterator(r, s.iter().map(|x| 1.0 / x)));
    let matrix = v * inv_s * (u.transpose() * down);
    Ok(ShiftMatrixEstimate { matrix, method: ShiftMethod::Ls })
}

/// TLS-ESPRIT: from the SVD of `[A_up | A_down]`, with the right singular
/// matrix split into r x r blocks `[[V11, V12], [V21, V22]]`,
/// `D = -V12 V22^{-1}`.
pub fn esprit_tls(basis: &SubspaceBasis) -> Result<ShiftMatrixEstimate> {
    esprit_tls_matrix(basis.matrix())
}

pub fn esprit_tls_matrix(basis: &DMatrix<f64>) -> Result<ShiftMatrixEstimate> {
    let (up, down) = shifted(basis)?;
    let r = basis.ncols();
    // pad with zero rows so the SVD yields the full 2r x 2r right factor
    let rows = up.nrows().max(2 * r);
    let mut c = DMatrix::zeros(rows, 2 * r);
    c.view_mut((0, 0), (up.nrows(), r)).copy_from(&up);
    c.view_mut((0, r), (down.nrows(), r)).copy_from(&down);
    let (_, _, v) = linalg::sorted_svd(&c)?;
    let v12 = v.view((0, r), (r, r));
    let v22 = v.view((r, r), (r, r)).into_owned();
    let smin = linalg::singular_values(&v22)?.last().copied().unwrap_or(0.0);
    if !(smin > RANK_TOL) {
        return Err(SsaError::TlsDegenerate);
    }
    let inv = v22.try_inverse().ok_or(SsaError::TlsDegenerate)?;
    let matrix = -(v12 * inv);
    Ok(ShiftMatrixEstimate { matrix, method: ShiftMethod::Tls })
}

/// Frequency, damping and modulus of one pole. Peak-based estimators only
/// provide the frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRecord {
    /// Cycles per sample, in `[0, 0.5]`.
    pub frequency: f64,
    /// `ln |mu|` per sample.
    pub damping: Option<f64>,
    pub modulus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParamEstimates {
    pub records: Vec<ParamRecord>,
}

impl ParamEstimates {
    pub fn from_frequencies(freqs: &[f64]) -> Self {
        Self {
            records: freqs.iter().map(|&frequency| ParamRecord { frequency, damping: None, modulus: None }).collect(),
        }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.frequency).collect()
    }

    /// CSV with columns `frequency,damping,modulus`; missing values are blank.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["frequency", "damping", "modulus"])?;
        // values that print as zero print without a sign
        let fixed = |x: f64| if x.abs() < 5e-11 { "0.0000000000".to_string() } else { format!("{x:.10}") };
        let fmt = |v: Option<f64>| v.map(fixed).unwrap_or_default();
        for r in &self.records {
            w.write_record([fixed(r.frequency), fmt(r.damping), fmt(r.modulus)])?;
        }
        w.flush()
    }
}

/// One record per pole, in the order given.
pub fn poles_to_params(poles: &PoleSet) -> Result<ParamEstimates> {
    let mut records = Vec::with_capacity(poles.len());
    for &mu in poles.poles() {
        let m = mu.norm();
        if m == 0.0 {
            return Err(SsaError::ZeroPole);
        }
        records.push(ParamRecord { frequency: frequency_of(mu), damping: Some(m.ln()), modulus: Some(m) });
    }
    Ok(ParamEstimates { records })
}

/// For a real signal: drops the negative-frequency member of every
/// conjugate pair and sorts by frequency.
pub fn real_signal_params(poles: &PoleSet) -> Result<ParamEstimates> {
    let kept: Vec<Complex64> = poles.poles().iter().copied().filter(|z| z.im >= 0.0).collect();
    let mut p = poles_to_params(&PoleSet::new(kept)?)?;
    p.records.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PseudospectrumMethod {
    MinNorm,
    Music,
    Ev,
}

/// Values `1 / f(omega)` on an increasing frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pseudospectrum {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub method: PseudospectrumMethod,
}

impl Pseudospectrum {
    /// CSV with columns `omega,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["omega", "value"])?;
        for (o, v) in self.grid.iter().zip(&self.values) {
            w.write_record([format!("{o:.10}"), format!("{v:.10e}")])?;
        }
        w.flush()
    }
}

/// `size` equispaced points on `[0, 0.5]`, endpoints included.
pub fn frequency_grid(size: usize) -> Result<Vec<f64>> {
    if size < 2 {
        return Err(SsaError::GridTooSmall);
    }
    Ok((0..size).map(|i| 0.5 * i as f64 / (size - 1) as f64).collect())
}

// W(omega) = (1, e^{2 pi i omega}, ..., e^{2 pi i omega (L-1)})
fn steering(omega: f64, l: usize) -> Vec<Complex64> {
    (0..l).map(|k| Complex64::from_polar(1.0, 2.0 * PI * omega * k as f64)).collect()
}

fn inner(w: &[Complex64], col: nalgebra::DVectorView<'_, f64>) -> Complex64 {
    w.iter().zip(col.iter()).map(|(z, &x)| z.conj() * x).sum()
}

fn evaluate(grid: Vec<f64>, method: PseudospectrumMethod, f: impl Fn(f64) -> f64 + Sync) -> Pseudospectrum {
    let values = grid.par_iter().map(|&o| 1.0 / f(o).max(ALIGNMENT_FLOOR)).collect();
    Pseudospectrum { grid, values, method }
}

/// Min-Norm: `f(omega) = cos^2` of the angle between `W(omega)` and the
/// min-norm vector `A = (I - P) e_L`.
#[derive(Debug, Clone)]
pub struct MinNormEstimator {
    a: DVector<f64>,
}

impl MinNormEstimator {
    pub fn new(basis: &SubspaceBasis) -> Result<Self> {
        let b = basis.matrix();
        let l = b.nrows();
        let last = b.row(l - 1).transpose();
        let nu2 = last.norm_squared();
        if !(nu2 < 1.0 - crate::forecast::DEFAULT_VERTICALITY_MARGIN) {
            return Err(SsaError::VerticalSubspace { nu2 });
        }
        let mut a = -(b * last);
        a[l - 1] += 1.0;
        Ok(Self { a })
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.a
    }

    pub fn alignment(&self, omega: f64) -> f64 {
        let l = self.a.len();
        let w = steering(omega, l);
        inner(&w, self.a.column(0)).norm_sqr() / (l as f64 * self.a.norm_squared())
    }

    pub fn pseudospectrum(&self, grid_size: usize) -> Result<Pseudospectrum> {
        Ok(evaluate(frequency_grid(grid_size)?, PseudospectrumMethod::MinNorm, |o| self.alignment(o)))
    }
}

/// MUSIC (`f = sum_j |<W, U_j>|^2 / L`) and EV (each term divided by the
/// eigenvalue `lambda_j` of its noise vector).
#[derive(Debug, Clone)]
pub struct MusicEstimator {
    noise: DMatrix<f64>,
    weights: Option<Vec<f64>>,
}

impl MusicEstimator {
    /// `noise` has orthonormal columns spanning the noise subspace.
    pub fn new(noise: &DMatrix<f64>) -> Result<Self> {
        if noise.ncols() == 0 {
            return Err(SsaError::EmptyNoiseBasis);
        }
        let deviation = linalg::orthonormality_deviation(noise);
        if !(deviation <= 1e-10) {
            return Err(SsaError::NotOrthonormal { deviation });
        }
        Ok(Self { noise: noise.clone(), weights: None })
    }

    /// EV weighting with the eigenvalues of the noise vectors.
    pub fn ev(noise: &DMatrix<f64>, eigenvalues: &[f64]) -> Result<Self> {
        let mut m = Self::new(noise)?;
        if eigenvalues.len() != noise.ncols() {
            return Err(SsaError::LengthMismatch { left: noise.ncols(), right: eigenvalues.len() });
        }
        if let Some((index, &value)) = eigenvalues.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
            return Err(SsaError::NonpositiveEigenvalue { index, value });
        }
        m.weights = Some(eigenvalues.iter().map(|v| 1.0 / v).collect());
        Ok(m)
    }

    pub fn method(&self) -> PseudospectrumMethod {
        if self.weights.is_some() {
            PseudospectrumMethod::Ev
        } else {
            PseudospectrumMethod::Music
        }
    }

    pub fn alignment(&self, omega: f64) -> f64 {
        let l = self.noise.nrows();
        let w = steering(omega, l);
        let total: f64 = (0..self.noise.ncols())
            .map(|j| {
                let t = inner(&w, self.noise.column(j)).norm_sqr();
                match &self.weights {
                    Some(ws) => t * ws[j],
                    None => t,
                }
            })
            .sum();
        total / l as f64
    }

    pub fn pseudospectrum(&self, grid_size: usize) -> Result<Pseudospectrum> {
        Ok(evaluate(frequency_grid(grid_size)?, self.method(), |o| self.alignment(o)))
    }
}

/// Noise basis (columns `r..L` of the left eigenvectors of `X X^T`) and the
/// matching eigenvalues.
pub fn noise_subspace(x: &TrajectoryMatrix, r: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let (vals, u) = ssa::left_spectrum(x)?;
    let l = u.nrows();
    if r == 0 {
        return Err(SsaError::ZeroRank);
    }
    if r >= l {
        return Err(SsaError::EmptyNoiseBasis);
    }
    Ok((u.columns(r, l - r).into_owned(), vals[r..].to_vec()))
}

/// Ascending coefficients of `z^{L-1} sum_j |<Z(z), U_j>|^2`, a
/// self-reciprocal polynomial of degree `2(L-1)`.
pub fn root_music_polynomial(noise: &DMatrix<f64>) -> Vec<f64> {
    let l = noise.nrows();
    let mut poly = vec![0.0; 2 * l - 1];
    for j in 0..noise.ncols() {
        let col = noise.column(j);
        for d in 0..l {
            let c: f64 = (0..l - d).map(|i| col[i] * col[i + d]).sum();
            poly[l - 1 + d] += c;
            if d > 0 {
                poly[l - 1 - d] += c;
            }
        }
    }
    poly
}

/// root-MUSIC: the `r` roots of the root-MUSIC polynomial closest to the unit
/// circle, taken inside or on it.
///
/// Roots come in reciprocal pairs `(z, 1/conj z)`; roots outside the circle
/// are reflected inside and numerically coincident ones merged before
/// selection, so that a root on the circle (a double root) is counted once.
/// For a growing signal pole `mu` (|mu| > 1) the estimate is `1/conj(mu)`.
pub fn root_music(noise: &DMatrix<f64>, r: usize) -> Result<PoleSet> {
    if noise.ncols() == 0 {
        return Err(SsaError::EmptyNoiseBasis);
    }
    let mut poly = root_music_polynomial(noise);
    // zero low-order coefficients are zero roots, which carry no information
    let lead = poly.iter().position(|&c| c != 0.0).ok_or(SsaError::AllZeroCoefficients)?;
    poly.drain(..lead);
    let roots = linalg::poly_roots(&poly)?;
    let inside: Vec<Complex64> =
        roots.into_iter().map(|z| if z.norm() > 1.0 { z.conj() / z.norm_sqr() } else { z }).collect();
    let found = inside.len();
    select_closest_to_unit_circle(&inside, r, true, ROOT_DEDUP_TOL)
        .ok_or(SsaError::TooFewRootsInside { found, wanted: r })
        .and_then(PoleSet::new)
}

/// root-Min-Norm: the `r` characteristic roots of a min-norm recurrence
/// closest to the unit circle.
pub fn root_min_norm(lrf: &LinearRecurrence, r: usize) -> Result<PoleSet> {
    let roots = characteristic_roots(lrf)?;
    let found = roots.len();
    select_closest_to_unit_circle(roots.poles(), r, true, 0.0)
        .ok_or(SsaError::TooFewRoots { found, wanted: r })
        .and_then(PoleSet::new)
}

/// Experimental: signal roots as the `r` forward min-norm roots that best
/// match a backward min-norm root mapped through `z -> 1/conj z`. Extraneous
/// roots of the two recurrences do not match in general.
pub fn pooled_roots(basis: &SubspaceBasis, r: usize) -> Result<PoleSet> {
    let fwd = characteristic_roots(&min_norm_lrf(basis, Direction::Forward)?)?;
    let bwd = characteristic_roots(&min_norm_lrf(basis, Direction::Backward)?)?;
    let mapped: Vec<Complex64> = bwd.poles().iter().map(|&z| forward_backward_root_pair(z)).collect::<Result<_>>()?;
    let mut scored: Vec<(f64, Complex64)> = fwd
        .poles()
        .iter()
        .map(|&z| {
            let d = mapped.iter().map(|m| (m - z).norm()).fold(f64::INFINITY, f64::min);
            (d / z.norm().max(1.0), z)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    if scored.len() < r {
        return Err(SsaError::TooFewRoots { found: scored.len(), wanted: r });
    }
    PoleSet::new(scored.into_iter().take(r).map(|(_, z)| z).collect())
}

/// Frequencies of the `count` highest interior local maxima, ascending,
/// each refined by a parabola through the log-values of its neighbours.
pub fn find_peaks(ps: &Pseudospectrum, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(SsaError::OutOfDomain("peak count must be at least 1".into()));
    }
    let v = &ps.values;
    let n = v.len();
    let mut peaks: Vec<usize> = (1..n.saturating_sub(1)).filter(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1]).collect();
    if peaks.len() < count {
        return Err(SsaError::TooFewPeaks { found: peaks.len(), wanted: count });
    }
    peaks.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
    let mut out: Vec<f64> = peaks[..count]
        .iter()
        .map(|&i| {
            let (y0, y1, y2) = (v[i - 1].ln(), v[i].ln(), v[i + 1].ln());
            let denom = y0 - 2.0 * y1 + y2;
            let delta = if denom < 0.0 { (0.5 * (y0 - y2) / denom).clamp(-0.5, 0.5) } else { 0.0 };
            let h = 0.5 * (ps.grid[i + 1] - ps.grid[i - 1]);
            ps.grid[i] + delta * h
        })
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Estimation methods available to [`estimate_params`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimationMethod {
    EspritLs,
    EspritTls,
    RootMusic,
    RootMinNorm,
    MinNorm,
    Music,
    Ev,
}

impl EstimationMethod {
    pub const ALL: [EstimationMethod; 7] =
        [Self::EspritLs, Self::EspritTls, Self::RootMusic, Self::RootMinNorm, Self::MinNorm, Self::Music, Self::Ev];

    pub fn name(self) -> &'static str {
        match self {
            Self::EspritLs => "esprit-ls",
            Self::EspritTls => "esprit-tls",
            Self::RootMusic => "root-music",
            Self::RootMinNorm => "root-minnorm",
            Self::MinNorm => "minnorm",
            Self::Music => "music",
            Self::Ev => "ev",
        }
    }

    /// Whether the method returns pole estimates (as opposed to peaks).
    pub fn gives_poles(self) -> bool {
        matches!(self, Self::EspritLs | Self::EspritTls | Self::RootMusic | Self::RootMinNorm)
    }
}

impl fmt::Display for EstimationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimationMethod {
    type Err = SsaError;

    fn from_str(s: &str) -> Result<Self> {
        let s = match s {
            "root-min-norm" => "root-minnorm",
            "min-norm" => "minnorm",
            other => other,
        };
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| SsaError::Parse(format!("unknown estimation method '{s}'")))
    }
}

/// Pole estimates of a series with window `window` and signal rank `rank`.
pub fn estimate_poles(series: &TimeSeries, window: usize, rank: usize, method: EstimationMethod) -> Result<PoleSet> {
    let x = ssa::embed(series, window)?;
    let basis = || -> Result<SubspaceBasis> { signal_basis(&ssa::decompose(&x)?, rank) };
    match method {
        EstimationMethod::EspritLs => esprit_ls(&basis()?)?.poles(),
        EstimationMethod::EspritTls => esprit_tls(&basis()?)?.poles(),
        EstimationMethod::RootMinNorm => root_min_norm(&min_norm_lrf(&basis()?, Direction::Forward)?, rank),
        EstimationMethod::RootMusic => root_music(&noise_subspace(&x, rank)?.0, rank),
        other => Err(SsaError::OutOfDomain(format!("{other} does not estimate poles"))),
    }
}

/// Pseudospectrum of a series for the min-norm, music or ev methods.
pub fn estimate_pseudospectrum(
    series: &TimeSeries,
    window: usize,
    rank: usize,
    method: EstimationMethod,
    grid_size: usize,
) -> Result<Pseudospectrum> {
    let x = ssa::embed(series, window)?;
    match method {
        EstimationMethod::MinNorm => {
            MinNormEstimator::new(&signal_basis(&ssa::decompose(&x)?, rank)?)?.pseudospectrum(grid_size)
        }
        EstimationMethod::Music => MusicEstimator::new(&noise_subspace(&x, rank)?.0)?.pseudospectrum(grid_size),
        EstimationMethod::Ev => {
            let (noise, vals) = noise_subspace(&x, rank)?;
            MusicEstimator::ev(&noise, &vals)?.pseudospectrum(grid_size)
        }
        other => Err(SsaError::OutOfDomain(format!("{other} has no pseudospectrum"))),
    }
}

/// Frequency (and, for pole methods, damping) estimates for a real series.
/// Peak methods report `max(1, rank / 2)` peaks.
pub fn estimate_params(
    series: &TimeSeries,
    window: usize,
    rank: usize,
    method: EstimationMethod,
) -> Result<ParamEstimates> {
    if method.gives_poles() {
        real_signal_params(&estimate_poles(series, window, rank, method)?)
    } else {
        let ps = estimate_pseudospectrum(series, window, rank, method, DEFAULT_GRID)?;
        Ok(ParamEstimates::from_frequencies(&find_peaks(&ps, (rank / 2).max(1))?))
    }
}
