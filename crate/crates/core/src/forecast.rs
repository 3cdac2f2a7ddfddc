//! Linear recurrent formulas: min-norm extraction from a signal subspace,
//! recurrent forecasting, characteristic roots and the explicit
//! `sum_m (sum_j c_mj n^j) mu_m^n` signal model.
//!
//! A recurrence of order `t = L - 1` is stored as the first `L - 1`
//! coordinates of its prediction vector:
//!
//! * forward: `(a_{L-1}, ..., a_1)` with `s_n = sum_k a_k s_{n-k}`, i.e. the
//!   vector `(a_{L-1}, ..., a_1, -1)` lies in the orthogonal complement of the
//!   signal subspace;
//! * backward: `(a_1, ..., a_{L-1})` with `s_n = sum_k a_k s_{n+k}`, i.e.
//!   `(-1, a_1, ..., a_{L-1})` lies in the complement.
//!
//! In both cases the characteristic polynomial is `z^t - sum_k a_k z^{t-k}`.
//! Forward signal roots are the poles `mu`; backward signal roots are
//! `conj(mu) / |mu|^2`, and extraneous roots of the min-norm recurrences lie
//! strictly inside the unit circle for both.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SsaError};
use crate::linalg;
use crate::poles::PoleSet;
use crate::series::TimeSeries;
use crate::ssa::{self, DecompositionMethod};
use crate::subspace::{signal_basis, SubspaceBasis};

/// Minimum gap `1 - nu^2` for a min-norm recurrence to exist.
pub const DEFAULT_VERTICALITY_MARGIN: f64 = 1e-10;
/// Forecast values beyond this magnitude abort with `ForecastDiverged`.
pub const DEFAULT_DIVERGENCE_BOUND: f64 = 1e100;
/// Poles closer than this are merged into one multiple pole when fitting.
pub const MULTIPLE_ROOT_TOL: f64 = 1e-8;
const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRecurrence {
    coeffs: Vec<f64>,
    direction: Direction,
    nu2: f64,
}

impl LinearRecurrence {
    /// A recurrence given directly by its stored coordinates (see module docs).
    pub fn from_coeffs(coeffs: Vec<f64>, direction: Direction) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(SsaError::OutOfDomain("recurrence of order 0".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(SsaError::OutOfDomain("non-finite recurrence coefficient".into()));
        }
        Ok(Self { coeffs, direction, nu2: 0.0 })
    }

    /// Builds a forward recurrence from lag coefficients `a_1, ..., a_t`.
    pub fn forward_from_lags(lags: &[f64]) -> Result<Self> {
        Self::from_coeffs(lags.iter().rev().copied().collect(), Direction::Forward)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Squared norm of the last (forward) or first (backward) row of the
    /// basis the recurrence was extracted from; 0 for hand-built ones.
    pub fn nu2(&self) -> f64 {
        self.nu2
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// `a_1, ..., a_t` in lag order.
    pub fn lag_coeffs(&self) -> Vec<f64> {
        match self.direction {
            Direction::Forward => self.coeffs.iter().rev().copied().collect(),
            Direction::Backward => self.coeffs.clone(),
        }
    }

    /// Ascending coefficients of `z^t - sum_k a_k z^{t-k}`, with high-lag
    /// zero coefficients removed so that no root is zero.
    pub fn characteristic_polynomial(&self) -> Result<Vec<f64>> {
        let mut lags = self.lag_coeffs();
        while lags.last() == Some(&0.0) {
            lags.pop();
        }
        if lags.is_empty() {
            return Err(SsaError::AllZeroCoefficients);
        }
        let t = lags.len();
        let mut poly = vec![0.0; t + 1];
        poly[t] = 1.0;
        for (k, a) in lags.iter().enumerate() {
            poly[t - (k + 1)] = -a;
        }
        Ok(poly)
    }

    /// One prediction step: for a forward recurrence `window` holds the last
    /// `t` values in time order.
    pub fn predict(&self, window: &[f64]) -> f64 {
        debug_assert_eq!(window.len(), self.coeffs.len());
        self.coeffs.iter().zip(window).map(|(a, x)| a * x).sum()
    }
}

/// Min-norm recurrence of a signal subspace:
/// `B = (1 / (1 - nu^2)) * sum_i pi_i * P_i'` where `pi_i` is the last
/// (forward) or first (backward) coordinate of basis column `P_i`, `P_i'` is
/// the column without that coordinate and `nu^2 = sum_i pi_i^2`.
pub fn min_norm_lrf(basis: &SubspaceBasis, direction: Direction) -> Result<LinearRecurrence> {
    min_norm_lrf_with_margin(basis.matrix(), direction, DEFAULT_VERTICALITY_MARGIN)
}

/// As [`min_norm_lrf`], for any matrix with orthonormal columns.
pub fn min_norm_lrf_with_margin(basis: &DMatrix<f64>, direction: Direction, margin: f64) -> Result<LinearRecurrence> {
    let l = basis.nrows();
    if l < 2 {
        return Err(SsaError::OutOfDomain("window must be at least 2".into()));
    }
    let (pi_row, body) = match direction {
        Direction::Forward => (l - 1, basis.rows(0, l - 1)),
        Direction::Backward => (0, basis.rows(1, l - 1)),
    };
    let pi = basis.row(pi_row).transpose();
    let nu2 = pi.norm_squared();
    if !(nu2 < 1.0 - margin) {
        return Err(SsaError::VerticalSubspace { nu2 });
    }
    let coeffs = (body * pi) / (1.0 - nu2);
    Ok(LinearRecurrence { coeffs: coeffs.iter().copied().collect(), direction, nu2 })
}

/// Applies a forward recurrence of order `t` to the last `t` values `seed`
/// and returns `steps` new values.
pub fn recurrent_forecast(seed: &[f64], lrf: &LinearRecurrence, steps: usize) -> Result<Vec<f64>> {
    recurrent_forecast_with_bound(seed, lrf, steps, DEFAULT_DIVERGENCE_BOUND)
}

pub fn recurrent_forecast_with_bound(
    seed: &[f64],
    lrf: &LinearRecurrence,
    steps: usize,
    bound: f64,
) -> Result<Vec<f64>> {
    if lrf.direction() != Direction::Forward {
        return Err(SsaError::BackwardForecast);
    }
    if steps == 0 {
        return Err(SsaError::ZeroSteps);
    }
    let t = lrf.order();
    if seed.len() != t {
        return Err(SsaError::SeedLength { got: seed.len(), expected: t });
    }
    let mut buf = seed.to_vec();
    buf.reserve(steps);
    for step in 0..steps {
        let next = lrf.predict(&buf[buf.len() - t..]);
        if !next.is_finite() || next.abs() > bound {
            return Err(SsaError::ForecastDiverged { step: step + 1, value: next.abs() });
        }
        buf.push(next);
    }
    Ok(buf.split_off(t))
}

/// Roots of the characteristic polynomial, as eigenvalues of its companion
/// matrix.
pub fn characteristic_roots(lrf: &LinearRecurrence) -> Result<PoleSet> {
    let poly = lrf.characteristic_polynomial()?;
    PoleSet::new(linalg::poly_roots(&poly)?)
}

/// `z' = conj(z) / |z|^2`: maps a forward signal root to the matching
/// backward one and back.
pub fn forward_backward_root_pair(z: Complex64) -> Result<Complex64> {
    let n2 = z.norm_sqr();
    if n2 == 0.0 {
        return Err(SsaError::ZeroInput);
    }
    Ok(z.conj() / n2)
}

/// One `mu_m` with its polynomial coefficients `c_{m0}, ..., c_{m,k-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelTerm {
    pub pole: Complex64,
    pub coeffs: Vec<Complex64>,
}

impl ModelTerm {
    pub fn multiplicity(&self) -> usize {
        self.coeffs.len()
    }

    /// Magnitude of the largest coefficient; small for extraneous poles.
    pub fn magnitude(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// `s_n = sum_m (sum_j c_mj n^j) mu_m^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalModel {
    pub terms: Vec<ModelTerm>,
}

impl SignalModel {
    pub fn evaluate(&self, n: usize) -> Complex64 {
        let nf = n as f64;
        self.terms
            .iter()
            .map(|t| {
                let poly = t.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * nf + c);
                poly * t.pole.powu(n as u32)
            })
            .sum()
    }

    /// Real parts of `s_0, ..., s_{len-1}`.
    pub fn evaluate_real(&self, len: usize) -> Vec<f64> {
        (0..len).map(|n| self.evaluate(n).re).collect()
    }
}

/// Least-squares fit of the explicit signal form over `n = 0..N-1` for the
/// given poles. Poles within [`MULTIPLE_ROOT_TOL`] of each other are merged
/// into one multiple pole. Fails when the column-equilibrated design matrix
/// has condition number above 1e12.
pub fn fit_signal_model(series: &[f64], poles: &PoleSet) -> Result<SignalModel> {
    let merged = poles.merge_close(MULTIPLE_ROOT_TOL);
    let n = series.len();
    let functions = merged.order();
    if functions > n {
        return Err(SsaError::TooManyBasisFunctions { functions, len: n });
    }
    if functions == 0 {
        return Ok(SignalModel { terms: Vec::new() });
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut design = DMatrix::from_element(n, functions, zero);
    let mut col = 0;
    for (&mu, &k) in merged.poles().iter().zip(merged.multiplicities()) {
        let mut pow = Complex64::new(1.0, 0.0);
        for t in 0..n {
            for j in 0..k {
                design[(t, col + j)] = pow * (t as f64).powi(j as i32);
            }
            pow *= mu;
        }
        col += k;
    }
    let scales: Vec<f64> = (0..functions)
        .map(|c| {
            let s = design.column(c).norm();
            if s > 0.0 && s.is_finite() {
                s
            } else {
                1.0
            }
        })
        .collect();
    if design.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SsaError::IllConditionedBasis { cond: f64::INFINITY });
    }
    for (c, s) in scales.iter().enumerate() {
        design.column_mut(c).unscale_mut(*s);
    }
    let rhs: Vec<Complex64> = series.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let (sol, cond) = linalg::complex_lstsq(&design, &rhs)?;
    if !(cond <= MAX_CONDITION) {
        return Err(SsaError::IllConditionedBasis { cond });
    }
    let mut terms = Vec::with_capacity(merged.len());
    let mut col = 0;
    for (&mu, &k) in merged.poles().iter().zip(merged.multiplicities()) {
        let coeffs = (0..k).map(|j| sol[col + j] / scales[col + j]).collect();
        terms.push(ModelTerm { pole: mu, coeffs });
        col += k;
    }
    Ok(SignalModel { terms })
}

/// Windows and rank for the SSA recurrent forecast.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForecastParams {
    /// Window used to reconstruct the signal whose tail seeds the forecast.
    pub reconstruction_window: usize,
    /// Window of the decomposition that supplies the min-norm recurrence.
    pub recurrence_window: usize,
    pub rank: usize,
    pub steps: usize,
    pub method: DecompositionMethod,
}

/// SSA recurrent forecast: reconstructs the signal with the leading `rank`
/// triples, extracts the min-norm recurrence from the leading `rank` left
/// vectors at the recurrence window and continues the reconstructed tail.
///
/// The Toeplitz method is accepted but unreliable for nonstationary series:
/// its eigenvectors do not span the trajectory space of a growing or damped
/// signal, and the resulting forecast can be badly wrong.
pub fn ssa_forecast(series: &TimeSeries, params: ForecastParams) -> Result<Vec<f64>> {
    let indices: Vec<usize> = (0..params.rank).collect();
    let rec = ssa::reconstruct(series, params.reconstruction_window, &indices, params.method)?;
    let ets = match params.method {
        DecompositionMethod::Basic => ssa::decompose(&ssa::embed(series, params.recurrence_window)?)?,
        DecompositionMethod::Toeplitz => ssa::decompose_toeplitz(series, params.recurrence_window)?,
    };
    let basis = signal_basis(&ets, params.rank)?;
    let lrf = min_norm_lrf(&basis, Direction::Forward)?;
    let seed = &rec[rec.len() - lrf.order()..];
    recurrent_forecast(seed, &lrf, params.steps)
}
