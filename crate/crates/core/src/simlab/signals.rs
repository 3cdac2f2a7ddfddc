//! Catalog of test series: a deterministic signal plus a residual that is
//! either deterministic, white noise or AR(1) red noise. Time runs from
//! `n = 0`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SsaError};
use crate::poles::PoleSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    /// `s = 1`, `r = -c (-1)^n`.
    ConstSaw,
    /// `s = b^n cos(2 pi n / 10)`, `r = c`.
    DampedCosConst,
    /// Same signal, `r = sigma eps`.
    DampedCosWn,
    /// Same signal, `r = (sigma eps + c) / sqrt 2`.
    DampedCosMix,
    /// Same signal, `r = sigma eta` (red noise).
    DampedCosRn,
    /// `s = cos(2 pi n / 19) + cos(2 pi n / 21)`, `r = sigma * noise`.
    TwoCos,
    /// `s = cos(2 pi n^2 / 1e5) cos(2 pi n / 20)`, `r = sigma * noise`.
    ChirpAm,
    /// `s = cos(2 pi n^2 / 1e5)`, `r = sigma * noise + c cos(2 pi n / 10)`.
    ChirpTrendMix,
    /// `s = 1.005^n`, `r = sigma * noise`.
    ExpTrend,
    /// Sum of [`Term`]s, `r = sigma * noise`.
    Custom,
}

impl SignalKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::ConstSaw => "const_saw",
            Self::DampedCosConst => "damped_cos_const",
            Self::DampedCosWn => "damped_cos_wn",
            Self::DampedCosMix => "damped_cos_mix",
            Self::DampedCosRn => "damped_cos_rn",
            Self::TwoCos => "two_cos",
            Self::ChirpAm => "chirp_am",
            Self::ChirpTrendMix => "chirp_trend_mix",
            Self::ExpTrend => "exp_trend",
            Self::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    #[default]
    White,
    Red,
}

/// `amplitude * base^n * cos(2 pi frequency n + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub base: f64,
    #[serde(default)]
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

fn one() -> f64 {
    1.0
}
fn default_c() -> f64 {
    0.1
}
fn default_sigma() -> f64 {
    0.1
}
fn default_alpha() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub kind: SignalKind,
    pub n: usize,
    #[serde(default = "one")]
    pub b: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Noise type for the kinds whose residual is generic noise.
    #[serde(default)]
    pub noise: NoiseKind,
    #[serde(default)]
    pub terms: Vec<Term>,
}

impl SignalSpec {
    /// A spec with the usual parameters `b = 1`, `c = sigma = 0.1`,
    /// `alpha = 0.5` and white noise.
    pub fn new(kind: SignalKind, n: usize) -> Self {
        Self { kind, n, b: 1.0, c: 0.1, sigma: 0.1, alpha: 0.5, noise: NoiseKind::White, terms: Vec::new() }
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SsaError::InvalidSpec(m.into()));
        if self.n < 3 {
            return bad("series length must be at least 3");
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return bad("sigma must be a finite nonnegative number");
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return bad("alpha must lie in [0, 1)");
        }
        if !(self.b > 0.0) || !self.b.is_finite() {
            return bad("b must be positive");
        }
        if !self.c.is_finite() {
            return bad("c must be finite");
        }
        if self.kind == SignalKind::Custom {
            if self.terms.is_empty() {
                return bad("custom signal needs at least one term");
            }
            for t in &self.terms {
                if !(t.base > 0.0) || ![t.amplitude, t.base, t.frequency, t.phase].iter().all(|v| v.is_finite()) {
                    return bad("custom term needs finite values and a positive base");
                }
                if !(0.0..=0.5).contains(&t.frequency) {
                    return bad("custom term frequency must lie in [0, 0.5]");
                }
            }
        }
        Ok(())
    }

    /// Noise-free signal value at time `n` (also beyond the series end).
    pub fn signal_at(&self, n: usize) -> f64 {
        let nf = n as f64;
        let cos = |period: f64| (2.0 * PI * nf / period).cos();
        match self.kind {
            SignalKind::ConstSaw => 1.0,
            SignalKind::DampedCosConst
            | SignalKind::DampedCosWn
            | SignalKind::DampedCosMix
            | SignalKind::DampedCosRn => self.b.powf(nf) * cos(10.0),
            SignalKind::TwoCos => cos(19.0) + cos(21.0),
            SignalKind::ChirpAm => (2.0 * PI * nf * nf / 1e5).cos() * cos(20.0),
            SignalKind::ChirpTrendMix => (2.0 * PI * nf * nf / 1e5).cos(),
            SignalKind::ExpTrend => 1.005f64.powf(nf),
            SignalKind::Custom => self
                .terms
                .iter()
                .map(|t| t.amplitude * t.base.powf(nf) * (2.0 * PI * t.frequency * nf + t.phase).cos())
                .sum(),
        }
    }

    /// Rank of the signal, `None` for the chirps (not of finite rank).
    pub fn rank(&self) -> Option<usize> {
        match self.kind {
            SignalKind::ChirpAm | SignalKind::ChirpTrendMix => None,
            _ => Some(self.true_poles().map(|p| p.len()).unwrap_or(0)),
        }
    }

    /// Signal roots `mu` of `s_n = sum c mu^n`, when the signal has finite rank.
    pub fn true_poles(&self) -> Option<Vec<Complex64>> {
        let pair = |base: f64, f: f64| -> Vec<Complex64> {
            if f == 0.0 {
                vec![Complex64::new(base, 0.0)]
            } else if f == 0.5 {
                vec![Complex64::new(-base, 0.0)]
            } else {
                vec![Complex64::from_polar(base, 2.0 * PI * f), Complex64::from_polar(base, -2.0 * PI * f)]
            }
        };
        match self.kind {
            SignalKind::ConstSaw => Some(pair(1.0, 0.0)),
            SignalKind::DampedCosConst
            | SignalKind::DampedCosWn
            | SignalKind::DampedCosMix
            | SignalKind::DampedCosRn => Some(pair(self.b, 0.1)),
            SignalKind::TwoCos => Some([pair(1.0, 1.0 / 19.0), pair(1.0, 1.0 / 21.0)].concat()),
            SignalKind::ExpTrend => Some(pair(1.005, 0.0)),
            SignalKind::Custom => {
                let mut p: Vec<Complex64> = Vec::new();
                for t in &self.terms {
                    for z in pair(t.base, t.frequency) {
                        if !p.iter().any(|q| (q - z).norm() < 1e-12) {
                            p.push(z);
                        }
                    }
                }
                Some(p)
            }
            SignalKind::ChirpAm | SignalKind::ChirpTrendMix => None,
        }
    }

    pub fn true_pole_set(&self) -> Option<PoleSet> {
        self.true_poles().and_then(|p| PoleSet::new(p).ok())
    }

    pub fn signal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.signal_at(i)).collect()
    }

    /// Whether the residual contains a random component.
    pub fn is_random(&self) -> bool {
        !matches!(self.kind, SignalKind::ConstSaw | SignalKind::DampedCosConst) && self.sigma > 0.0
    }

    fn noise(&self, kind: NoiseKind, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match kind {
            NoiseKind::White => white_noise(self.n, rng),
            NoiseKind::Red => red_noise(self.n, self.alpha, rng),
        }
    }

    /// Residual for the given noise seed.
    pub fn residual(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.n;
        let (sigma, c) = (self.sigma, self.c);
        match self.kind {
            SignalKind::ConstSaw => (0..n).map(|i| if i % 2 == 0 { -c } else { c }).collect(),
            SignalKind::DampedCosConst => vec![c; n],
            SignalKind::DampedCosWn => scaled(self.noise(NoiseKind::White, &mut rng), sigma),
            SignalKind::DampedCosMix => {
                self.noise(NoiseKind::White, &mut rng).into_iter().map(|e| (sigma * e + c) / SQRT_2).collect()
            }
            SignalKind::DampedCosRn => scaled(self.noise(NoiseKind::Red, &mut rng), sigma),
            SignalKind::ChirpTrendMix => self
                .noise(self.noise, &mut rng)
                .into_iter()
                .enumerate()
                .map(|(i, e)| sigma * e + c * (2.0 * PI * i as f64 / 10.0).cos())
                .collect(),
            _ => scaled(self.noise(self.noise, &mut rng), sigma),
        }
    }
}

fn scaled(v: Vec<f64>, s: f64) -> Vec<f64> {
    v.into_iter().map(|x| x * s).collect()
}

pub fn white_noise(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Stationary AR(1) with unit variance: `eta_0 ~ N(0, 1)`,
/// `eta_n = alpha eta_{n-1} + sqrt(1 - alpha^2) z_n`.
pub fn red_noise(n: usize, alpha: f64, rng: &mut impl Rng) -> Vec<f64> {
    let scale = (1.0 - alpha * alpha).sqrt();
    let mut out = Vec::with_capacity(n);
    let mut prev: f64 = rng.sample(StandardNormal);
    for i in 0..n {
        if i > 0 {
            let z: f64 = rng.sample(StandardNormal);
            prev = alpha * prev + scale * z;
        }
        out.push(prev);
    }
    out
}

/// Signal and residual of one realization; their sum is the observed series.
pub fn gen_series(spec: &SignalSpec, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    spec.validate()?;
    Ok((spec.signal(), spec.residual(seed)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn const_saw_example() {
        let spec = SignalSpec::new(SignalKind::ConstSaw, 4);
        let (s, r) = gen_series(&spec, 1).unwrap();
        assert_eq!(s, vec![1.0; 4]);
        assert_eq!(r, vec![-0.1, 0.1, -0.1, 0.1]);
    }

    #[test]
    fn zero_sigma_gives_zero_residual() {
        let spec = SignalSpec { sigma: 0.0, ..SignalSpec::new(SignalKind::DampedCosWn, 50) };
        assert!(gen_series(&spec, 9).unwrap().1.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn red_noise_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = red_noise(1_000_000, 0.5, &mut rng);
        let n = x.len() as f64;
        let var = x.iter().map(|v| v * v).sum::<f64>() / n;
        let lag1 = x.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (n - 1.0);
        assert!((var - 1.0).abs() < 0.01, "{var}");
        assert!((lag1 / var - 0.5).abs() < 0.01, "{lag1}");
    }

    #[test]
    fn invalid_specs() {
        assert!(SignalSpec { alpha: 1.0, ..SignalSpec::new(SignalKind::DampedCosRn, 10) }.validate().is_err());
        assert!(SignalSpec { sigma: -1.0, ..SignalSpec::new(SignalKind::DampedCosWn, 10) }.validate().is_err());
        assert!(SignalSpec { b: 0.0, ..SignalSpec::new(SignalKind::DampedCosWn, 10) }.validate().is_err());
        assert!(SignalSpec::new(SignalKind::Custom, 10).validate().is_err());
    }

    #[test]
    fn ranks() {
        assert_eq!(SignalSpec::new(SignalKind::TwoCos, 10).rank(), Some(4));
        assert_eq!(SignalSpec::new(SignalKind::ExpTrend, 10).rank(), Some(1));
        assert_eq!(SignalSpec::new(SignalKind::ChirpAm, 10).rank(), None);
        let custom = SignalSpec {
            terms: vec![
                Term { amplitude: 1.0, base: 1.0, frequency: 0.0, phase: 0.0 },
                Term { amplitude: 2.0, base: 0.9, frequency: 0.2, phase: 0.3 },
            ],
            ..SignalSpec::new(SignalKind::Custom, 10)
        };
        assert_eq!(custom.rank(), Some(3));
    }

    #[test]
    fn spec_json_defaults() {
        let s: SignalSpec = serde_json::from_str(r#"{"kind":"damped_cos_rn","n":100}"#).unwrap();
        assert_eq!(s, SignalSpec::new(SignalKind::DampedCosRn, 100));
    }
}
