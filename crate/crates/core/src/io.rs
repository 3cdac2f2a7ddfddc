//! JSON interchange formats for decompositions and signal models.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SsaError};
use crate::forecast::{ModelTerm, SignalModel};
use crate::poles::frequency_of;
use crate::ssa::{DecompositionMethod, EigentripleSet};

/// `{method, L, K, sigmas, u, v}` with `u[i]` / `v[i]` the i-th left / right
/// vector; `mean` is present when the series was centered first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigentripleSetJson {
    pub method: DecompositionMethod,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub sigmas: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
}

impl EigentripleSetJson {
    pub fn new(ets: &EigentripleSet, mean: Option<f64>) -> Self {
        let cols = |m: &DMatrix<f64>| m.column_iter().map(|c| c.iter().copied().collect()).collect();
        Self {
            method: ets.method(),
            l: ets.window(),
            k: ets.k(),
            sigmas: ets.sigmas().to_vec(),
            u: cols(ets.u()),
            v: cols(ets.v()),
            mean,
        }
    }

    pub fn to_set(&self) -> Result<EigentripleSet> {
        let d = self.sigmas.len();
        if self.u.len() != d || self.v.len() != d {
            return Err(SsaError::DimensionMismatch(format!(
                "{d} sigmas, {} u-vectors, {} v-vectors",
                self.u.len(),
                self.v.len()
            )));
        }
        if self.u.iter().any(|c| c.len() != self.l) || self.v.iter().any(|c| c.len() != self.k) {
            return Err(SsaError::DimensionMismatch("vector lengths do not match L and K".into()));
        }
        let u = DMatrix::from_fn(self.l, d, |i, j| self.u[j][i]);
        let v = DMatrix::from_fn(self.k, d, |i, j| self.v[j][i]);
        EigentripleSet::from_parts(self.method, self.sigmas.clone(), u, v)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SsaError::Parse(format!("eigentriple JSON: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexJson> for Complex64 {
    fn from(z: ComplexJson) -> Self {
        Complex64::new(z.re, z.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelTermJson {
    pub pole: ComplexJson,
    /// Derived from the pole, for reading convenience.
    pub frequency: f64,
    pub modulus: f64,
    pub coeffs: Vec<ComplexJson>,
}

/// `{terms: [{pole, frequency, modulus, coeffs}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalModelJson {
    pub terms: Vec<ModelTermJson>,
}

impl From<&SignalModel> for SignalModelJson {
    fn from(m: &SignalModel) -> Self {
        Self {
            terms: m
                .terms
                .iter()
                .map(|t| ModelTermJson {
                    pole: t.pole.into(),
                    frequency: frequency_of(t.pole),
                    modulus: t.pole.norm(),
                    coeffs: t.coeffs.iter().map(|&c| c.into()).collect(),
                })
                .collect(),
        }
    }
}

impl From<&SignalModelJson> for SignalModel {
    fn from(m: &SignalModelJson) -> Self {
        SignalModel {
            terms: m
                .terms
                .iter()
                .map(|t| ModelTerm { pole: t.pole.into(), coeffs: t.coeffs.iter().map(|&c| c.into()).collect() })
                .collect(),
        }
    }
}
