//! The universal input type and its CSV form.
//!
//! CSV layout: one numeric value per line, with an optional single header
//! line. Blank lines are ignored; NaN and infinities are rejected.

use std::io::{Read, Write};
use std::ops::Deref;

use crate::error::{Result, SsaError};

/// A finite real-valued sequence `f_0, ..., f_{N-1}` with `N >= 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries(Vec<f64>);

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(SsaError::SeriesTooShort { len: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SsaError::NonFinite { index });
        }
        Ok(Self(values))
    }

    /// Builds `f(0), ..., f(len-1)`.
    pub fn from_fn(len: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::new((0..len).map(f).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr =
            csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
        let mut values = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| SsaError::Parse(e.to_string()))?;
            let Some(field) = record.get(0) else { continue };
            if field.is_empty() {
                continue;
            }
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                Ok(_) => return Err(SsaError::Parse(format!("line {}: non-finite value '{field}'", line + 1))),
                // a single header line is allowed
                Err(_) if line == 0 => {}
                Err(_) => return Err(SsaError::Parse(format!("line {}: not a number: '{field}'", line + 1))),
            }
        }
        Self::new(values)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        Self::from_csv_reader(text.as_bytes())
    }
}

impl Deref for TimeSeries {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for TimeSeries {
    type Error = SsaError;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

/// Writes one value per line under an optional header. Uses the shortest
/// representation that round-trips.
pub fn write_values_csv<W: Write>(mut out: W, header: Option<&str>, values: &[f64]) -> std::io::Result<()> {
    if let Some(h) = header {
        writeln!(out, "{h}")?;
    }
    for v in values {
        writeln!(out, "{v}")?;
    }
    Ok(())
}
