//! Complex signal roots and the rules for picking signal roots out of a
//! polynomial's root set.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Result, SsaError};

/// A set of nonzero complex poles, optionally with multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    poles: Vec<Complex64>,
    multiplicities: Vec<usize>,
}

impl PoleSet {
    /// Simple poles.
    pub fn new(poles: Vec<Complex64>) -> Result<Self> {
        let m = vec![1; poles.len()];
        Self::with_multiplicities(poles, m)
    }

    pub fn with_multiplicities(poles: Vec<Complex64>, multiplicities: Vec<usize>) -> Result<Self> {
        if poles.len() != multiplicities.len() {
            return Err(SsaError::LengthMismatch { left: poles.len(), right: multiplicities.len() });
        }
        if poles.iter().any(|p| p.norm() == 0.0) {
            return Err(SsaError::ZeroPole);
        }
        if poles.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(SsaError::OutOfDomain("non-finite pole".into()));
        }
        if multiplicities.iter().any(|&k| k == 0) {
            return Err(SsaError::OutOfDomain("zero multiplicity".into()));
        }
        Ok(Self { poles, multiplicities })
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    /// Total number of basis functions `sum k_m`.
    pub fn order(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// Merges poles closer than `tol` into one pole (their mean) whose
    /// multiplicity is the sum of the merged multiplicities.
    pub fn merge_close(&self, tol: f64) -> PoleSet {
        let mut poles: Vec<Complex64> = Vec::new();
        let mut mult: Vec<usize> = Vec::new();
        let mut sums: Vec<Complex64> = Vec::new();
        for (&p, &k) in self.poles.iter().zip(&self.multiplicities) {
            match poles.iter().position(|q| (q - p).norm() < tol) {
                Some(i) => {
                    sums[i] += p * k as f64;
                    mult[i] += k;
                    poles[i] = sums[i] / mult[i] as f64;
                }
                None => {
                    poles.push(p);
                    sums.push(p * k as f64);
                    mult.push(k);
                }
            }
        }
        PoleSet { poles, multiplicities: mult }
    }

    /// True when every non-real pole has its conjugate in the set (within `tol`).
    pub fn is_conjugate_closed(&self, tol: f64) -> bool {
        self.poles.iter().all(|p| p.im.abs() <= tol || self.poles.iter().any(|q| (q - p.conj()).norm() <= tol))
    }

    /// Largest distance in a greedy nearest-neighbour matching of the two
    /// pole sets; infinite when the sizes differ.
    pub fn max_matching_distance(&self, other: &PoleSet) -> f64 {
        max_matching_distance(&self.poles, &other.poles)
    }
}

/// Greedy matching distance between two root lists: each element of `a`
/// (in order of increasing best distance) claims its nearest unclaimed
/// element of `b`.
pub fn max_matching_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut worst = 0.0f64;
    for (d, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            worst = worst.max(d);
        }
    }
    worst
}

/// Normalized frequency `|arg z| / 2pi` in `[0, 0.5]`.
pub fn frequency_of(z: Complex64) -> f64 {
    z.arg().abs() / (2.0 * std::f64::consts::PI)
}

/// Orders roots by closeness of their modulus to 1, then by larger modulus,
/// then by smaller frequency.
pub fn unit_circle_order(a: &Complex64, b: &Complex64) -> Ordering {
    let da = (1.0 - a.norm()).abs();
    let db = (1.0 - b.norm()).abs();
    da.total_cmp(&db)
        .then_with(|| b.norm().total_cmp(&a.norm()))
        .then_with(|| frequency_of(*a).total_cmp(&frequency_of(*b)))
        .then_with(|| b.im.total_cmp(&a.im))
}

/// Picks `count` roots closest to the unit circle.
///
/// With `conjugate_pairs` (roots of a real polynomial) a complex root is
/// always taken together with its conjugate, so the result is closed under
/// conjugation; a pair is skipped if only one slot remains. Candidates lying
/// within `dedup_tol * max(1, |z|)` of an already chosen root are skipped.
/// Returns `None` when fewer than `count` roots can be chosen.
pub fn select_closest_to_unit_circle(
    roots: &[Complex64],
    count: usize,
    conjugate_pairs: bool,
    dedup_tol: f64,
) -> Option<Vec<Complex64>> {
    let mut cand: Vec<Complex64> =
        if conjugate_pairs { roots.iter().copied().filter(|z| z.im >= 0.0).collect() } else { roots.to_vec() };
    cand.sort_by(unit_circle_order);
    let mut chosen: Vec<Complex64> = Vec::with_capacity(count);
    for z in cand {
        if chosen.len() == count {
            break;
        }
        if chosen.iter().any(|c| (c - z).norm() <= dedup_tol * z.norm().max(1.0)) {
            continue;
        }
        let pair = conjugate_pairs && z.im > 0.0;
        let need = if pair { 2 } else { 1 };
        if chosen.len() + need > count {
            continue;
        }
        chosen.push(z);
        if pair {
            chosen.push(z.conj());
        }
    }
    (chosen.len() == count).then_some(chosen)
}
