//! Signal subspaces, orthogonal projectors and the distance between
//! subspaces (sine of the largest principal angle).

use nalgebra::DMatrix;

use crate::error::{Result, SsaError};
use crate::linalg;
use crate::ssa::EigentripleSet;

const ORTHONORMAL_TOL: f64 = 1e-10;

/// Projectors are only materialized up to this dimension.
pub const MAX_PROJECTOR_DIM: usize = 4096;

/// L x r matrix with orthonormal columns, `1 <= r < L`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    columns: DMatrix<f64>,
}

impl SubspaceBasis {
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        let (l, r) = columns.shape();
        if r == 0 {
            return Err(SsaError::ZeroRank);
        }
        if r >= l {
            return Err(SsaError::RankTooLarge { rank: r, available: l.saturating_sub(1) });
        }
        let deviation = linalg::orthonormality_deviation(&columns);
        if !(deviation <= ORTHONORMAL_TOL) {
            return Err(SsaError::NotOrthonormal { deviation });
        }
        Ok(Self { columns })
    }

    /// Orthonormal basis of the column span of `m` (thin QR).
    pub fn spanning(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(linalg::orthonormalize(m.clone()))
    }

    /// Ambient dimension L.
    pub fn dim(&self) -> usize {
        self.columns.nrows()
    }

    /// Subspace dimension r.
    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.columns
    }

    /// Orthonormal basis of the orthogonal complement (dimension L - r).
    pub fn complement(&self) -> Result<SubspaceBasis> {
        let l = self.dim();
        let p_perp = DMatrix::identity(l, l) - &self.columns * self.columns.transpose();
        let (vals, vecs) = linalg::symmetric_eigen(&p_perp)?;
        let keep = vals.iter().filter(|&&v| v > 0.5).count();
        let mut m = vecs.columns(0, keep).into_owned();
        linalg::normalize_sign(&mut m, None);
        SubspaceBasis::new(m)
    }
}

/// Span of the `r` leading left vectors `u_1, ..., u_r`.
pub fn signal_basis(ets: &EigentripleSet, r: usize) -> Result<SubspaceBasis> {
    if r == 0 {
        return Err(SsaError::ZeroRank);
    }
    if r > ets.len() {
        return Err(SsaError::RankTooLarge { rank: r, available: ets.len() });
    }
    SubspaceBasis::new(ets.u().columns(0, r).into_owned())
}

/// Orthogonal projector `P = B B^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: DMatrix<f64>,
}

impl Projector {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// `I - P`.
    pub fn complement(&self) -> Projector {
        let l = self.matrix.nrows();
        Projector { matrix: DMatrix::identity(l, l) - &self.matrix }
    }
}

pub fn projector(basis: &SubspaceBasis) -> Result<Projector> {
    if basis.dim() > MAX_PROJECTOR_DIM {
        return Err(SsaError::DimensionMismatch(format!(
            "projector of dimension {} exceeds the {MAX_PROJECTOR_DIM} limit",
            basis.dim()
        )));
    }
    Ok(Projector { matrix: basis.matrix() * basis.matrix().transpose() })
}

/// `||P_A - P_B||_2`, the sine of the largest principal angle between two
/// r-dimensional subspaces of the same space.
///
/// Evaluated as the spectral norm of `(I - A A^T) B`. This equals
/// `sqrt(1 - sigma_min(A^T B)^2)` but keeps full relative accuracy when the
/// subspaces nearly coincide, where the cosine form cannot resolve distances
/// below about 1e-8.
pub fn subspace_distance(a: &SubspaceBasis, b: &SubspaceBasis) -> Result<f64> {
    if a.dim() != b.dim() || a.rank() != b.rank() {
        return Err(SsaError::DimensionMismatch(format!(
            "{}x{} basis vs {}x{} basis",
            a.dim(),
            a.rank(),
            b.dim(),
            b.rank()
        )));
    }
    let am = a.matrix();
    let bm = b.matrix();
    let resid = bm - am * (am.transpose() * bm);
    Ok(linalg::spectral_norm(&resid).clamp(0.0, 1.0))
}
