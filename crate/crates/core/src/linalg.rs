//! Dense linear-algebra helpers shared by the analysis modules: sorted SVD,
//! sign normalization, a structured Hankel operator with a truncated SVD,
//! and polynomial roots through balanced companion matrices.

use std::sync::{Arc, Once};

use faer::{Mat, Par, Side};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Result, SsaError};

// Results must not depend on how many threads are around (the simulation
// runs replications on a pool of configurable size), so factorizations run
// sequentially; callers parallelize at a coarser grain.
fn sequential() {
    static ONCE: Once = Once::new();
    ONCE.call_once(|| faer::set_global_parallelism(Par::Seq));
}

fn to_faer(m: &DMatrix<f64>) -> Mat<f64> {
    sequential();
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(SsaError::DecompositionFailed("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Thin SVD with singular values sorted nonincreasing.
/// Returns `(sigmas, U, V)` with `U` of size rows x p and `V` of size cols x p.
pub fn sorted_svd(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>, DMatrix<f64>)> {
    check_finite(m)?;
    let p = m.nrows().min(m.ncols());
    if p == 0 {
        return Ok((Vec::new(), DMatrix::zeros(m.nrows(), 0), DMatrix::zeros(m.ncols(), 0)));
    }
    let svd = to_faer(m).thin_svd().map_err(|e| SsaError::DecompositionFailed(format!("SVD failed: {e:?}")))?;
    let s = svd.S().column_vector();
    let mut order: Vec<usize> = (0..p).collect();
    // stable: equal singular values keep backend order
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let sigmas = order.iter().map(|&i| s[i]).collect();
    let (u, v) = (svd.U(), svd.V());
    let u_sorted = DMatrix::from_fn(m.nrows(), p, |r, c| u[(r, order[c])]);
    let v_sorted = DMatrix::from_fn(m.ncols(), p, |r, c| v[(r, order[c])]);
    Ok((sigmas, u_sorted, v_sorted))
}

/// Singular values, nonincreasing.
pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_finite(m)?;
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let mut s =
        to_faer(m).singular_values().map_err(|e| SsaError::DecompositionFailed(format!("SVD failed: {e:?}")))?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Eigen-decomposition of a symmetric matrix: eigenvalues nonincreasing and
/// the matching orthonormal eigenvectors as columns.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    check_finite(m)?;
    let n = m.nrows();
    let eig = to_faer(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| SsaError::DecompositionFailed(format!("symmetric eigensolver failed: {e:?}")))?;
    let s = eig.S().column_vector();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let vals = order.iter().map(|&i| s[i]).collect();
    let u = eig.U();
    Ok((vals, DMatrix::from_fn(n, n, |r, c| u[(r, order[c])])))
}

/// Least-squares solution of a complex system through the SVD, together
/// with the 2-norm condition number of `a`.
pub fn complex_lstsq(a: &DMatrix<Complex64>, b: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
    let (m, n) = a.shape();
    sequential();
    let fa = Mat::<Complex64>::from_fn(m, n, |i, j| a[(i, j)]);
    let svd = fa.thin_svd().map_err(|e| SsaError::DecompositionFailed(format!("complex SVD failed: {e:?}")))?;
    let s: Vec<f64> = (0..m.min(n)).map(|i| svd.S().column_vector()[i].re).collect();
    let p = m.min(n);
    let smax = (0..p).map(|i| s[i]).fold(0.0, f64::max);
    let smin = (0..p).map(|i| s[i]).fold(f64::INFINITY, f64::min);
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let (u, v) = (svd.U(), svd.V());
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..p {
        if s[k] == 0.0 {
            continue;
        }
        let coef: Complex64 = (0..m).map(|i| u[(i, k)].conj() * b[i]).sum::<Complex64>() / s[k];
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += v[(j, k)] * coef;
        }
    }
    Ok((x, cond))
}

/// Flips column `j` of `u` (and of `v`, when given) so that the entry of
/// largest magnitude in `u[:, j]` is positive. Among entries tied in
/// magnitude (to 1e-9 relative) the first one decides.
pub fn normalize_sign(u: &mut DMatrix<f64>, mut v: Option<&mut DMatrix<f64>>) {
    for j in 0..u.ncols() {
        let col = u.column(j);
        let max = col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if max == 0.0 {
            continue;
        }
        let lead = col.iter().copied().find(|x| x.abs() >= max * (1.0 - 1e-9)).unwrap_or(0.0);
        if lead < 0.0 {
            u.column_mut(j).neg_mut();
            if let Some(v) = v.as_deref_mut() {
                v.column_mut(j).neg_mut();
            }
        }
    }
}

/// Largest absolute entry of `M^T M - I`.
pub fn orthonormality_deviation(m: &DMatrix<f64>) -> f64 {
    let g = m.transpose() * m;
    let mut dev = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((g[(i, j)] - target).abs());
        }
    }
    dev
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    match singular_values(m) {
        Ok(s) => s.first().copied().unwrap_or(0.0),
        Err(_) => f64::NAN,
    }
}

/// Orthonormalizes the columns of `m` (thin QR, Q factor).
pub fn orthonormalize(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

// products below this size use direct loops; larger ones go through FFTs
const FFT_THRESHOLD: usize = 1 << 16;

/// The L x K Hankel matrix `X[i][j] = f[i + j]` held implicitly by its
/// generating series. Matrix-vector products cost O(N log N) for large
/// matrices.
pub struct HankelOperator {
    f: Vec<f64>,
    rows: usize,
    cols: usize,
    fft: Option<HankelFft>,
}

struct HankelFft {
    size: usize,
    spectrum: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl HankelOperator {
    /// `f.len()` must equal `rows + cols - 1`.
    pub fn new(f: &[f64], rows: usize) -> Self {
        assert!(rows >= 1 && rows <= f.len());
        let cols = f.len() - rows + 1;
        let fft = if rows * cols >= FFT_THRESHOLD {
            let size = (f.len() + rows.max(cols) - 1).next_power_of_two();
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(size);
            let inverse = planner.plan_fft_inverse(size);
            let mut spectrum: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            spectrum.resize(size, Complex64::new(0.0, 0.0));
            forward.process(&mut spectrum);
            Some(HankelFft { size, spectrum, forward, inverse })
        } else {
            None
        };
        Self { f: f.to_vec(), rows, cols, fft }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.f[i + j])
    }

    // out[m] = sum_t f[m + t] x[t], m < out_len
    fn correlate(&self, x: &[f64], out_len: usize) -> Vec<f64> {
        match &self.fft {
            None => (0..out_len)
                .map(|m| {
                    let seg = &self.f[m..m + x.len()];
                    seg.iter().zip(x).map(|(a, b)| a * b).sum()
                })
                .collect(),
            Some(h) => {
                let t = x.len();
                let mut buf = vec![Complex64::new(0.0, 0.0); h.size];
                for (i, &v) in x.iter().rev().enumerate() {
                    buf[i] = Complex64::new(v, 0.0);
                }
                h.forward.process(&mut buf);
                for (b, s) in buf.iter_mut().zip(&h.spectrum) {
                    *b *= s;
                }
                h.inverse.process(&mut buf);
                let scale = 1.0 / h.size as f64;
                (0..out_len).map(|m| buf[m + t - 1].re * scale).collect()
            }
        }
    }

    /// `X w` for `w` of length K.
    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        debug_assert_eq!(w.len(), self.cols);
        self.correlate(w, self.rows)
    }

    /// `X^T q` for `q` of length L.
    pub fn apply_t(&self, q: &[f64]) -> Vec<f64> {
        debug_assert_eq!(q.len(), self.rows);
        self.correlate(q, self.cols)
    }

    pub fn apply_block(&self, w: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rows, w.ncols());
        for c in 0..w.ncols() {
            let col: Vec<f64> = w.column(c).iter().copied().collect();
            out.set_column(c, &DVector::from_vec(self.apply(&col)));
        }
        out
    }

    pub fn apply_t_block(&self, q: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.cols, q.ncols());
        for c in 0..q.ncols() {
            let col: Vec<f64> = q.column(c).iter().copied().collect();
            out.set_column(c, &DVector::from_vec(self.apply_t(&col)));
        }
        out
    }

    /// Leading `r` singular triples by block subspace iteration with
    /// Rayleigh-Ritz extraction. Converges when every returned triple has
    /// residual `||X v - sigma u||` below `1e-11 * sigma_1`.
    pub fn leading_svd(&self, r: usize) -> Result<(Vec<f64>, DMatrix<f64>, DMatrix<f64>)> {
        let min_dim = self.rows.min(self.cols);
        if r == 0 {
            return Err(SsaError::ZeroRank);
        }
        if r > min_dim {
            return Err(SsaError::RankTooLarge { rank: r, available: min_dim });
        }
        // small problems: dense SVD is both faster and exact
        if self.rows * self.cols <= 4096 || r + 2 >= min_dim {
            let (s, u, v) = sorted_svd(&self.to_dense())?;
            let mut u = u.columns(0, r).into_owned();
            let mut v = v.columns(0, r).into_owned();
            normalize_sign(&mut u, Some(&mut v));
            return Ok((s[..r].to_vec(), u, v));
        }

        let p = (r + 10).min(min_dim);
        // deterministic start: X applied to a fixed pseudo-random block
        let mut state = 0x9E37_79B9_7F4A_7C15u64;
        let omega = DMatrix::from_fn(self.cols, p, |_, _| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        });
        let mut q = orthonormalize(self.apply_block(&omega));

        const MAX_ITER: usize = 2000;
        let mut best = f64::INFINITY;
        let mut stalled = 0;
        for _ in 0..MAX_ITER {
            let w = self.apply_t_block(&q); // K x p = X^T Q
                                            // Q^T X = W^T = V_w S U_w^T: left vectors Q V_w, right vectors U_w
            let (sig, right, vw) = sorted_svd(&w)?;
            let left = &q * &vw;

            let y = self.apply_block(&w); // X X^T Q
            let sigma1 = sig[0];
            if sigma1 == 0.0 {
                return Err(SsaError::RankTooLarge { rank: r, available: 0 });
            }
            // X u_w,i = Y V_w e_i / sigma_i
            let xv = &y * &vw;
            let mut worst = 0.0f64;
            for i in 0..r {
                if sig[i] <= 0.0 {
                    worst = f64::INFINITY;
                    break;
                }
                let res = (xv.column(i) / sig[i] - left.column(i) * sig[i]).norm();
                worst = worst.max(res);
            }
            let tol = 1e-11 * sigma1;
            if worst <= tol || (stalled >= 8 && worst <= 1e-9 * sigma1) {
                let mut u = left.columns(0, r).into_owned();
                let mut v = right.columns(0, r).into_owned();
                normalize_sign(&mut u, Some(&mut v));
                return Ok((sig[..r].to_vec(), u, v));
            }
            if worst < 0.9 * best {
                best = worst;
                stalled = 0;
            } else {
                stalled += 1;
            }
            q = orthonormalize(y);
        }
        Err(SsaError::DecompositionFailed("subspace iteration did not converge".into()))
    }
}

/// Evaluates a polynomial given by ascending coefficients.
pub fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn horner_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    let mut p = zero;
    let mut dp = zero;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

// Parlett-Reinsch balancing with radix 2; similarity, so eigenvalues are kept.
fn balance(a: &mut DMatrix<f64>) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let ginv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= ginv;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// Eigenvalues of a general real square matrix (balanced, then real Schur form).
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(SsaError::EigenFailed);
    }
    if n == 1 {
        return Ok(vec![Complex64::new(m[(0, 0)], 0.0)]);
    }
    let mut a = m.clone();
    balance(&mut a);
    to_faer(&a).eigenvalues().map_err(|_| SsaError::EigenFailed)
}

/// Companion matrix of the monic polynomial with ascending coefficients
/// `coeffs` (leading coefficient normalized away): ones on the subdiagonal
/// and `-c_n, ..., -c_1` down the last column.
pub fn companion(coeffs: &[f64]) -> DMatrix<f64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let mut c = DMatrix::zeros(n, n);
    for i in 1..n {
        c[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        c[(i, n - 1)] = -coeffs[i] / lead;
    }
    c
}

/// All roots of the polynomial `sum_k coeffs[k] z^k`, via eigenvalues of the
/// balanced companion matrix followed by guarded Newton polishing.
/// Leading zero coefficients are dropped (roots at infinity).
pub fn poly_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let mut deg = coeffs.len();
    while deg > 0 && coeffs[deg - 1] == 0.0 {
        deg -= 1;
    }
    if deg == 0 {
        return Err(SsaError::AllZeroCoefficients);
    }
    let coeffs = &coeffs[..deg];
    if deg == 1 {
        return Ok(Vec::new());
    }
    let mut roots = eigenvalues(&companion(coeffs))?;
    for z in roots.iter_mut() {
        let mut cur = *z;
        let mut val = horner(coeffs, cur).norm();
        for _ in 0..3 {
            let (p, dp) = horner_with_derivative(coeffs, cur);
            if dp.norm() == 0.0 {
                break;
            }
            let next = cur - p / dp;
            let next_val = horner(coeffs, next).norm();
            if !(next_val < val) {
                break;
            }
            cur = next;
            val = next_val;
        }
        // polishing must not move a root between conjugate half-planes
        if z.im != 0.0 && cur.im.signum() != z.im.signum() {
            continue;
        }
        *z = cur;
    }
    Ok(roots)
}
