//! Symmetric kernel matrices with per-object visibility, and the block views
//! induced by splitting objects into visible and hidden sets.
//!
//! Reordering into (visible, hidden) order is never materialized on the full
//! matrix. A [`Partition`] carries the two index lists and every block is
//! gathered through them.

use crate::cholesky::{Cholesky, JitterPolicy};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Scalar;

/// Relative asymmetry accepted (and then averaged away) on construction.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

/// Smallest eigenvalue allowed, relative to the largest, for a block to count
/// as positive semidefinite.
pub const PSD_TOLERANCE: f64 = 1e-8;

/// Dense symmetric `ℓ x ℓ` kernel matrix with a per-object observation mask
/// (`true` = the object's row and column are observed).
///
/// Values at hidden positions are carried along untouched. They may hold the
/// ground truth (when masking a complete matrix), zeros (after loading a
/// masked file), or the current estimate (during completion).
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricKernel<T> {
    values: Mat<T>,
    mask: Vec<bool>,
}

impl<T: Scalar> SymmetricKernel<T> {
    /// Validates shape and symmetry, then symmetrizes exactly.
    pub fn new(mut values: Mat<T>, mask: Vec<bool>) -> Result<Self> {
        if !values.is_square() {
            return Err(Error::DimensionMismatch { expected: values.rows(), actual: values.cols() });
        }
        if values.rows() == 0 {
            return Err(Error::DimensionMismatch { expected: 1, actual: 0 });
        }
        if mask.len() != values.rows() {
            return Err(Error::DimensionMismatch { expected: values.rows(), actual: mask.len() });
        }
        let asym = values.relative_asymmetry();
        if asym > T::of(SYMMETRY_TOLERANCE) {
            return Err(Error::Asymmetric { asymmetry: asym.to_f64_lossy() });
        }
        values.symmetrize();
        Ok(Self { values, mask })
    }

    pub fn fully_observed(values: Mat<T>) -> Result<Self> {
        let n = values.rows();
        Self::new(values, vec![true; n])
    }

    pub fn dim(&self) -> usize {
        self.mask.len()
    }

    pub fn values(&self) -> &Mat<T> {
        &self.values
    }

    pub fn into_values(self) -> Mat<T> {
        self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Number of observed objects (`n_k`).
    pub fn n_visible(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Number of hidden objects (`m_k = ℓ - n_k`).
    pub fn n_hidden(&self) -> usize {
        self.dim() - self.n_visible()
    }

    pub fn partition(&self) -> Partition {
        Partition::from_mask(&self.mask)
    }

    /// Same values, new mask. Stored values are never altered.
    pub fn with_mask(&self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: mask.len() });
        }
        Ok(Self { values: self.values.clone(), mask })
    }

    /// Replaces the values while keeping the mask. The caller guarantees
    /// symmetry; it is re-imposed exactly here.
    pub(crate) fn with_values(&self, mut values: Mat<T>) -> Self {
        debug_assert_eq!(values.rows(), self.dim());
        values.symmetrize();
        Self { values, mask: self.mask.clone() }
    }

    /// The observed principal submatrix.
    pub fn observed_block(&self) -> Mat<T> {
        let v = self.partition().visible;
        self.values.select(&v, &v)
    }

    /// Checks that the observed block is PSD within [`PSD_TOLERANCE`].
    pub fn observed_is_psd(&self) -> bool {
        is_psd(&self.observed_block(), T::of(PSD_TOLERANCE))
    }
}

impl<T> AsRef<Mat<T>> for SymmetricKernel<T> {
    fn as_ref(&self) -> &Mat<T> {
        &self.values
    }
}

/// Split of `{0..ℓ}` into visible and hidden objects; both lists ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub visible: Vec<usize>,
    pub hidden: Vec<usize>,
}

impl Partition {
    pub fn new(visible: Vec<usize>, hidden: Vec<usize>, dim: usize) -> Result<Self> {
        let ascending = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
        if !ascending(&visible) || !ascending(&hidden) {
            return Err(Error::InvalidPartition("index lists must be strictly increasing".into()));
        }
        if visible.len() + hidden.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: visible.len() + hidden.len() });
        }
        let mut seen = vec![false; dim];
        for &i in visible.iter().chain(&hidden) {
            if i >= dim {
                return Err(Error::IndexOutOfRange { index: i, len: dim });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidPartition(format!("object {i} is both visible and hidden")));
            }
        }
        Ok(Self { visible, hidden })
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        let (visible, hidden) = (0..mask.len()).partition(|&i| mask[i]);
        Self { visible, hidden }
    }

    pub fn dim(&self) -> usize {
        self.visible.len() + self.hidden.len()
    }

    pub fn to_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.dim()];
        for &i in &self.visible {
            mask[i] = true;
        }
        mask
    }
}

/// The (vv, vh, hh) blocks of a symmetric matrix under a [`Partition`].
#[derive(Debug, Clone, PartialEq)]
pub struct BlockView<T> {
    pub vv: Mat<T>,
    pub vh: Mat<T>,
    pub hh: Mat<T>,
}

pub fn partition_view<T: Scalar, A: AsRef<Mat<T>>>(matrix: &A, p: &Partition) -> Result<BlockView<T>> {
    let m = matrix.as_ref();
    if !m.is_square() || m.rows() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), actual: m.rows() });
    }
    Ok(BlockView {
        vv: m.select(&p.visible, &p.visible),
        vh: m.select(&p.visible, &p.hidden),
        hh: m.select(&p.hidden, &p.hidden),
    })
}

/// Inverse of [`partition_view`]: writes the blocks back at their original
/// indices. The hv block is the exact transpose of vh.
pub fn assemble<T: Scalar>(view: &BlockView<T>, p: &Partition) -> Mat<T> {
    let mut out = Mat::zeros(p.dim(), p.dim());
    out.scatter(&p.visible, &p.visible, &view.vv);
    out.scatter(&p.visible, &p.hidden, &view.vh);
    out.scatter(&p.hidden, &p.visible, &view.vh.transpose());
    out.scatter(&p.hidden, &p.hidden, &view.hh);
    out
}

/// Regression coefficients `vv⁻¹ vh` together with the Schur complement
/// `hh - hv vv⁻¹ vh`.
pub(crate) fn conditional_parts<T: Scalar>(
    view: &BlockView<T>,
    jitter: &JitterPolicy,
) -> Result<(Mat<T>, Mat<T>)> {
    let chol = Cholesky::with_jitter(&view.vv, jitter)?;
    let coef = chol.solve(&view.vh)?;
    let mut schur = view.hh.sub(&view.vh.t_matmul(&coef));
    schur.symmetrize();
    Ok((coef, schur))
}

/// `hh - hv (vv)⁻¹ vh`, the covariance of the hidden coordinates conditioned
/// on the visible ones.
pub fn schur_complement<T: Scalar>(view: &BlockView<T>) -> Result<Mat<T>> {
    if view.vv.rows() == 0 {
        return Ok(view.hh.clone());
    }
    conditional_parts(view, &JitterPolicy::default()).map(|(_, s)| s)
}

/// PSD test: `A + tol * λmax * I` must admit a Cholesky factor. `λmax` is
/// estimated from below by power iteration, which only makes the test stricter.
pub fn is_psd<T: Scalar>(a: &Mat<T>, tol: T) -> bool {
    let n = a.rows();
    if n == 0 {
        return true;
    }
    let lmax = largest_eigenvalue_estimate(a);
    if lmax <= T::zero() {
        // no positive eigenvalue: PSD only if (numerically) zero
        return a.max_abs() == T::zero();
    }
    let mut shifted = a.clone();
    let shift = tol * lmax;
    shifted.add_diagonal(shift);
    Cholesky::new(&shifted).is_ok()
}

fn largest_eigenvalue_estimate<T: Scalar>(a: &Mat<T>) -> T {
    let n = a.rows();
    let max_diag = (0..n).fold(T::neg_infinity(), |m, i| m.max(a[(i, i)]));
    let mut x = Mat::from_fn(n, 1, |i, _| T::one() + T::of_usize(i % 7) * T::of(0.01));
    let mut rayleigh = T::neg_infinity();
    for _ in 0..100 {
        let norm = x.frobenius_norm();
        if norm == T::zero() {
            break;
        }
        x = x.scale(T::one() / norm);
        let y = a.matmul(&x);
        let r = x.frobenius_inner(&y);
        let done = (r - rayleigh).abs() <= T::of(1e-6) * r.abs();
        rayleigh = r;
        x = y;
        if done {
            break;
        }
    }
    rayleigh.max(max_diag)
}
