//! Cholesky factorization with a bounded diagonal-jitter retry, plus the
//! solve/log-determinant helpers built on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Scalar;

/// Diagonal jitter applied when a plain factorization fails: the first retry
/// adds `relative * trace(A) / n` to the diagonal, and each further retry
/// doubles it, `max_doublings` times at most.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterPolicy {
    pub relative: f64,
    pub max_doublings: u32,
}

impl Default for JitterPolicy {
    fn default() -> Self {
        Self { relative: 1e-10, max_doublings: 8 }
    }
}

impl JitterPolicy {
    /// Never jitter; factorization failure is reported immediately.
    pub const NONE: JitterPolicy = JitterPolicy { relative: 0.0, max_doublings: 0 };
}

/// Lower-triangular factor `L` with `A + jitter*I = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    factor: Mat<T>,
    jitter: T,
}

impl<T: Scalar> Cholesky<T> {
    /// Plain factorization without jitter.
    ///
    /// A pivot is rejected when it does not exceed `n * eps * max|a_ii|`, so
    /// matrices that are singular up to rounding fail instead of producing a
    /// spuriously finite log-determinant.
    pub fn new(a: &Mat<T>) -> Result<Self> {
        Self::factor_shifted(a, T::zero()).map_err(|pivot| Error::NotPositiveDefinite { pivot })
    }

    pub fn with_jitter(a: &Mat<T>, policy: &JitterPolicy) -> Result<Self> {
        let first_failure = match Self::factor_shifted(a, T::zero()) {
            Ok(c) => return Ok(c),
            Err(pivot) => pivot,
        };
        let n = a.rows().max(1);
        let base = T::of(policy.relative) * a.trace().abs() / T::of_usize(n);
        if base > T::zero() && base.is_finite() {
            let mut shift = base;
            for _ in 0..=policy.max_doublings {
                if let Ok(c) = Self::factor_shifted(a, shift) {
                    log::debug!("cholesky succeeded with diagonal jitter {shift}");
                    return Ok(c);
                }
                shift = shift + shift;
            }
        }
        Err(Error::NotPositiveDefinite { pivot: first_failure })
    }

    fn factor_shifted(a: &Mat<T>, shift: T) -> std::result::Result<Self, usize> {
        assert!(a.is_square(), "cholesky of a non-square matrix");
        let n = a.rows();
        let max_diag = (0..n).fold(T::zero(), |m, i| m.max(a[(i, i)].abs()));
        let floor = T::epsilon() * T::of_usize(n.max(1)) * (max_diag + shift);
        let mut l = Mat::zeros(n, n);
        for j in 0..n {
            let (done, rest) = l.as_mut_slice().split_at_mut(j * n);
            let row_j = &mut rest[..n];
            // off-diagonal entries of row j, then its pivot
            for k in 0..j {
                let row_k = &done[k * n..k * n + k + 1];
                let dot: T = row_k[..k].iter().zip(&row_j[..k]).map(|(&x, &y)| x * y).sum();
                row_j[k] = (a[(j, k)] - dot) / row_k[k];
            }
            let sq: T = row_j[..j].iter().map(|&x| x * x).sum();
            let pivot = a[(j, j)] + shift - sq;
            if !(pivot > floor) || !pivot.is_finite() {
                return Err(j);
            }
            row_j[j] = pivot.sqrt();
        }
        Ok(Self { factor: l, jitter: shift })
    }

    pub fn factor(&self) -> &Mat<T> {
        &self.factor
    }

    pub fn into_factor(self) -> Mat<T> {
        self.factor
    }

    /// Diagonal shift that was needed; zero for a plain factorization.
    pub fn jitter(&self) -> T {
        self.jitter
    }

    pub fn dim(&self) -> usize {
        self.factor.rows()
    }

    pub fn logdet(&self) -> T {
        let n = self.dim();
        T::of(2.0) * (0..n).map(|i| self.factor[(i, i)].ln()).sum::<T>()
    }

    /// Solves `L Y = B` in place; `b` is row-major `n x m`.
    fn forward_in_place(&self, b: &mut Mat<T>) {
        let n = self.dim();
        let m = b.cols();
        let data = b.as_mut_slice();
        for i in 0..n {
            let (done, rest) = data.split_at_mut(i * m);
            let yi = &mut rest[..m];
            let li = self.factor.row(i);
            for (j, &lij) in li[..i].iter().enumerate() {
                if lij == T::zero() {
                    continue;
                }
                let yj = &done[j * m..(j + 1) * m];
                yi.iter_mut().zip(yj).for_each(|(a, &b)| *a -= lij * b);
            }
            let inv = T::one() / li[i];
            yi.iter_mut().for_each(|v| *v *= inv);
        }
    }

    /// Solves `Lᵀ X = Y` in place.
    fn backward_in_place(&self, y: &mut Mat<T>) {
        let n = self.dim();
        let m = y.cols();
        let data = y.as_mut_slice();
        for i in (0..n).rev() {
            let (before, rest) = data.split_at_mut(i * m);
            let xi = &mut rest[..m];
            let li = self.factor.row(i);
            let inv = T::one() / li[i];
            xi.iter_mut().for_each(|v| *v *= inv);
            for (j, &lij) in li[..i].iter().enumerate() {
                if lij == T::zero() {
                    continue;
                }
                let yj = &mut before[j * m..(j + 1) * m];
                yj.iter_mut().zip(xi.iter()).for_each(|(a, &b)| *a -= lij * b);
            }
        }
    }

    /// Solves `(L Lᵀ) X = rhs`.
    pub fn solve(&self, rhs: &Mat<T>) -> Result<Mat<T>> {
        if rhs.rows() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: rhs.rows() });
        }
        let mut x = rhs.clone();
        self.forward_in_place(&mut x);
        self.backward_in_place(&mut x);
        Ok(x)
    }

    /// `L⁻¹ B`
    pub fn solve_lower(&self, rhs: &Mat<T>) -> Result<Mat<T>> {
        if rhs.rows() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: rhs.rows() });
        }
        let mut x = rhs.clone();
        self.forward_in_place(&mut x);
        Ok(x)
    }

    /// Explicit inverse `L⁻ᵀ L⁻¹`, symmetric by construction.
    pub fn inverse(&self) -> Mat<T> {
        let mut w = Mat::identity(self.dim());
        self.forward_in_place(&mut w);
        let mut inv = w.t_matmul(&w);
        inv.symmetrize();
        inv
    }
}

/// Factor with the default jitter policy and report `log det A`.
pub fn cholesky_logdet<T: Scalar>(a: &Mat<T>) -> Result<(Mat<T>, T)> {
    let c = Cholesky::with_jitter(a, &JitterPolicy::default())?;
    let logdet = c.logdet();
    Ok((c.into_factor(), logdet))
}

/// `A⁻¹ rhs` for symmetric positive definite `A`, computed by two triangular solves.
pub fn solve_spd<T: Scalar>(a: &Mat<T>, rhs: &Mat<T>) -> Result<Mat<T>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.rows(), actual: a.cols() });
    }
    Cholesky::with_jitter(a, &JitterPolicy::default())?.solve(rhs)
}
