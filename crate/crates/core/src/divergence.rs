//! KL divergence between zero-mean Gaussians parameterized by kernel
//! matrices, and the penalized objective minimized by MKMC.

use serde::{Deserialize, Serialize};

use crate::cholesky::Cholesky;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Scalar;

/// Objective value in nats: `total = λ·prior_kl + Σ per_matrix_kl`.
///
/// A kernel whose current completion is singular contributes `+∞`, and then
/// so does the total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue<T> {
    pub total: T,
    pub per_matrix_kl: Vec<T>,
    /// Unweighted `KL(I, M)`.
    pub prior_kl: T,
}

impl<T: Scalar> ObjectiveValue<T> {
    pub fn is_finite(&self) -> bool {
        self.total.is_finite()
    }
}

/// A model matrix prepared once (inverse and log-determinant) so that many
/// divergences against it cost `O(ℓ²)` plus one factorization of `Q`.
#[derive(Debug, Clone)]
pub struct GaussianReference<T> {
    inverse: Mat<T>,
    logdet: T,
}

impl<T: Scalar> GaussianReference<T> {
    pub fn new(m: &Mat<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.rows(), actual: m.cols() });
        }
        let chol = Cholesky::new(m)?;
        Ok(Self { inverse: chol.inverse(), logdet: chol.logdet() })
    }

    pub fn dim(&self) -> usize {
        self.inverse.rows()
    }

    /// `KL(N(0,q) ‖ N(0,M))`. A singular `q` yields [`Error::QSingular`].
    pub fn kl_from(&self, q: &Mat<T>) -> Result<T> {
        if q.rows() != self.dim() || !q.is_square() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: q.rows() });
        }
        let logdet_q = match Cholesky::new(q) {
            Ok(c) => c.logdet(),
            Err(Error::NotPositiveDefinite { pivot }) => return Err(Error::QSingular { pivot }),
            Err(e) => return Err(e),
        };
        let trace = self.inverse.frobenius_inner(q);
        let l = T::of_usize(self.dim());
        Ok(T::of(0.5) * (trace + self.logdet - logdet_q - l))
    }

    /// `KL(N(0,I) ‖ N(0,M))`, which needs no factorization of the identity.
    pub fn kl_from_identity(&self) -> T {
        let l = T::of_usize(self.dim());
        T::of(0.5) * (self.inverse.trace() + self.logdet - l)
    }
}

/// `½[Tr(M⁻¹Q) + log det M − log det Q − ℓ]`.
pub fn gaussian_kl<T: Scalar>(q: &Mat<T>, m: &Mat<T>) -> Result<T> {
    GaussianReference::new(m)?.kl_from(q)
}

/// `J = λ·KL(I, M) + Σ_k KL(Q⁽ᵏ⁾, M)`, with `+∞` for singular kernels.
pub fn objective<T: Scalar, A: AsRef<Mat<T>>>(kernels: &[A], m: &Mat<T>, lambda: T) -> Result<ObjectiveValue<T>> {
    let reference = GaussianReference::new(m)?;
    objective_with(&reference, kernels, lambda)
}

pub(crate) fn objective_with<T: Scalar, A: AsRef<Mat<T>>>(
    reference: &GaussianReference<T>,
    kernels: &[A],
    lambda: T,
) -> Result<ObjectiveValue<T>> {
    let prior_kl = reference.kl_from_identity();
    let per_matrix_kl = kernels
        .iter()
        .enumerate()
        .map(|(k, q)| match reference.kl_from(q.as_ref()) {
            Ok(v) => Ok(v),
            Err(Error::QSingular { .. }) => Ok(T::infinity()),
            Err(e) => Err(e.in_kernel(k)),
        })
        .collect::<Result<Vec<T>>>()?;
    let total = lambda * prior_kl + per_matrix_kl.iter().copied().sum::<T>();
    Ok(ObjectiveValue { total, per_matrix_kl, prior_kl })
}
