use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Scalar;

/// Correlation matrix distance `1 − Tr(Q Q̂) / (‖Q‖_F ‖Q̂‖_F)` averaged over
/// the kernel pairs. 0 for identical directions, 2 for opposite ones.
pub fn corr_matrix_distance<T, A, B>(truth: &[A], estimate: &[B]) -> Result<T>
where
    T: Scalar,
    A: AsRef<Mat<T>>,
    B: AsRef<Mat<T>>,
{
    if truth.len() != estimate.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), actual: estimate.len() });
    }
    if truth.is_empty() {
        return Err(Error::InvalidConfig("no matrices to compare".into()));
    }
    let mut total = T::zero();
    for (k, (q, q_hat)) in truth.iter().zip(estimate).enumerate() {
        let (q, q_hat) = (q.as_ref(), q_hat.as_ref());
        if (q.rows(), q.cols()) != (q_hat.rows(), q_hat.cols()) {
            return Err(Error::DimensionMismatch { expected: q.rows(), actual: q_hat.rows() }.in_kernel(k));
        }
        let (a, b) = (q.frobenius_norm(), q_hat.frobenius_norm());
        if a == T::zero() || b == T::zero() {
            return Err(Error::ZeroNorm { index: k });
        }
        // Tr(Q Q̂) = Σ q_ij q̂_ji, and both are symmetric
        let cos = q.frobenius_inner(q_hat) / (a * b);
        total += (T::one() - cos).max(T::zero()).min(T::of(2.0));
    }
    Ok(total / T::of_usize(truth.len()))
}
