//! Imputation baselines: zero fill and mean fill of hidden rows/columns.

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::mkmc::{m_step, KernelSet};
use crate::scalar::Scalar;
use crate::symmat::SymmetricKernel;

/// Hidden rows and columns set to zero; the mask is kept.
pub fn zero_impute<T: Scalar>(kernel: &SymmetricKernel<T>) -> SymmetricKernel<T> {
    let mut values = kernel.values().clone();
    let mask = kernel.mask();
    for (i, &vis_i) in mask.iter().enumerate() {
        let row = values.row_mut(i);
        if vis_i {
            for (j, &vis_j) in mask.iter().enumerate() {
                if !vis_j {
                    row[j] = T::zero();
                }
            }
        } else {
            row.iter_mut().for_each(|x| *x = T::zero());
        }
    }
    kernel.with_values(values)
}

/// Fills hidden entries from the observed Gram block alone.
///
/// With `I_v` the observed objects, an entry pairing observed `j` with a hidden
/// object becomes `(1/|I_v|) Σ_{i∈I_v} Q[j][i]`, i.e. the inner product of
/// `x_j` with the mean feature vector, and every hidden-hidden entry becomes
/// the grand mean `(1/|I_v|²) ΣΣ Q[i][j]`. The result can be indefinite.
pub fn mean_impute<T: Scalar>(kernel: &SymmetricKernel<T>) -> Result<SymmetricKernel<T>> {
    let p = kernel.partition();
    if p.visible.is_empty() {
        return Err(Error::NoObservedData);
    }
    let q = kernel.values();
    let n = T::of_usize(p.visible.len());
    let row_means: Vec<T> = p
        .visible
        .iter()
        .map(|&j| p.visible.iter().map(|&i| q[(j, i)]).sum::<T>() / n)
        .collect();
    let grand: T = p.visible.iter().flat_map(|&i| p.visible.iter().map(move |&j| q[(i, j)])).sum::<T>() / (n * n);

    let mut values = q.clone();
    for (&j, &mean) in p.visible.iter().zip(&row_means) {
        for &h in &p.hidden {
            values[(j, h)] = mean;
            values[(h, j)] = mean;
        }
    }
    for &h in &p.hidden {
        for &g in &p.hidden {
            values[(h, g)] = grand;
        }
    }
    Ok(kernel.with_values(values))
}

/// Model matrix of already-completed kernels; the same formula as the MKMC
/// M-step.
pub fn combine_model<T: Scalar>(kernels: &KernelSet<T>) -> Mat<T> {
    m_step(kernels.kernels(), kernels.lambda())
}
