//! Completion accuracy and downstream classification metrics.

mod distance;
mod roc;
mod svm;

pub use distance::corr_matrix_distance;
pub use roc::roc_score;
pub use svm::{svm_decision, svm_train, SmoConfig, SvmModel};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Scalar;

/// Per-object labels (`+1`/`−1`, `0` = unknown) with disjoint train and test
/// index sets. Every indexed object must carry a known label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSplit {
    pub labels: Vec<i8>,
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
}

impl LabeledSplit {
    pub fn new(labels: Vec<i8>, train_idx: Vec<usize>, test_idx: Vec<usize>) -> Result<Self> {
        let len = labels.len();
        let mut used = vec![false; len];
        for &i in train_idx.iter().chain(&test_idx) {
            if i >= len {
                return Err(Error::IndexOutOfRange { index: i, len });
            }
            if std::mem::replace(&mut used[i], true) {
                return Err(Error::InvalidPartition(format!("object {i} appears twice in the split")));
            }
            if labels[i] != 1 && labels[i] != -1 {
                return Err(Error::InvalidLabel { index: i, label: labels[i] as i64 });
            }
        }
        Ok(Self { labels, train_idx, test_idx })
    }

    pub fn test_labels(&self) -> Vec<i8> {
        self.test_idx.iter().map(|&i| self.labels[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub method: String,
    pub missing_ratio: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mean_corr_distance: f64,
    pub roc_per_matrix: Vec<f64>,
    pub roc_model: f64,
    pub meta: RunMeta,
}

/// Train an SVM on `kernel` over the split and score its test objects.
pub fn classification_roc<T: Scalar>(kernel: &Mat<T>, split: &LabeledSplit, cfg: &SmoConfig) -> Result<f64> {
    let model = svm_train(kernel, split, cfg)?;
    if !model.converged {
        log::warn!("SVM hit its iteration cap ({}); scoring the last iterate", model.iterations);
    }
    let scores = svm_decision(&model, kernel, &split.test_idx)?;
    roc_score(&scores, &split.test_labels())
}

/// Correlation distance of the completed kernels plus the ROC score of an SVM
/// trained on each completed kernel and on the model matrix.
pub fn evaluate<T, A, B>(
    truth: &[A],
    estimate: &[B],
    model: &Mat<T>,
    split: &LabeledSplit,
    cfg: &SmoConfig,
    meta: RunMeta,
) -> Result<EvalReport>
where
    T: Scalar,
    A: AsRef<Mat<T>>,
    B: AsRef<Mat<T>>,
{
    let mean_corr_distance = corr_matrix_distance(truth, estimate)?.to_f64_lossy();
    let roc_per_matrix = estimate
        .iter()
        .enumerate()
        .map(|(k, q)| classification_roc(q.as_ref(), split, cfg).map_err(|e| e.in_kernel(k)))
        .collect::<Result<Vec<_>>>()?;
    let roc_model = classification_roc(model, split, cfg)?;
    Ok(EvalReport { mean_corr_distance, roc_per_matrix, roc_model, meta })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_validation() {
        assert!(LabeledSplit::new(vec![1, -1, 1], vec![0], vec![1, 2]).is_ok());
        assert!(LabeledSplit::new(vec![1, -1, 1], vec![0, 1], vec![1]).is_err());
        assert!(matches!(
            LabeledSplit::new(vec![1, 0, 1], vec![0, 1], vec![2]),
            Err(Error::InvalidLabel { index: 1, label: 0 })
        ));
        assert!(LabeledSplit::new(vec![1, -1], vec![0], vec![5]).is_err());
        // unknown labels are fine as long as the object is not used
        assert!(LabeledSplit::new(vec![1, 0, -1], vec![0], vec![2]).is_ok());
    }
}
