//! Mutual completion of incomplete symmetric kernel matrices.
//!
//! Each kernel may miss whole rows and columns. The completion treats every
//! kernel as the covariance of a zero-mean Gaussian and alternates between
//! filling each kernel's hidden blocks with conditional moments under a shared
//! model matrix `M` and re-estimating `M` as their regularized mean, which
//! never increases `λ·KL(I, M) + Σ_k KL(Q⁽ᵏ⁾, M)`.
//!
//! The numerical core is generic over [`Scalar`] (`f32` and `f64`); the
//! aliases below fix it to `f64`.

pub mod baselines;
pub mod cholesky;
pub mod dataset;
pub mod divergence;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod matrix;
pub mod mkmc;
pub mod scalar;
pub mod symmat;

pub use baselines::{combine_model, mean_impute, zero_impute};
pub use cholesky::{cholesky_logdet, solve_spd, Cholesky, JitterPolicy};
pub use divergence::{gaussian_kl, objective, GaussianReference, ObjectiveValue};
pub use error::{Error, Result};
pub use eval::{corr_matrix_distance, evaluate, roc_score, EvalReport, LabeledSplit, RunMeta, SmoConfig};
pub use experiment::{complete, Completion, Method};
pub use matrix::Mat;
pub use mkmc::{run, CompletionTrace, IterationRecord, KernelSet, MkmcConfig, StopReason, DEFAULT_LAMBDA};
pub use scalar::Scalar;
pub use symmat::{partition_view, schur_complement, BlockView, Partition, SymmetricKernel};

pub type Matrix = Mat<f64>;
pub type Kernel = SymmetricKernel<f64>;
pub type Kernels = KernelSet<f64>;
pub type Trace = CompletionTrace<f64>;

pub type Matrix32 = Mat<f32>;
pub type Kernel32 = SymmetricKernel<f32>;
pub type Kernels32 = KernelSet<f32>;
