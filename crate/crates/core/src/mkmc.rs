//! Mutual kernel matrix completion.
//!
//! Every kernel is read as the covariance of a zero-mean Gaussian. The model
//! matrix `M` is the λ-regularized mean of the kernels, and each kernel's
//! hidden blocks are refilled with the conditional second moments implied by
//! `M` given that kernel's observed block. Both steps minimize
//! `J = λ·KL(I, M) + Σ_k KL(Q⁽ᵏ⁾, M)` exactly in their own variables, so `J`
//! never increases.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::zero_impute;
use crate::cholesky::JitterPolicy;
use crate::divergence::{objective_with, GaussianReference, ObjectiveValue};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Scalar;
use crate::symmat::{conditional_parts, partition_view, Partition, SymmetricKernel};

/// Default weight of the `KL(I, M)` prior term.
pub const DEFAULT_LAMBDA: f64 = 0.001;

/// `K ≥ 1` kernels over the same `ℓ` objects, the model matrix once it
/// exists, and the prior weight λ.
#[derive(Debug, Clone)]
pub struct KernelSet<T> {
    kernels: Vec<SymmetricKernel<T>>,
    model: Option<Mat<T>>,
    lambda: T,
}

impl<T: Scalar> KernelSet<T> {
    pub fn new(kernels: Vec<SymmetricKernel<T>>, lambda: T) -> Result<Self> {
        let first = kernels.first().ok_or_else(|| Error::InvalidConfig("a kernel set needs at least one kernel".into()))?;
        let dim = first.dim();
        for k in &kernels {
            if k.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: k.dim() });
            }
        }
        if !(lambda >= T::zero()) {
            return Err(Error::InvalidConfig(format!("lambda must be non-negative, got {lambda}")));
        }
        Ok(Self { kernels, model: None, lambda })
    }

    pub fn with_model(mut self, model: Mat<T>) -> Result<Self> {
        if model.rows() != self.dim() || !model.is_square() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: model.rows() });
        }
        self.model = Some(model);
        Ok(self)
    }

    pub fn with_lambda(mut self, lambda: T) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn dim(&self) -> usize {
        self.kernels[0].dim()
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn kernels(&self) -> &[SymmetricKernel<T>] {
        &self.kernels
    }

    pub fn into_kernels(self) -> Vec<SymmetricKernel<T>> {
        self.kernels
    }

    pub fn model(&self) -> Option<&Mat<T>> {
        self.model.as_ref()
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Objective of the current kernels against `m`.
    pub fn objective(&self, m: &Mat<T>) -> Result<ObjectiveValue<T>> {
        crate::divergence::objective(&self.kernels, m, self.lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MkmcConfig {
    pub lambda: f64,
    /// Relative tolerance on the change of `J` between iterations.
    pub tol: f64,
    pub max_iters: usize,
    pub jitter: JitterPolicy,
    /// Worker threads for the per-kernel E-steps; `None` or 1 runs inline.
    pub threads: Option<usize>,
}

impl Default for MkmcConfig {
    fn default() -> Self {
        Self { lambda: DEFAULT_LAMBDA, tol: 1e-6, max_iters: 200, jitter: JitterPolicy::default(), threads: None }
    }
}

impl MkmcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidConfig(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig("threads must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Relative change of `J` fell below `tol`.
    Tolerance,
    /// `J` stayed infinite (some kernel singular), and the largest relative
    /// change of any kernel fell below `tol` instead.
    DeltaTolerance,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord<T> {
    /// 0 is the state right after initialization.
    pub iter: usize,
    pub objective: ObjectiveValue<T>,
    /// Largest `‖Q_new − Q_old‖_F / ‖Q_old‖_F` over the kernels.
    pub max_block_delta: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionTrace<T> {
    pub iterations: Vec<IterationRecord<T>>,
    pub converged: bool,
    pub stop_reason: StopReason,
}

impl<T: Scalar> CompletionTrace<T> {
    /// Number of E+M sweeps performed (the initialization record excluded).
    pub fn sweeps(&self) -> usize {
        self.iterations.len().saturating_sub(1)
    }

    pub fn final_objective(&self) -> &ObjectiveValue<T> {
        &self.iterations.last().expect("trace always holds the initial record").objective
    }
}

/// `(Σ_k Q⁽ᵏ⁾ + λI) / (λ + K)`.
pub fn m_step<T: Scalar, A: AsRef<Mat<T>>>(kernels: &[A], lambda: T) -> Mat<T> {
    assert!(!kernels.is_empty(), "m_step needs at least one kernel");
    let dim = kernels[0].as_ref().rows();
    let mut sum = Mat::zeros(dim, dim);
    for q in kernels {
        sum.add_assign(q.as_ref());
    }
    sum.add_diagonal(lambda);
    let mut m = sum.scale(T::one() / (lambda + T::of_usize(kernels.len())));
    m.symmetrize();
    m
}

/// Zero-fills every hidden row/column and sets `M` by [`m_step`].
pub fn initialize<T: Scalar>(set: &KernelSet<T>) -> KernelSet<T> {
    let kernels: Vec<_> = set.kernels.iter().map(zero_impute).collect();
    let model = m_step(&kernels, set.lambda);
    KernelSet { kernels, model: Some(model), lambda: set.lambda }
}

/// Conditional-moment update of one kernel's hidden blocks given `M`:
///
/// ```text
/// Q_vh ← Q_vv M_vv⁻¹ M_vh
/// Q_hh ← M_{h|v} + M_hv M_vv⁻¹ Q_vv M_vv⁻¹ M_vh
/// ```
///
/// The visible block is left bit-identical. A kernel with no observed object
/// takes `M` wholesale.
pub fn e_step<T: Scalar>(
    kernel: &SymmetricKernel<T>,
    model: &Mat<T>,
    p: &Partition,
    jitter: &JitterPolicy,
) -> Result<SymmetricKernel<T>> {
    if p.dim() != kernel.dim() || model.rows() != kernel.dim() {
        return Err(Error::DimensionMismatch { expected: kernel.dim(), actual: model.rows() });
    }
    if p.hidden.is_empty() {
        return Ok(kernel.clone());
    }
    if p.visible.is_empty() {
        return Ok(kernel.with_values(model.clone()));
    }
    let m_blocks = partition_view(model, p)?;
    let (coef, schur) = conditional_parts(&m_blocks, jitter)?;
    let q_vv = kernel.values().select(&p.visible, &p.visible);
    let q_vh = q_vv.matmul(&coef);
    let mut q_hh = schur.add(&coef.t_matmul(&q_vh));
    q_hh.symmetrize();

    let mut values = kernel.values().clone();
    values.scatter(&p.visible, &p.hidden, &q_vh);
    values.scatter(&p.hidden, &p.visible, &q_vh.transpose());
    values.scatter(&p.hidden, &p.hidden, &q_hh);
    Ok(kernel.with_values(values))
}

fn relative_change<T: Scalar>(new: &Mat<T>, old: &Mat<T>) -> T {
    let diff = new.sub(old).frobenius_norm();
    let base = old.frobenius_norm();
    if base > T::zero() {
        diff / base
    } else if diff > T::zero() {
        T::infinity()
    } else {
        T::zero()
    }
}

/// Runs the alternating E/M iteration to convergence.
///
/// Every kernel's partition comes from its mask and stays fixed for the whole
/// run. All E-steps of a sweep use the `M` of the previous sweep.
pub fn run<T: Scalar>(set: &KernelSet<T>, cfg: &MkmcConfig) -> Result<(KernelSet<T>, CompletionTrace<T>)> {
    cfg.validate()?;
    let lambda = T::of(cfg.lambda);
    let set = set.clone().with_lambda(lambda);
    let pool = match cfg.threads {
        Some(n) if n > 1 => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?,
        ),
        _ => None,
    };

    let partitions: Vec<Partition> = set.kernels.iter().map(|k| k.partition()).collect();
    let mut state = initialize(&set);
    let mut model = state.model.take().expect("initialize sets the model");
    let initial = objective_with(&GaussianReference::new(&model).map_err(|e| e.at_iteration(0))?, &state.kernels, lambda)
        .map_err(|e| e.at_iteration(0))?;
    let mut trace = CompletionTrace {
        iterations: vec![IterationRecord { iter: 0, objective: initial, max_block_delta: T::zero() }],
        converged: false,
        stop_reason: StopReason::MaxIters,
    };

    for iter in 1..=cfg.max_iters {
        let sweep = |(k, (q, p)): (usize, (&SymmetricKernel<T>, &Partition))| {
            e_step(q, &model, p, &cfg.jitter).map_err(|e| e.in_kernel(k))
        };
        let updated: Vec<SymmetricKernel<T>> = match &pool {
            Some(pool) => pool.install(|| {
                state.kernels.par_iter().zip(partitions.par_iter()).enumerate().map(sweep).collect::<Result<_>>()
            }),
            None => state.kernels.iter().zip(partitions.iter()).enumerate().map(sweep).collect::<Result<_>>(),
        }
        .map_err(|e| e.at_iteration(iter))?;

        let max_block_delta = updated
            .iter()
            .zip(&state.kernels)
            .map(|(n, o)| relative_change(n.values(), o.values()))
            .fold(T::zero(), T::max);
        state.kernels = updated;
        model = m_step(&state.kernels, lambda);
        let reference = GaussianReference::new(&model).map_err(|e| e.at_iteration(iter))?;
        let objective = objective_with(&reference, &state.kernels, lambda).map_err(|e| e.at_iteration(iter))?;

        let prev = trace.final_objective().total;
        let cur = objective.total;
        trace.iterations.push(IterationRecord { iter, objective, max_block_delta });

        let stop = if prev.is_finite() && cur.is_finite() {
            let rel = (cur - prev).abs() / prev.abs().max(T::one());
            (rel < T::of(cfg.tol)).then_some(StopReason::Tolerance)
        } else if !prev.is_finite() && !cur.is_finite() {
            (max_block_delta < T::of(cfg.tol)).then_some(StopReason::DeltaTolerance)
        } else {
            // +∞ -> finite counts as progress
            None
        };
        if let Some(reason) = stop {
            trace.converged = true;
            trace.stop_reason = reason;
            break;
        }
    }
    if !trace.converged {
        log::warn!("mkmc stopped after {} iterations without converging", cfg.max_iters);
    }
    state.model = Some(model);
    Ok((state, trace))
}
