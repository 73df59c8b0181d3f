//! C-SVM on a precomputed kernel, trained by sequential minimal optimization
//! with maximal-violating-pair working-set selection.

use serde::{Deserialize, Serialize};

use super::LabeledSplit;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Scalar;

/// Curvature used when a pair's `K_ii + K_jj − 2K_ij` is not positive, which
/// happens with indefinite kernels.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoConfig {
    pub c: f64,
    /// Stop once the maximal KKT violation drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SmoConfig {
    fn default() -> Self {
        Self { c: 1.0, tol: 1e-3, max_iter: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel<T> {
    /// Training objects, in the order of `alphas`.
    pub train_idx: Vec<usize>,
    pub labels: Vec<i8>,
    pub alphas: Vec<T>,
    pub bias: T,
    pub c: T,
    /// Dual objective `Σα − ½ Σ α_i α_j y_i y_j K_ij` at the returned point.
    pub dual_objective: T,
    pub iterations: usize,
    /// False when the iteration cap was hit; the model is the last iterate.
    pub converged: bool,
    /// True when the training set holds a single class; the decision function
    /// is then the constant label.
    pub single_class: bool,
}

impl<T: Scalar> SvmModel<T> {
    pub fn support_count(&self) -> usize {
        self.alphas.iter().filter(|&&a| a > T::zero()).count()
    }
}

/// Trains on `split.train_idx` using the rows/columns of `kernel`.
pub fn svm_train<T: Scalar>(kernel: &Mat<T>, split: &LabeledSplit, cfg: &SmoConfig) -> Result<SvmModel<T>> {
    if !(cfg.c > 0.0) {
        return Err(Error::InvalidConfig(format!("C must be > 0, got {}", cfg.c)));
    }
    let train = &split.train_idx;
    for &i in train {
        if i >= kernel.rows() {
            return Err(Error::IndexOutOfRange { index: i, len: kernel.rows() });
        }
    }
    let y: Vec<i8> = train.iter().map(|&i| split.labels[i]).collect();
    let c = T::of(cfg.c);
    let n = train.len();

    let positives = y.iter().filter(|&&v| v == 1).count();
    if positives == 0 || positives == n {
        let label = if positives == 0 { -T::one() } else { T::one() };
        return Ok(SvmModel {
            train_idx: train.clone(),
            labels: y,
            alphas: vec![T::zero(); n],
            bias: label,
            c,
            dual_objective: T::zero(),
            iterations: 0,
            converged: true,
            single_class: true,
        });
    }

    let k = kernel.select(train, train);
    let yf: Vec<T> = y.iter().map(|&v| if v == 1 { T::one() } else { -T::one() }).collect();
    let mut alpha = vec![T::zero(); n];
    // gradient of ½αᵀQα − eᵀα with Q_ij = y_i y_j K_ij
    let mut grad = vec![-T::one(); n];
    let tol = T::of(cfg.tol);
    let tau = T::of(TAU);

    let in_up = |a: T, yi: T| (yi > T::zero() && a < c) || (yi < T::zero() && a > T::zero());
    let in_low = |a: T, yi: T| (yi > T::zero() && a > T::zero()) || (yi < T::zero() && a < c);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        let mut i_sel = None;
        let mut g_max = T::neg_infinity();
        let mut j_sel = None;
        let mut g_min = T::infinity();
        for t in 0..n {
            let v = -yf[t] * grad[t];
            if in_up(alpha[t], yf[t]) && v > g_max {
                g_max = v;
                i_sel = Some(t);
            }
            if in_low(alpha[t], yf[t]) && v < g_min {
                g_min = v;
                j_sel = Some(t);
            }
        }
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            converged = true;
            break;
        };
        if g_max - g_min < tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut quad = k[(i, i)] + k[(j, j)] - T::of(2.0) * k[(i, j)];
        if !(quad > T::zero()) {
            quad = tau;
        }
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if yf[i] != yf[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > T::zero() {
                if aj < T::zero() {
                    aj = T::zero();
                    ai = diff;
                }
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else {
                if ai < T::zero() {
                    ai = T::zero();
                    aj = -diff;
                }
                if aj > c {
                    aj = c;
                    ai = c + diff;
                }
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else {
                if aj < T::zero() {
                    aj = T::zero();
                    ai = sum;
                }
                if ai < T::zero() {
                    ai = T::zero();
                    aj = sum;
                }
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (di, dj) = ((ai - old_i) * yf[i], (aj - old_j) * yf[j]);
        let (ki, kj) = (k.row(i), k.row(j));
        for t in 0..n {
            grad[t] += yf[t] * (ki[t] * di + kj[t] * dj);
        }
    }

    let bias = -threshold(&alpha, &grad, &yf, c);
    // Σα − ½αᵀQα = −½ Σ α_t (G_t − 1)
    let dual_objective = -T::of(0.5) * alpha.iter().zip(&grad).map(|(&a, &g)| a * (g - T::one())).sum::<T>();
    Ok(SvmModel {
        train_idx: train.clone(),
        labels: y,
        alphas: alpha,
        bias,
        c,
        dual_objective,
        iterations,
        converged,
        single_class: false,
    })
}

/// Offset `ρ` of the decision function `Σ α_i y_i K(i,·) − ρ`: the mean of
/// `y_t G_t` over free multipliers, or the midpoint of the feasible interval
/// when every multiplier sits at a bound.
fn threshold<T: Scalar>(alpha: &[T], grad: &[T], y: &[T], c: T) -> T {
    let mut ub = T::infinity();
    let mut lb = T::neg_infinity();
    let mut free_sum = T::zero();
    let mut free = 0usize;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        let positive = y[t] > T::zero();
        if alpha[t] >= c {
            if positive {
                lb = lb.max(yg);
            } else {
                ub = ub.min(yg);
            }
        } else if alpha[t] <= T::zero() {
            if positive {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    if free > 0 {
        free_sum / T::of_usize(free)
    } else {
        (ub + lb) * T::of(0.5)
    }
}

/// `score_j = Σ_i α_i y_i K(i, j) + bias` for each requested object.
pub fn svm_decision<T: Scalar>(model: &SvmModel<T>, kernel: &Mat<T>, test_idx: &[usize]) -> Result<Vec<T>> {
    let len = kernel.rows();
    for &i in model.train_idx.iter().chain(test_idx) {
        if i >= len {
            return Err(Error::IndexOutOfRange { index: i, len });
        }
    }
    let coef: Vec<(usize, T)> = model
        .train_idx
        .iter()
        .zip(&model.alphas)
        .zip(&model.labels)
        .filter(|((_, &a), _)| a != T::zero())
        .map(|((&i, &a), &y)| (i, if y == 1 { a } else { -a }))
        .collect();
    Ok(test_idx
        .iter()
        .map(|&j| coef.iter().map(|&(i, w)| w * kernel[(i, j)]).sum::<T>() + model.bias)
        .collect())
}
