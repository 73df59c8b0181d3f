//! Reference implementations built on nalgebra, independent of the library's
//! own linear algebra and closed forms.
#![allow(dead_code)]

use mkmc_core::{Mat, SymmetricKernel};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

pub fn to_na(m: &Mat<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

pub fn from_na(m: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// log-determinant from the eigenvalues; `None` unless all are positive.
pub fn logdet_eig(m: &DMatrix<f64>) -> Option<f64> {
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues.iter().all(|&v| v > 0.0).then(|| eig.eigenvalues.iter().map(|v| v.ln()).sum())
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}

/// `½[Tr(M⁻¹Q) + log|M| − log|Q| − ℓ]` with an LU inverse and eigen logdets.
pub fn kl_oracle(q: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    let inv = m.clone().try_inverse().expect("M invertible");
    let l = q.nrows() as f64;
    let (ld_m, ld_q) = (logdet_eig(m).expect("M positive definite"), logdet_eig(q).unwrap_or(f64::NEG_INFINITY));
    0.5 * ((inv * q).trace() + ld_m - ld_q - l)
}

pub fn objective_oracle(kernels: &[DMatrix<f64>], m: &DMatrix<f64>, lambda: f64) -> f64 {
    let eye = DMatrix::identity(m.nrows(), m.nrows());
    lambda * kl_oracle(&eye, m) + kernels.iter().map(|q| kl_oracle(q, m)).sum::<f64>()
}

/// Minimizes `Tr(M⁻¹Q) − log|Q|` over the hidden rows/columns of `Q` by
/// damped Newton steps on the free entries, starting from a zero fill with an
/// identity hidden block.
pub fn estep_oracle(q: &Mat<f64>, mask: &[bool], m: &Mat<f64>) -> Mat<f64> {
    let n = q.rows();
    let a = to_na(m).try_inverse().expect("M invertible");
    let mut cur = DMatrix::from_fn(n, n, |i, j| {
        if mask[i] && mask[j] {
            q[(i, j)]
        } else if i == j {
            1.0
        } else {
            0.0
        }
    });
    let free: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).filter(|&(i, j)| !mask[i] || !mask[j]).collect();
    let unit = |&(i, j): &(usize, usize)| {
        let mut e = DMatrix::zeros(n, n);
        e[(i, j)] = 1.0;
        e[(j, i)] = 1.0;
        e
    };
    let basis: Vec<DMatrix<f64>> = free.iter().map(unit).collect();
    let f = |x: &DMatrix<f64>| -> f64 {
        match logdet_eig(x) {
            Some(ld) => (&a * x).trace() - ld,
            None => f64::INFINITY,
        }
    };
    for _ in 0..200 {
        let w = cur.clone().try_inverse().unwrap();
        let g_mat = &a - &w;
        let grad = DVector::from_iterator(free.len(), basis.iter().map(|e| (&g_mat * e).trace()));
        if grad.norm() < 1e-13 {
            break;
        }
        let wew: Vec<DMatrix<f64>> = basis.iter().map(|e| &w * e * &w).collect();
        let hess = DMatrix::from_fn(free.len(), free.len(), |p, r| (&wew[p] * &basis[r]).trace());
        let step = hess.cholesky().expect("objective is strictly convex").solve(&grad);
        let f0 = f(&cur);
        let mut t = 1.0;
        loop {
            let mut next = cur.clone();
            for (s, e) in step.iter().zip(&basis) {
                next -= e * (t * s);
            }
            if f(&next) <= f0 || t < 1e-12 {
                cur = next;
                break;
            }
            t *= 0.5;
        }
    }
    from_na(&cur)
}

/// Row means and the grand mean of the observed block, as explicit sums.
pub fn mean_impute_oracle(q: &Mat<f64>, mask: &[bool]) -> Mat<f64> {
    let n = q.rows();
    let vis: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
    let nv = vis.len() as f64;
    let mut out = q.clone();
    for a in 0..n {
        for b in 0..n {
            out[(a, b)] = match (mask[a], mask[b]) {
                (true, true) => q[(a, b)],
                (true, false) => vis.iter().map(|&i| q[(a, i)]).sum::<f64>() / nv,
                (false, true) => vis.iter().map(|&i| q[(i, b)]).sum::<f64>() / nv,
                (false, false) => {
                    let mut s = 0.0;
                    for &i in &vis {
                        for &j in &vis {
                            s += q[(i, j)];
                        }
                    }
                    s / (nv * nv)
                }
            };
        }
    }
    out
}

/// Fraction of (positive, negative) pairs ranked correctly, ties counting ½.
pub fn roc_oracle(scores: &[f64], labels: &[i8]) -> f64 {
    let mut num = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if labels[i] == 1 && labels[j] != 1 {
                pairs += 1.0;
                num += if si > sj {
                    1.0
                } else if si == sj {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    num / pairs
}

/// Dual SVM objective `Σα − ½αᵀ(yyᵀ∘K)α` maximized by accelerated projected
/// gradient; projection onto `{0 ≤ α ≤ C, yᵀα = 0}` by bisection on the
/// multiplier of the equality.
pub fn svm_dual_oracle(k: &DMatrix<f64>, y: &[f64], c: f64, iters: usize) -> (Vec<f64>, f64) {
    let n = y.len();
    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * k[(i, j)]);
    let lip = q.clone().symmetric_eigen().eigenvalues.max().max(1e-12);
    let project = |v: &DVector<f64>| {
        let at = |mu: f64| v.map_with_location(|i, _, x| (x - mu * y[i]).clamp(0.0, c));
        let g = |mu: f64| at(mu).iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        let (mut lo, mut hi) = (-1e6, 1e6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(0.5 * (lo + hi))
    };
    let mut x = DVector::zeros(n);
    let mut z = x.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let grad = &q * &z - DVector::from_element(n, 1.0);
        let next = project(&(&z - grad / lip));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = &next + (&next - &x) * ((t - 1.0) / t_next);
        x = next;
        t = t_next;
    }
    let obj = x.sum() - 0.5 * (x.transpose() * &q * &x)[(0, 0)];
    (x.iter().copied().collect(), obj)
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Gram matrix of `n` random points in `dim` dimensions.
pub fn random_gram(rng: &mut StdRng, n: usize, dim: usize) -> Mat<f64> {
    let x = DMatrix::from_fn(n, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    from_na(&(&x * x.transpose()))
}

/// Random full-rank kernels with a random hidden fraction per kernel.
pub fn random_instance(rng: &mut StdRng, n: usize, k: usize, max_missing: f64) -> Vec<SymmetricKernel<f64>> {
    (0..k)
        .map(|_| {
            let q = random_gram(rng, n, n + 3);
            let frac = rng.random_range(0.0..=max_missing);
            let mask = (0..n).map(|_| rng.random::<f64>() >= frac).collect();
            SymmetricKernel::new(q, mask).unwrap()
        })
        .collect()
}
