use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::mkmc::{KernelSet, DEFAULT_LAMBDA};
use crate::scalar::Scalar;
use crate::symmat::SymmetricKernel;

/// Multi-view Gram matrices over shared latent features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_objects: usize,
    pub n_kernels: usize,
    pub latent_dim: usize,
    pub noise_scale: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_objects < 2 || self.n_kernels < 1 || self.latent_dim < 1 {
            return Err(Error::InvalidConfig(format!(
                "synthetic spec needs l >= 2, k >= 1, d >= 1 (got l={}, k={}, d={})",
                self.n_objects, self.n_kernels, self.latent_dim
            )));
        }
        if !(self.noise_scale >= 0.0) || !self.noise_scale.is_finite() {
            return Err(Error::InvalidConfig(format!("noise scale must be >= 0, got {}", self.noise_scale)));
        }
        Ok(())
    }
}

/// Draws `X` (`ℓ x d`, standard normal), views `X_k = X + σ·E_k` and kernels
/// `Q⁽ᵏ⁾ = X_k X_kᵀ`. Labels are the sign of `X w` for a standard normal `w`.
/// All kernels are fully observed.
pub fn synth_kernel_set<T: Scalar>(spec: &SyntheticSpec) -> Result<(KernelSet<T>, Vec<i8>)> {
    spec.validate()?;
    let (l, d) = (spec.n_objects, spec.latent_dim);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let latent: Vec<f64> = (0..l * d).map(|_| rng.sample(StandardNormal)).collect();

    let mut kernels = Vec::with_capacity(spec.n_kernels);
    for _ in 0..spec.n_kernels {
        let view: Vec<f64> = latent.iter().map(|&x| x + spec.noise_scale * rng.sample::<f64, _>(StandardNormal)).collect();
        let view = Mat::from_vec(l, d, view)?;
        let gram = view.matmul_t(&view);
        kernels.push(SymmetricKernel::fully_observed(gram.cast::<T>())?);
    }

    let w: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let labels = (0..l)
        .map(|i| {
            let s: f64 = latent[i * d..(i + 1) * d].iter().zip(&w).map(|(x, w)| x * w).sum();
            if s >= 0.0 { 1 } else { -1 }
        })
        .collect();
    Ok((KernelSet::new(kernels, T::of(DEFAULT_LAMBDA))?, labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(sigma: f64) -> SyntheticSpec {
        SyntheticSpec { n_objects: 12, n_kernels: 3, latent_dim: 4, noise_scale: sigma, seed: 5 }
    }

    #[test]
    fn zero_noise_gives_identical_views() {
        let (set, labels) = synth_kernel_set::<f64>(&spec(0.0)).unwrap();
        assert_eq!(set.kernels()[0], set.kernels()[1]);
        assert_eq!(set.kernels()[1], set.kernels()[2]);
        assert_eq!(labels.len(), 12);
        assert!(labels.iter().all(|&y| y == 1 || y == -1));
    }

    #[test]
    fn deterministic_per_seed() {
        let (a, la) = synth_kernel_set::<f64>(&spec(0.5)).unwrap();
        let (b, lb) = synth_kernel_set::<f64>(&spec(0.5)).unwrap();
        assert_eq!(a.kernels(), b.kernels());
        assert_eq!(la, lb);
    }

    #[test]
    fn invalid_specs() {
        assert!(synth_kernel_set::<f64>(&SyntheticSpec { n_kernels: 0, ..spec(0.1) }).is_err());
        assert!(synth_kernel_set::<f64>(&SyntheticSpec { n_objects: 1, ..spec(0.1) }).is_err());
        assert!(synth_kernel_set::<f64>(&SyntheticSpec { latent_dim: 0, ..spec(0.1) }).is_err());
        assert!(synth_kernel_set::<f64>(&spec(-1.0)).is_err());
    }
}
