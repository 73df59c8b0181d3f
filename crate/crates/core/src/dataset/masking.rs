//! Nested missing-data schedules.
//!
//! Removals are (object, kernel) pairs drawn in rounds: each round visits all
//! objects in a fresh random order and hides every object in one kernel chosen
//! among those where it is still visible. Missing ratio `r` takes the first
//! `⌊r·ℓ·K⌋` pairs of that sequence, so higher ratios extend lower ones.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::symmat::SymmetricKernel;

/// Missing ratios 0.1, 0.2, …, 0.9.
pub fn default_ratios() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSchedule {
    pub n_objects: usize,
    pub n_kernels: usize,
    pub ratios: Vec<f64>,
    pub seed: u64,
    /// `hidden[r][k]`: ascending hidden objects of kernel `k` at ratio `r`.
    pub hidden: Vec<Vec<Vec<usize>>>,
}

/// Number of (object, kernel) removals at ratio `r`.
pub fn removal_count(ratio: f64, n_objects: usize, n_kernels: usize) -> usize {
    // the epsilon absorbs products like 0.3 * 10 = 2.9999999999999996
    (ratio * (n_objects * n_kernels) as f64 + 1e-9).floor() as usize
}

fn check_ratios(ratios: &[f64]) -> Result<()> {
    let mut prev = 0.0;
    for &r in ratios {
        if !(r > 0.0 && r < 1.0) || r <= prev {
            return Err(Error::RatioOutOfRange(r));
        }
        prev = r;
    }
    Ok(())
}

pub fn make_mask_schedule(n_objects: usize, n_kernels: usize, ratios: &[f64], seed: u64) -> Result<MaskSchedule> {
    if n_objects == 0 || n_kernels == 0 {
        return Err(Error::InvalidConfig("mask schedule needs at least one object and one kernel".into()));
    }
    if ratios.is_empty() {
        return Err(Error::InvalidConfig("no missing ratios given".into()));
    }
    check_ratios(ratios)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut remaining: Vec<Vec<usize>> = vec![(0..n_kernels).collect(); n_objects];
    let mut order = Vec::with_capacity(n_objects * n_kernels);
    let mut objects: Vec<usize> = (0..n_objects).collect();
    for _ in 0..n_kernels {
        objects.shuffle(&mut rng);
        for &o in &objects {
            let pick = rng.random_range(0..remaining[o].len());
            order.push((o, remaining[o].remove(pick)));
        }
    }

    let hidden = ratios
        .iter()
        .map(|&r| {
            let mut per_kernel = vec![Vec::new(); n_kernels];
            for &(o, k) in &order[..removal_count(r, n_objects, n_kernels)] {
                per_kernel[k].push(o);
            }
            per_kernel.iter_mut().for_each(|v| v.sort_unstable());
            per_kernel
        })
        .collect();
    Ok(MaskSchedule { n_objects, n_kernels, ratios: ratios.to_vec(), seed, hidden })
}

impl MaskSchedule {
    pub fn hidden(&self, ratio_idx: usize, kernel: usize) -> &[usize] {
        &self.hidden[ratio_idx][kernel]
    }

    pub fn total_hidden(&self, ratio_idx: usize) -> usize {
        self.hidden[ratio_idx].iter().map(Vec::len).sum()
    }

    /// Observation mask (`true` = observed) of one kernel at one ratio.
    pub fn mask(&self, ratio_idx: usize, kernel: usize) -> Vec<bool> {
        let mut mask = vec![true; self.n_objects];
        for &o in self.hidden(ratio_idx, kernel) {
            mask[o] = false;
        }
        mask
    }

    /// Flags the scheduled objects hidden; stored values are untouched.
    pub fn apply<T: Scalar>(&self, ratio_idx: usize, kernels: &[SymmetricKernel<T>]) -> Result<Vec<SymmetricKernel<T>>> {
        if kernels.len() != self.n_kernels {
            return Err(Error::DimensionMismatch { expected: self.n_kernels, actual: kernels.len() });
        }
        kernels.iter().enumerate().map(|(k, q)| q.with_mask(self.mask(ratio_idx, k))).collect()
    }

    /// Checks ratio ordering, index ranges, removal counts, and that every
    /// ratio's hidden sets contain those of the previous ratio.
    pub fn verify(&self) -> Result<()> {
        check_ratios(&self.ratios)?;
        if self.hidden.len() != self.ratios.len() {
            return Err(Error::DimensionMismatch { expected: self.ratios.len(), actual: self.hidden.len() });
        }
        for (r, level) in self.hidden.iter().enumerate() {
            if level.len() != self.n_kernels {
                return Err(Error::DimensionMismatch { expected: self.n_kernels, actual: level.len() });
            }
            for set in level {
                if let Some(&bad) = set.iter().find(|&&o| o >= self.n_objects) {
                    return Err(Error::IndexOutOfRange { index: bad, len: self.n_objects });
                }
            }
            let want = removal_count(self.ratios[r], self.n_objects, self.n_kernels);
            if self.total_hidden(r) != want {
                return Err(Error::InvalidPartition(format!(
                    "ratio {}: {} removals, expected {want}",
                    self.ratios[r],
                    self.total_hidden(r)
                )));
            }
            if r > 0 {
                for (k, set) in level.iter().enumerate() {
                    if let Some(o) = self.hidden[r - 1][k].iter().find(|o| !set.contains(o)) {
                        return Err(Error::InvalidPartition(format!(
                            "not nested: object {o} hidden in kernel {} at ratio {} but visible at {}",
                            k + 1,
                            self.ratios[r - 1],
                            self.ratios[r]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
