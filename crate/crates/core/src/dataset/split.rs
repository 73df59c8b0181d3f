use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Train/test division of object indices; both lists ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Random `n_train` of the objects `0..n_objects` for training, the rest for
/// testing. With `nested_with`, its training objects are kept and topped up.
pub fn make_split(n_objects: usize, n_train: usize, seed: u64, nested_with: Option<&SplitIndices>) -> Result<SplitIndices> {
    let all: Vec<usize> = (0..n_objects).collect();
    make_split_among(&all, n_train, seed, nested_with)
}

/// Same as [`make_split`] restricted to `candidates` (e.g. labelled objects).
pub fn make_split_among(
    candidates: &[usize],
    n_train: usize,
    seed: u64,
    nested_with: Option<&SplitIndices>,
) -> Result<SplitIndices> {
    if n_train >= candidates.len() {
        return Err(Error::TrainTooLarge { n_train, len: candidates.len() });
    }
    let mut train: Vec<usize> = Vec::with_capacity(n_train);
    if let Some(base) = nested_with {
        if base.train.len() > n_train {
            return Err(Error::InvalidConfig(format!(
                "nested split keeps {} training objects but only {n_train} were requested",
                base.train.len()
            )));
        }
        for &i in &base.train {
            if !candidates.contains(&i) {
                return Err(Error::IndexOutOfRange { index: i, len: candidates.len() });
            }
        }
        train.extend_from_slice(&base.train);
    }
    let mut pool: Vec<usize> = candidates.iter().copied().filter(|i| !train.contains(i)).collect();
    pool.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let missing = n_train - train.len();
    train.extend_from_slice(&pool[..missing]);
    train.sort_unstable();
    let mut test: Vec<usize> = pool[missing..].to_vec();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}
