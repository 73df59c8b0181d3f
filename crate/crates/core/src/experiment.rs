//! Completion methods behind one interface, and the synthetic benchmark sweep.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{mean_impute, zero_impute};
use crate::dataset::{make_mask_schedule, make_split, synth_kernel_set, SyntheticSpec};
use crate::error::{Error, Result};
use crate::eval::{classification_roc, corr_matrix_distance, LabeledSplit, SmoConfig};
use crate::matrix::Mat;
use crate::mkmc::{m_step, run, CompletionTrace, KernelSet, MkmcConfig};
use crate::scalar::Scalar;
use crate::symmat::SymmetricKernel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mkmc,
    Zero,
    Mean,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Mkmc, Method::Zero, Method::Mean];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mkmc => "mkmc",
            Method::Zero => "zero",
            Method::Mean => "mean",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mkmc" => Ok(Method::Mkmc),
            "zero" => Ok(Method::Zero),
            "mean" => Ok(Method::Mean),
            other => Err(Error::InvalidConfig(format!("unknown method {other:?} (expected mkmc, zero or mean)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion<T> {
    pub kernels: Vec<SymmetricKernel<T>>,
    pub model: Mat<T>,
    /// Only MKMC iterates; the baselines have no trace.
    pub trace: Option<CompletionTrace<T>>,
}

/// Completes every kernel of `set` with `method`. For the baselines the model
/// matrix is the λ-regularized mean of the imputed kernels.
pub fn complete<T: Scalar>(method: Method, set: &KernelSet<T>, cfg: &MkmcConfig) -> Result<Completion<T>> {
    cfg.validate()?;
    let lambda = T::of(cfg.lambda);
    let kernels = match method {
        Method::Mkmc => {
            let (done, trace) = run(set, cfg)?;
            let model = done.model().cloned().expect("run always sets the model");
            return Ok(Completion { kernels: done.into_kernels(), model, trace: Some(trace) });
        }
        Method::Zero => set.kernels().iter().map(zero_impute).collect::<Vec<_>>(),
        Method::Mean => set
            .kernels()
            .iter()
            .enumerate()
            .map(|(k, q)| mean_impute(q).map_err(|e| e.in_kernel(k)))
            .collect::<Result<Vec<_>>>()?,
    };
    let model = m_step(&kernels, lambda);
    Ok(Completion { kernels, model, trace: None })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Generator settings; the seed field is replaced per benchmark seed.
    pub synth: SyntheticSpec,
    pub ratios: Vec<f64>,
    pub methods: Vec<Method>,
    pub n_train: usize,
    pub mkmc: MkmcConfig,
    pub smo: SmoConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: Method,
    pub ratio: f64,
    pub seed: u64,
    pub distance: f64,
    pub roc_model: f64,
}

/// Seeds for the generator, the mask schedule and the split, derived from one
/// benchmark seed.
pub fn derive_seeds(seed: u64) -> [u64; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    [rng.random(), rng.random(), rng.random()]
}

/// One benchmark seed: generate, mask at every ratio, complete with every
/// method, then score distance to the truth and the model matrix's ROC.
/// Rows come out ratio-major, methods in the configured order.
pub fn bench_seed(cfg: &BenchConfig, seed: u64) -> Result<Vec<BenchRow>> {
    let [synth_seed, mask_seed, split_seed] = derive_seeds(seed);
    let spec = SyntheticSpec { seed: synth_seed, ..cfg.synth };
    let (truth, labels) = synth_kernel_set::<f64>(&spec)?;
    let schedule = make_mask_schedule(spec.n_objects, spec.n_kernels, &cfg.ratios, mask_seed)?;
    let split = make_split(spec.n_objects, cfg.n_train, split_seed, None)?;
    let split = LabeledSplit::new(labels, split.train, split.test)?;

    let mut rows = Vec::with_capacity(cfg.ratios.len() * cfg.methods.len());
    for (r, &ratio) in cfg.ratios.iter().enumerate() {
        let masked = KernelSet::new(schedule.apply(r, truth.kernels())?, cfg.mkmc.lambda)?;
        for &method in &cfg.methods {
            let done = complete(method, &masked, &cfg.mkmc)?;
            if let Some(trace) = &done.trace {
                if !trace.converged {
                    log::info!("seed {seed} ratio {ratio}: mkmc used all {} iterations", trace.sweeps());
                }
            }
            let distance = corr_matrix_distance(truth.kernels(), &done.kernels)?;
            let roc_model = classification_roc(&done.model, &split, &cfg.smo)?;
            rows.push(BenchRow { method, ratio, seed, distance, roc_model });
        }
    }
    Ok(rows)
}
