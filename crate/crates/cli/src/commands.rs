use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use mkmc_core::dataset::io::{read_labels, read_mask_sidecar, write_labels, write_mask_sidecar};
use mkmc_core::dataset::{
    load_kernel_set, make_mask_schedule, make_split_among, read_kernel, synth_kernel_set, write_kernel, KernelFormat,
    MaskSchedule, SyntheticSpec,
};
use mkmc_core::experiment::{bench_seed, BenchConfig};
use mkmc_core::mkmc::m_step;
use mkmc_core::{evaluate, KernelSet, LabeledSplit, MkmcConfig, RunMeta, SmoConfig, SymmetricKernel};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::files::{self, LABELS, MANIFEST, SCHEDULE, TRACE};
use crate::{BenchArgs, CompleteArgs, EvalArgs, GlobalArgs, MaskArgs, SpecArgs, SynthArgs};

/// Ways a subcommand can fail, each with its own exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable or invalid input: exit 1.
    Usage(anyhow::Error),
    /// A factorization failed: exit 2.
    Numerical(anyhow::Error),
    /// The iteration cap was hit; outputs were still written: exit 2.
    NotConverged(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) | Failure::NotConverged(_) => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Numerical(_) => "numerical",
            Failure::NotConverged(_) => "not_converged",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(e) | Failure::Numerical(e) => format!("{e:#}"),
            Failure::NotConverged(m) => m.clone(),
        }
    }

    pub fn report(&self, json: bool) {
        if json {
            let value = json!({ "error": self.kind(), "message": self.message(), "exit_code": self.exit_code() });
            eprintln!("{value}");
        } else {
            eprintln!("error: {}", self.message());
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<mkmc_core::Error>() {
            Some(inner) if inner.is_numerical() => Failure::Numerical(e),
            _ => Failure::Usage(e),
        }
    }
}

impl From<mkmc_core::Error> for Failure {
    fn from(e: mkmc_core::Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

type Outcome = Result<(), Failure>;

fn mkmc_config(g: &GlobalArgs) -> Result<MkmcConfig, Failure> {
    let cfg = MkmcConfig { lambda: g.lambda, tol: g.tol, max_iters: g.max_iters, threads: g.threads, ..Default::default() };
    cfg.validate()?;
    Ok(cfg)
}

fn spec(s: &SpecArgs, seed: u64) -> Result<SyntheticSpec, Failure> {
    let spec = SyntheticSpec { n_objects: s.l, n_kernels: s.k, latent_dim: s.d, noise_scale: s.sigma, seed };
    spec.validate()?;
    Ok(spec)
}

fn load_dir(dir: &Path) -> anyhow::Result<KernelSet<f64>> {
    let paths = files::list_kernels(dir)?;
    load_kernel_set(&paths, None).with_context(|| format!("loading kernels from {}", dir.display()))
}

pub fn synth(g: &GlobalArgs, a: &SynthArgs) -> Outcome {
    let spec = spec(&a.spec, g.seed)?;
    let (set, labels) = synth_kernel_set::<f64>(&spec)?;
    files::create_dir(&a.out)?;
    let mut names = Vec::new();
    for (k, q) in set.kernels().iter().enumerate() {
        let path = files::kernel_path(&a.out, k, g.format);
        write_kernel(&path, q, g.format)?;
        names.push(path.file_name().unwrap().to_string_lossy().into_owned());
    }
    write_labels(&a.out.join(LABELS), &labels)?;
    let manifest = json!({
        "seed": g.seed,
        "l": spec.n_objects,
        "k": spec.n_kernels,
        "d": spec.latent_dim,
        "sigma": spec.noise_scale,
        "format": g.format,
        "kernels": names,
        "labels": LABELS,
    });
    files::write_json(&a.out.join(MANIFEST), &manifest)?;
    println!("{manifest}");
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct ScheduleFile {
    n_objects: usize,
    n_kernels: usize,
    seed: u64,
    ratios: Vec<f64>,
}

pub fn mask(g: &GlobalArgs, a: &MaskArgs) -> Outcome {
    if let Some(dir) = &a.check {
        return check_schedule(dir);
    }
    let (input, out) = (a.input.as_ref().unwrap(), a.out.as_ref().unwrap());
    let set = load_dir(input)?;
    let schedule = make_mask_schedule(set.dim(), set.len(), &a.ratios, g.seed)?;
    files::create_dir(out)?;
    for (r, &ratio) in schedule.ratios.iter().enumerate() {
        let dir = files::ratio_dir(out, ratio);
        files::create_dir(&dir)?;
        for k in 0..schedule.n_kernels {
            write_mask_sidecar(&files::mask_path(&dir, k), &schedule.mask(r, k))?;
        }
    }
    let meta = ScheduleFile {
        n_objects: schedule.n_objects,
        n_kernels: schedule.n_kernels,
        seed: g.seed,
        ratios: schedule.ratios.clone(),
    };
    files::write_json(&out.join(SCHEDULE), &meta)?;
    println!("{}", json!({ "ratios": meta.ratios, "seed": g.seed, "out": out }));
    Ok(())
}

fn check_schedule(dir: &Path) -> Outcome {
    let text = fs::read_to_string(dir.join(SCHEDULE)).with_context(|| format!("reading {}", dir.join(SCHEDULE).display()))?;
    let meta: ScheduleFile = serde_json::from_str(&text).context("parsing schedule.json")?;
    let mut hidden = Vec::with_capacity(meta.ratios.len());
    for &ratio in &meta.ratios {
        let rdir = files::ratio_dir(dir, ratio);
        let level = (0..meta.n_kernels)
            .map(|k| {
                let mask = read_mask_sidecar(&files::mask_path(&rdir, k), meta.n_objects)?;
                Ok(mask.iter().enumerate().filter(|(_, &m)| !m).map(|(i, _)| i).collect())
            })
            .collect::<mkmc_core::Result<Vec<Vec<usize>>>>()?;
        hidden.push(level);
    }
    let schedule =
        MaskSchedule { n_objects: meta.n_objects, n_kernels: meta.n_kernels, ratios: meta.ratios, seed: meta.seed, hidden };
    schedule.verify().context("schedule check failed")?;
    println!("{}", json!({ "check": "ok", "ratios": schedule.ratios.len() }));
    Ok(())
}

pub fn complete(g: &GlobalArgs, a: &CompleteArgs) -> Outcome {
    let cfg = mkmc_config(g)?;
    let mut set = load_dir(&a.input)?;
    if let Some(masks) = &a.masks {
        let kernels = set
            .kernels()
            .iter()
            .enumerate()
            .map(|(k, q)| q.with_mask(read_mask_sidecar(&files::mask_path(masks, k), q.dim())?))
            .collect::<mkmc_core::Result<Vec<_>>>()?;
        set = KernelSet::new(kernels, set.lambda())?;
    }
    let hidden: Vec<usize> = set.kernels().iter().map(SymmetricKernel::n_hidden).collect();
    let done = mkmc_core::complete(a.method, &set, &cfg)?;

    files::create_dir(&a.out)?;
    for (k, q) in done.kernels.iter().enumerate() {
        let full = SymmetricKernel::fully_observed(q.values().clone())?;
        write_kernel(&files::kernel_path(&a.out, k, g.format), &full, g.format)?;
    }
    write_kernel(&files::model_path(&a.out, g.format), &SymmetricKernel::fully_observed(done.model.clone())?, g.format)?;

    let mut manifest = json!({
        "method": a.method,
        "seed": g.seed,
        "lambda": cfg.lambda,
        "tol": cfg.tol,
        "max_iters": cfg.max_iters,
        "hidden_per_kernel": hidden,
    });
    let mut not_converged = None;
    if let Some(trace) = &done.trace {
        write_trace(&a.out.join(TRACE), trace, cfg.lambda)?;
        manifest["converged"] = json!(trace.converged);
        manifest["stop_reason"] = json!(trace.stop_reason);
        manifest["iterations"] = json!(trace.sweeps());
        manifest["objective"] = json!(finite_or_null(trace.final_objective().total));
        if !trace.converged {
            not_converged = Some(format!(
                "no convergence within {} iterations; partial results written to {}",
                cfg.max_iters,
                a.out.display()
            ));
        }
    }
    files::write_json(&a.out.join(MANIFEST), &manifest)?;
    println!("{manifest}");
    match not_converged {
        Some(msg) => Err(Failure::NotConverged(msg)),
        None => Ok(()),
    }
}

fn finite_or_null(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// `iter,J_total,J_prior,kl_1..kl_K,max_block_delta`; `J_prior` is the
/// weighted term `λ·KL(I, M)` so that the columns add up to `J_total`.
fn write_trace(path: &Path, trace: &mkmc_core::Trace, lambda: f64) -> anyhow::Result<()> {
    let k = trace.iterations.first().map_or(0, |r| r.objective.per_matrix_kl.len());
    let mut out = String::from("iter,J_total,J_prior");
    for i in 1..=k {
        write!(out, ",kl_{i}")?;
    }
    out.push_str(",max_block_delta\n");
    for rec in &trace.iterations {
        write!(out, "{},{},{}", rec.iter, rec.objective.total, lambda * rec.objective.prior_kl)?;
        for v in &rec.objective.per_matrix_kl {
            write!(out, ",{v}")?;
        }
        writeln!(out, ",{}", rec.max_block_delta)?;
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn eval(g: &GlobalArgs, a: &EvalArgs) -> Outcome {
    let truth = load_dir(&a.truth)?;
    let est = load_dir(&a.est)?;
    if truth.len() != est.len() || truth.dim() != est.dim() {
        return Err(Failure::Usage(anyhow!(
            "truth has {} kernels of size {}, estimate has {} of size {}",
            truth.len(),
            truth.dim(),
            est.len(),
            est.dim()
        )));
    }
    let labels = read_labels(&a.labels)?;
    if labels.len() != truth.dim() {
        bail_usage(format!("{} labels for {} objects", labels.len(), truth.dim()))?;
    }
    let labelled: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] != 0).collect();
    let split = make_split_among(&labelled, a.train_size, g.seed, None)?;
    let split = LabeledSplit::new(labels, split.train, split.test)?;
    let model = match files::find_model(&a.est) {
        Some(path) => read_kernel::<f64>(&path, KernelFormat::from_path(&path).expect("model path has a known extension"))?
            .into_values(),
        None => m_step(est.kernels(), g.lambda),
    };
    let smo = SmoConfig { c: a.c, ..Default::default() };
    let meta = RunMeta { method: a.est.display().to_string(), missing_ratio: f64::NAN, seed: g.seed };
    let report = evaluate(truth.kernels(), est.kernels(), &model, &split, &smo, meta)?;

    let mut out = String::from("metric,target,value\n");
    writeln!(out, "corr_distance,mean,{}", report.mean_corr_distance).unwrap();
    for (k, v) in report.roc_per_matrix.iter().enumerate() {
        writeln!(out, "roc,Q{},{v}", k + 1).unwrap();
    }
    writeln!(out, "roc,M,{}", report.roc_model).unwrap();
    let path = a.out.clone().unwrap_or_else(|| a.est.join("report.csv"));
    fs::write(&path, &out).with_context(|| format!("writing {}", path.display()))?;
    println!(
        "{}",
        json!({
            "corr_distance": report.mean_corr_distance,
            "roc_per_matrix": report.roc_per_matrix,
            "roc_model": report.roc_model,
            "report": path,
        })
    );
    Ok(())
}

fn bail_usage(msg: String) -> Outcome {
    Err(Failure::Usage(anyhow!(msg)))
}

pub fn bench(g: &GlobalArgs, a: &BenchArgs) -> Outcome {
    let mkmc = mkmc_config(g)?;
    let synth = spec(&a.spec, 0)?;
    if a.methods.is_empty() || a.seeds == 0 {
        bail_usage("bench needs at least one method and one seed".into())?;
    }
    let cfg = BenchConfig {
        synth,
        ratios: a.ratios.clone(),
        methods: a.methods.clone(),
        n_train: a.train_size.unwrap_or(synth.n_objects / 2),
        mkmc,
        smo: SmoConfig { c: a.c, ..Default::default() },
    };
    let mut out = String::from("method,ratio,seed,distance,roc_model\n");
    for seed in g.seed..g.seed + a.seeds {
        let rows = bench_seed(&cfg, seed).with_context(|| format!("benchmark seed {seed}"))?;
        for r in rows {
            writeln!(out, "{},{},{},{},{}", r.method, r.ratio, r.seed, r.distance, r.roc_model).unwrap();
        }
        log::info!("seed {seed} done");
    }
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        files::create_dir(parent)?;
    }
    fs::write(&a.out, &out).with_context(|| format!("writing {}", a.out.display()))?;
    println!("{}", json!({ "rows": out.lines().count() - 1, "out": a.out }));
    Ok(())
}
