//! Directory layout shared by the subcommands.
//!
//! A kernel directory holds `kernel_1.<ext>` … `kernel_K.<ext>`, optionally
//! `model.<ext>`, `labels.csv` and `manifest.json`. A schedule directory holds
//! `schedule.json` and one `ratio_<r>/` folder per ratio with
//! `kernel_<k>.mask` sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mkmc_core::dataset::KernelFormat;
use serde::Serialize;

pub const LABELS: &str = "labels.csv";
pub const MANIFEST: &str = "manifest.json";
pub const SCHEDULE: &str = "schedule.json";
pub const TRACE: &str = "trace.csv";

pub fn kernel_path(dir: &Path, k: usize, format: KernelFormat) -> PathBuf {
    dir.join(format!("kernel_{}.{}", k + 1, format.extension()))
}

pub fn model_path(dir: &Path, format: KernelFormat) -> PathBuf {
    dir.join(format!("model.{}", format.extension()))
}

pub fn ratio_dir(dir: &Path, ratio: f64) -> PathBuf {
    dir.join(format!("ratio_{ratio:.2}"))
}

pub fn mask_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("kernel_{}.mask", k + 1))
}

/// Kernel files of a directory in index order; indices must run 1..=K.
pub fn list_kernels(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut found: Vec<(usize, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        if KernelFormat::from_path(&path).is_none() {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else { continue };
        if let Some(idx) = stem.strip_prefix("kernel_").and_then(|n| n.parse::<usize>().ok()) {
            found.push((idx, path));
        }
    }
    found.sort();
    if found.is_empty() {
        bail!("no kernel_<k>.csv or kernel_<k>.bin files in {}", dir.display());
    }
    for (want, (idx, path)) in (1..).zip(&found) {
        if *idx != want {
            bail!("kernel files must be numbered 1..K without gaps or duplicates; found {}", path.display());
        }
    }
    Ok(found.into_iter().map(|(_, p)| p).collect())
}

pub fn find_model(dir: &Path) -> Option<PathBuf> {
    [KernelFormat::Csv, KernelFormat::Binary].into_iter().map(|f| model_path(dir, f)).find(|p| p.exists())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}
