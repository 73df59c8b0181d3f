//! Kernel matrix files.
//!
//! * CSV: comma separated, row major, optional header line. A hidden object
//!   has its whole row and column set to `NaN`; any other `NaN` pattern is
//!   rejected.
//! * Binary: `"MKMC"`, version `u16`, `ℓ` as `u32`, `ℓ²` row-major `f64`
//!   values, then `ℓ` mask bytes (1 = observed). All integers and floats are
//!   little endian.
//! * Mask sidecar: one line per object, `1` = observed, `0` = hidden.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::mkmc::{KernelSet, DEFAULT_LAMBDA};
use crate::scalar::Scalar;
use crate::symmat::SymmetricKernel;

pub const BINARY_MAGIC: &[u8; 4] = b"MKMC";
pub const BINARY_VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFormat {
    Csv,
    Binary,
}

impl KernelFormat {
    pub fn extension(self) -> &'static str {
        match self {
            KernelFormat::Csv => "csv",
            KernelFormat::Binary => "bin",
        }
    }

    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(KernelFormat::Csv),
            "bin" => Some(KernelFormat::Binary),
            _ => None,
        }
    }
}

impl FromStr for KernelFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(KernelFormat::Csv),
            "bin" | "binary" => Ok(KernelFormat::Binary),
            other => Err(Error::InvalidConfig(format!("unknown kernel format '{other}'"))),
        }
    }
}

fn parse_error(path: &Path, line: u64, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, column, message: message.into() }
}

pub fn read_csv<T: Scalar>(path: &Path) -> Result<SymmetricKernel<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (n, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(n as u64 + 1, |p| p.line());
        let parsed: std::result::Result<Vec<f64>, usize> =
            record.iter().enumerate().map(|(col, field)| field.parse::<f64>().map_err(|_| col)).collect();
        match parsed {
            Ok(values) => rows.push(values),
            // a non-numeric first line is a header
            Err(_) if n == 0 => continue,
            Err(col) => {
                return Err(parse_error(path, line, col + 1, format!("not a number: '{}'", &record[col])));
            }
        }
    }
    if rows.is_empty() {
        return Err(parse_error(path, 1, 0, "no matrix rows"));
    }
    let dim = rows.len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(parse_error(path, i as u64 + 1, row.len(), format!("expected {dim} columns in a {dim}x{dim} matrix")));
        }
    }

    let hidden: Vec<bool> = rows.iter().map(|r| r.iter().all(|v| v.is_nan())).collect();
    for i in 0..dim {
        for j in 0..dim {
            if rows[i][j].is_nan() != (hidden[i] || hidden[j]) {
                return Err(Error::InvalidMaskPattern { path: path.to_path_buf(), object: i });
            }
        }
    }
    let values = Mat::from_fn(dim, dim, |i, j| if rows[i][j].is_nan() { T::zero() } else { T::of(rows[i][j]) });
    if !values.is_finite() {
        return Err(Error::InvalidFormat { path: path.to_path_buf(), message: "non-finite value".into() });
    }
    finish_kernel(path, values, hidden.iter().map(|h| !h).collect())
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => parse_error(path, line, 0, format!("{other:?}")),
    }
}

fn finish_kernel<T: Scalar>(path: &Path, values: Mat<T>, mask: Vec<bool>) -> Result<SymmetricKernel<T>> {
    let kernel = SymmetricKernel::new(values, mask)?;
    if !kernel.observed_is_psd() {
        log::warn!("{}: observed block is not positive semidefinite", path.display());
    }
    Ok(kernel)
}

pub fn write_csv<T: Scalar>(path: &Path, kernel: &SymmetricKernel<T>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    let mask = kernel.mask();
    let values = kernel.values();
    for i in 0..kernel.dim() {
        let mut line = String::with_capacity(kernel.dim() * 20);
        for j in 0..kernel.dim() {
            if j > 0 {
                line.push(',');
            }
            if mask[i] && mask[j] {
                line.push_str(&values[(i, j)].to_string());
            } else {
                line.push_str("NaN");
            }
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_binary<T: Scalar>(path: &Path, kernel: &SymmetricKernel<T>) -> Result<()> {
    let dim = kernel.dim();
    let dim32 = u32::try_from(dim).map_err(|_| Error::InvalidConfig(format!("dimension {dim} too large")))?;
    let mut buf = Vec::with_capacity(10 + dim * dim * 8 + dim);
    buf.extend_from_slice(BINARY_MAGIC);
    buf.extend_from_slice(&BINARY_VERSION.to_le_bytes());
    buf.extend_from_slice(&dim32.to_le_bytes());
    for &v in kernel.values().as_slice() {
        buf.extend_from_slice(&v.to_f64_lossy().to_le_bytes());
    }
    buf.extend(kernel.mask().iter().map(|&m| m as u8));
    fs::write(path, buf)?;
    Ok(())
}

pub fn read_binary<T: Scalar>(path: &Path) -> Result<SymmetricKernel<T>> {
    let bytes = fs::read(path)?;
    let bad = |message: String| Error::InvalidFormat { path: path.to_path_buf(), message };
    if bytes.len() < 10 || &bytes[..4] != BINARY_MAGIC {
        return Err(bad("missing MKMC header".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != BINARY_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let dim = u32::from_le_bytes([bytes[6], bytes[7], bytes[8], bytes[9]]) as usize;
    let expected = 10 + dim * dim * 8 + dim;
    if bytes.len() != expected || dim == 0 {
        return Err(bad(format!("expected {expected} bytes for dimension {dim}, found {}", bytes.len())));
    }
    let body = &bytes[10..10 + dim * dim * 8];
    let data: Vec<T> = body
        .chunks_exact(8)
        .map(|c| T::of(f64::from_le_bytes(c.try_into().expect("chunk of 8"))))
        .collect();
    let mask = bytes[10 + dim * dim * 8..]
        .iter()
        .enumerate()
        .map(|(i, &b)| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(bad(format!("mask byte {other} for object {i}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    finish_kernel(path, Mat::from_vec(dim, dim, data)?, mask)
}

pub fn read_kernel<T: Scalar>(path: &Path, format: KernelFormat) -> Result<SymmetricKernel<T>> {
    match format {
        KernelFormat::Csv => read_csv(path),
        KernelFormat::Binary => read_binary(path),
    }
}

pub fn write_kernel<T: Scalar>(path: &Path, kernel: &SymmetricKernel<T>, format: KernelFormat) -> Result<()> {
    match format {
        KernelFormat::Csv => write_csv(path, kernel),
        KernelFormat::Binary => write_binary(path, kernel),
    }
}

/// Loads one kernel per path. The format is taken from `format` or, when
/// absent, from each file's extension.
pub fn load_kernel_set<T: Scalar, P: AsRef<Path>>(paths: &[P], format: Option<KernelFormat>) -> Result<KernelSet<T>> {
    let kernels = paths
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let p = p.as_ref();
            let fmt = format.or_else(|| KernelFormat::from_path(p)).unwrap_or(KernelFormat::Csv);
            read_kernel(p, fmt).map_err(|e| e.in_kernel(k))
        })
        .collect::<Result<Vec<_>>>()?;
    KernelSet::new(kernels, T::of(DEFAULT_LAMBDA))
}

pub fn read_mask_sidecar(path: &Path, dim: usize) -> Result<Vec<bool>> {
    let text = fs::read_to_string(path)?;
    let mut mask = Vec::with_capacity(dim);
    for (n, line) in text.lines().enumerate() {
        match line.trim() {
            "" => continue,
            "1" => mask.push(true),
            "0" => mask.push(false),
            other => return Err(parse_error(path, n as u64 + 1, 1, format!("expected 0 or 1, found '{other}'"))),
        }
    }
    if mask.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, actual: mask.len() });
    }
    Ok(mask)
}

pub fn write_mask_sidecar(path: &Path, mask: &[bool]) -> Result<()> {
    let text: String = mask.iter().map(|&m| if m { "1\n" } else { "0\n" }).collect();
    fs::write(path, text)?;
    Ok(())
}

/// Labels file: a `label` header then one of `1`, `-1`, `0` per line.
pub fn read_labels(path: &Path) -> Result<Vec<i8>> {
    let text = fs::read_to_string(path)?;
    let mut labels = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || (n == 0 && t.eq_ignore_ascii_case("label")) {
            continue;
        }
        let v: i8 = t
            .parse()
            .ok()
            .filter(|v| matches!(v, -1..=1))
            .ok_or_else(|| parse_error(path, n as u64 + 1, 1, format!("invalid label '{t}'")))?;
        labels.push(v);
    }
    Ok(labels)
}

pub fn write_labels(path: &Path, labels: &[i8]) -> Result<()> {
    let mut text = String::from("label\n");
    for l in labels {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SymmetricKernel<f64> {
        let v = Mat::from_rows(&[[2.0, 0.1, -0.3, 0.5], [0.1, 1.0, 0.2, 0.0], [-0.3, 0.2, 3.0, 0.7], [0.5, 0.0, 0.7, 1.5]]).unwrap();
        SymmetricKernel::new(v, vec![true, true, true, false]).unwrap()
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("k.bin");
        let k = sample().with_values(Mat::from_fn(4, 4, |i, j| 1.0 / (1.0 + i as f64 + j as f64) + 0.1 * (i == j) as u8 as f64));
        write_binary(&p, &k).unwrap();
        let back: SymmetricKernel<f64> = read_binary(&p).unwrap();
        assert_eq!(back, k);
        let bytes = fs::read(&p).unwrap();
        assert_eq!(&bytes[..4], b"MKMC");
        assert_eq!(bytes.len(), 4 + 2 + 4 + 16 * 8 + 4);
        assert_eq!(*bytes.last().unwrap(), 0);
    }

    #[test]
    fn csv_nan_rows_become_mask() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("k.csv");
        write_csv(&p, &sample()).unwrap();
        let back: SymmetricKernel<f64> = read_csv(&p).unwrap();
        assert_eq!(back.mask(), &[true, true, true, false]);
        assert_eq!(back.values()[(0, 2)], -0.3);
        assert_eq!(back.values()[(3, 3)], 0.0);
    }

    #[test]
    fn csv_partial_nan_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("k.csv");
        fs::write(&p, "1,0,0,0\n0,1,0,NaN\n0,0,1,0\n0,NaN,0,1\n").unwrap();
        assert!(matches!(read_csv::<f64>(&p), Err(Error::InvalidMaskPattern { object: 1, .. })));
        fs::write(&p, "1,0,0,NaN\n0,1,0,NaN\n0,0,1,NaN\nNaN,NaN,NaN,NaN\n").unwrap();
        assert_eq!(read_csv::<f64>(&p).unwrap().mask(), &[true, true, true, false]);
    }

    #[test]
    fn csv_header_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("k.csv");
        fs::write(&p, "a,b\n1,0.5\n0.5,1\n").unwrap();
        assert_eq!(read_csv::<f64>(&p).unwrap().dim(), 2);
        fs::write(&p, "1,0.5\n0.5,x\n").unwrap();
        match read_csv::<f64>(&p) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
        fs::write(&p, "").unwrap();
        assert!(matches!(read_csv::<f64>(&p), Err(Error::Parse { .. })));
        fs::write(&p, "1,0.5\n0.6,1\n").unwrap();
        assert!(matches!(read_csv::<f64>(&p), Err(Error::Asymmetric { .. })));
        fs::write(&p, "1,0.5,0\n0.5,1,0\n").unwrap();
        assert!(matches!(read_csv::<f64>(&p), Err(Error::Parse { .. })));
    }

    #[test]
    fn sidecar_and_labels() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("mask.txt");
        write_mask_sidecar(&m, &[true, false, true]).unwrap();
        assert_eq!(fs::read_to_string(&m).unwrap(), "1\n0\n1\n");
        assert_eq!(read_mask_sidecar(&m, 3).unwrap(), vec![true, false, true]);
        assert!(read_mask_sidecar(&m, 4).is_err());
        let l = dir.path().join("labels.csv");
        write_labels(&l, &[1, -1, 0]).unwrap();
        assert_eq!(read_labels(&l).unwrap(), vec![1, -1, 0]);
    }

    #[test]
    fn truncated_binary_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("k.bin");
        write_binary(&p, &sample()).unwrap();
        let mut bytes = fs::read(&p).unwrap();
        bytes.pop();
        fs::write(&p, &bytes).unwrap();
        assert!(matches!(read_binary::<f64>(&p), Err(Error::InvalidFormat { .. })));
    }
}
