//! Dataset files: one CSV of samples plus a JSON sidecar.
//!
//! The CSV has a header `channel_0,...,channel_{M-1}` and one row per time
//! sample. Values are written in Rust's shortest round-trip form, so reading
//! a file back reproduces the matrix exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::signals::SourceSpec;
use crate::{IcaError, Result, SignalMatrix};

/// Ground truth and provenance stored next to a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    /// Row-major mixing matrix.
    pub mixing: Vec<Vec<f64>>,
    pub seed: u64,
    pub source_seed: u64,
    pub mixing_seed: u64,
    pub noise_seed: u64,
    pub noise_std: f64,
    pub samples: usize,
    pub source_plan: Vec<SourceSpec>,
}

impl DatasetMeta {
    pub fn mixing_matrix(&self) -> Result<Array2<f64>> {
        matrix_from_rows(&self.mixing)
    }
}

/// Row-major nested vectors, the JSON layout of matrices.
pub fn matrix_to_rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Array2<f64>> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != n) {
        return Err(IcaError::DimensionMismatch("ragged matrix rows".into()));
    }
    Array2::from_shape_vec((m, n), rows.concat())
        .map_err(|e| IcaError::DimensionMismatch(e.to_string()))
}

/// `data.csv` -> `data.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn write_dataset(path: &Path, x: &SignalMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record((0..x.nrows()).map(|c| format!("channel_{c}")))?;
    for col in x.columns() {
        w.write_record(col.iter().map(|v| v.to_string()))?;
    }
    w.into_inner().map_err(|e| IcaError::Io(e.into_error()))?.flush()?;
    Ok(())
}

/// Read a dataset written by [`write_dataset`] back into an `M x T` matrix.
pub fn read_dataset(path: &Path) -> Result<SignalMatrix> {
    let mut r = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let m = r.headers()?.len();
    if m == 0 {
        return Err(IcaError::InvalidArgument(format!("{} has no columns", path.display())));
    }
    let mut values = Vec::new();
    let mut t = 0;
    for rec in r.records() {
        let rec = rec?;
        for field in rec.iter() {
            let v: f64 = field.trim().parse().map_err(|_| {
                IcaError::InvalidArgument(format!("{}: not a number: '{field}'", path.display()))
            })?;
            values.push(v);
        }
        t += 1;
    }
    let by_time = Array2::from_shape_vec((t, m), values)
        .map_err(|e| IcaError::DimensionMismatch(e.to_string()))?;
    Ok(by_time.reversed_axes().as_standard_layout().into_owned())
}

pub fn write_sidecar<T: Serialize>(path: &Path, meta: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, meta)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn read_sidecar(path: &Path) -> Result<DatasetMeta> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}
