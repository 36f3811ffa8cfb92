//! CSV datasets with a named cause/effect/target partition.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use causal_ssl_core::linalg::Matrix;
use causal_ssl_core::Dataset;

use crate::PartitionConfig;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("missing column {0:?}")]
    MissingColumn(String),
    /// `row` counts data rows from 1, excluding the header.
    #[error("row {row}, column {col:?}: cell is not a number")]
    NonNumericCell { row: usize, col: String },
    #[error("target column has {distinct} distinct values, expected at most 2")]
    TargetNotBinary { distinct: usize },
    #[error("positive label {0:?} does not occur in the target column")]
    PositiveLabelAbsent(String),
    #[error("file has no data rows")]
    EmptyFile,
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Dataset(#[from] causal_ssl_core::Error),
}

/// Loads `path` and optionally z-scores every feature column.
pub fn load_csv(path: &Path, cfg: &PartitionConfig, standardize: bool) -> Result<Dataset, LoadError> {
    let file = File::open(path).map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    let ds = read_csv(file, cfg)?;
    Ok(if standardize { ds.standardized() } else { ds })
}

fn label_matches(value: &str, positive: &str) -> bool {
    if value == positive {
        return true;
    }
    match (value.parse::<f64>(), positive.parse::<f64>()) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}

/// Parses CSV text with a header row. Columns not named in `cfg` are ignored.
pub fn read_csv<R: Read>(reader: R, cfg: &PartitionConfig) -> Result<Dataset, LoadError> {
    cfg.validate().map_err(LoadError::Partition)?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Err(LoadError::EmptyFile);
    }
    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let find = |name: &String| index.get(name.as_str()).copied().ok_or_else(|| LoadError::MissingColumn(name.clone()));
    let cause_idx = cfg.cause_columns.iter().map(find).collect::<Result<Vec<_>, _>>()?;
    let effect_idx = cfg.effect_columns.iter().map(find).collect::<Result<Vec<_>, _>>()?;
    let target_idx = find(&cfg.target_column)?;

    let (mut causes, mut effects, mut targets) = (Vec::new(), Vec::new(), Vec::<String>::new());
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let cell = |i: usize| -> Result<f64, LoadError> {
            record
                .get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| LoadError::NonNumericCell { row: r + 1, col: headers[i].to_string() })
        };
        for &i in &cause_idx {
            causes.push(cell(i)?);
        }
        for &i in &effect_idx {
            effects.push(cell(i)?);
        }
        targets.push(record.get(target_idx).unwrap_or("").to_string());
    }
    let n = targets.len();
    if n == 0 {
        return Err(LoadError::EmptyFile);
    }

    let mut distinct: Vec<&str> = targets.iter().map(String::as_str).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() > 2 {
        return Err(LoadError::TargetNotBinary { distinct: distinct.len() });
    }
    let labels: Vec<u8> = targets.iter().map(|t| label_matches(t, &cfg.positive_label) as u8).collect();
    if distinct.len() == 2 && !labels.contains(&1) {
        return Err(LoadError::PositiveLabelAbsent(cfg.positive_label.clone()));
    }
    if distinct.len() == 2 && !labels.contains(&0) {
        // both values compare equal to the positive label, e.g. "1" and "1.0"
        return Err(LoadError::TargetNotBinary { distinct: 1 });
    }

    let ds = Dataset::with_names(
        Matrix::from_vec(n, cause_idx.len(), causes)?,
        Matrix::from_vec(n, effect_idx.len(), effects)?,
        Some(labels),
        cfg.cause_columns.clone(),
        cfg.effect_columns.clone(),
    )?;
    Ok(ds)
}

/// Writes causes, effects and, when present, a `y` column of 0/1 labels.
///
/// Floats use the shortest representation that parses back to the same bits.
pub fn write_dataset_csv<W: Write>(ds: &Dataset, writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = ds.cause_names().iter().chain(ds.effect_names()).map(String::as_str).collect();
    if ds.labels().is_some() {
        header.push("y");
    }
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for i in 0..ds.len() {
        row.clear();
        row.extend(ds.causes().row(i).iter().chain(ds.effects().row(i)).map(|v| v.to_string()));
        if let Some(l) = ds.labels() {
            row.push(l[i].to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Partition file matching the columns written by [`write_dataset_csv`].
pub fn partition_of(ds: &Dataset) -> PartitionConfig {
    PartitionConfig {
        cause_columns: ds.cause_names().to_vec(),
        effect_columns: ds.effect_names().to_vec(),
        target_column: "y".into(),
        positive_label: "1".into(),
    }
}
