//! CSV dialect for datasets: a header row, one column per feature, exactly
//! one label column and an optional integer replication column.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Column name written for replication ids when none is configured.
pub const DEFAULT_REPLICATION_COLUMN: &str = "replication";

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub label_column: String,
    pub replication_column: Option<String>,
    /// Restrict features to these columns; all remaining columns otherwise.
    pub feature_columns: Option<Vec<String>>,
}

impl CsvOptions {
    pub fn new(label_column: impl Into<String>) -> Self {
        CsvOptions {
            label_column: label_column.into(),
            replication_column: None,
            feature_columns: None,
        }
    }

    pub fn replication_column(mut self, name: impl Into<String>) -> Self {
        self.replication_column = Some(name.into());
        self
    }
}

pub fn read_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    read_csv_from(file, opts)
}

/// Parse a dataset. Replication ids may be any integers; they are mapped
/// onto `0..R` in ascending order of their raw values.
pub fn read_csv_from<R: Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();

    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::invalid(format!("column `{name}` not found in header")))
    };
    let label_idx = find(&opts.label_column)?;
    let rep_idx = opts.replication_column.as_deref().map(find).transpose()?;
    let feature_idx: Vec<usize> = match &opts.feature_columns {
        Some(cols) => cols.iter().map(|c| find(c)).collect::<Result<_>>()?,
        None => (0..headers.len())
            .filter(|&i| i != label_idx && Some(i) != rep_idx)
            .collect(),
    };
    if feature_idx.is_empty() {
        return Err(Error::invalid("no feature columns"));
    }
    if feature_idx.contains(&label_idx) || rep_idx.is_some_and(|r| feature_idx.contains(&r)) {
        return Err(Error::invalid(
            "label and replication columns cannot also be features",
        ));
    }

    let mut rows: Vec<f64> = Vec::new();
    let mut labels = Vec::new();
    let mut raw_ids: Vec<i64> = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        // row numbers are 1-based data rows (header excluded)
        let row = k + 1;
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                row,
                column: String::new(),
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        let field = |i: usize| -> Result<f64> {
            let s = record[i].trim();
            let v: f64 = s.parse().map_err(|_| Error::Parse {
                row,
                column: headers[i].clone(),
                message: format!("`{s}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: headers[i].clone(),
                    message: "value is not finite".to_string(),
                });
            }
            Ok(v)
        };
        for &j in &feature_idx {
            rows.push(field(j)?);
        }
        labels.push(field(label_idx)?);
        if let Some(ri) = rep_idx {
            let s = record[ri].trim();
            let id: i64 = s.parse().map_err(|_| Error::Parse {
                row,
                column: headers[ri].clone(),
                message: format!("`{s}` is not an integer replication id"),
            })?;
            raw_ids.push(id);
        }
    }
    let n = labels.len();
    let d = feature_idx.len();
    let x = DMatrix::from_row_slice(n, d, &rows);
    let ids = if rep_idx.is_some() {
        densify(&raw_ids)
    } else {
        vec![0; n]
    };
    let names = feature_idx.iter().map(|&i| headers[i].clone()).collect();
    Dataset::with_names(x, labels, ids, names, headers[label_idx].clone())
}

fn densify(raw: &[i64]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    for &v in raw {
        map.entry(v).or_insert(0usize);
    }
    for (k, slot) in map.values_mut().enumerate() {
        *slot = k;
    }
    raw.iter().map(|v| map[v]).collect()
}

pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv_to(ds, file)
}

/// Serialize features, labels and replication ids. The replication column
/// is always written so that the file round-trips through [`read_csv_from`].
pub fn write_csv_to<W: Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = ds.feature_names().iter().map(String::as_str).collect();
    header.push(ds.label_name());
    header.push(DEFAULT_REPLICATION_COLUMN);
    w.write_record(&header)?;
    for i in 0..ds.n() {
        let mut rec: Vec<String> = ds.features().row(i).iter().map(|v| v.to_string()).collect();
        rec.push(ds.labels()[i].to_string());
        rec.push(ds.replication_ids()[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
