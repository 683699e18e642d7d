//! Small tabular datasets in the style of standard regression benchmarks.
//!
//! Features cycle through uniform(0, 1), Exp(1) and χ²₁ columns, so the
//! design is neither Gaussian nor centered. The label is an affine function
//! of the features plus Gaussian noise.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::csv_io::{read_csv_from, CsvOptions, DEFAULT_REPLICATION_COLUMN};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::Seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDatasetSpec {
    pub name: String,
    pub n: usize,
    pub features: usize,
    pub intercept: f64,
    /// Cycled when shorter than `features`.
    pub slopes: Vec<f64>,
    pub noise_std: f64,
    pub seed: u64,
}

const SLOPES: [f64; 6] = [1.0, -0.7, 0.5, 0.8, -0.6, 0.9];

fn bundled_spec(name: &str, n: usize, features: usize, noise_std: f64, seed: u64) -> TableDatasetSpec {
    TableDatasetSpec {
        name: name.to_string(),
        n,
        features,
        intercept: 0.3,
        slopes: SLOPES.to_vec(),
        noise_std,
        seed,
    }
}

/// Names of the datasets shipped with the crate.
pub const BUNDLED_DATASETS: [&str; 4] = ["synthetic1", "synthetic2", "synthetic3", "synthetic4"];

pub fn bundled_specs() -> Vec<TableDatasetSpec> {
    vec![
        bundled_spec("synthetic1", 50, 2, 0.15, 1),
        bundled_spec("synthetic2", 100, 3, 0.1, 2),
        bundled_spec("synthetic3", 200, 4, 0.25, 3),
        bundled_spec("synthetic4", 400, 5, 0.15, 4),
    ]
}

/// Generate a dataset from its spec. Features are named `x0, x1, ...`
/// and the label `y`.
pub fn table_dataset(spec: &TableDatasetSpec) -> Result<Dataset> {
    if spec.n == 0 || spec.features == 0 {
        return Err(Error::invalid("table dataset needs n >= 1 and at least one feature"));
    }
    if spec.slopes.is_empty() {
        return Err(Error::invalid("slopes must be nonempty"));
    }
    let mut rng = Seed(spec.seed).rng();
    let mut rows = Vec::with_capacity(spec.n);
    let mut y = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let row: Vec<f64> = (0..spec.features)
            .map(|j| match j % 3 {
                0 => rng.random::<f64>(),
                1 => -(1.0 - rng.random::<f64>()).ln(),
                _ => {
                    let z: f64 = rng.sample(StandardNormal);
                    z * z
                }
            })
            .collect();
        let z: f64 = rng.sample(StandardNormal);
        let signal: f64 = row
            .iter()
            .enumerate()
            .map(|(j, v)| v * spec.slopes[j % spec.slopes.len()])
            .sum();
        y.push(spec.intercept + signal + spec.noise_std * z);
        rows.push(row);
    }
    Dataset::from_rows(&rows, y)
}

fn bundled_text(name: &str) -> Option<&'static str> {
    match name {
        "synthetic1" => Some(include_str!("../../data/synthetic1.csv")),
        "synthetic2" => Some(include_str!("../../data/synthetic2.csv")),
        "synthetic3" => Some(include_str!("../../data/synthetic3.csv")),
        "synthetic4" => Some(include_str!("../../data/synthetic4.csv")),
        _ => None,
    }
}

/// Load a bundled dataset by name.
pub fn bundled_dataset(name: &str) -> Result<Dataset> {
    let text = bundled_text(name)
        .ok_or_else(|| Error::invalid(format!("unknown bundled dataset `{name}`")))?;
    read_csv_from(text.as_bytes(), &CsvOptions::new("y").replication_column(DEFAULT_REPLICATION_COLUMN))
}
