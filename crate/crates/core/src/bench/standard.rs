//! Fitting protocol for tabular datasets and its negative control.
//!
//! A dataset is min-max normalized, given a bias column and fitted with
//! ordinary least squares on the ordered rows; those weights are the
//! reference. Each trial then splits the rows into `R` replications,
//! shuffles labels inside each replication and fits again.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use super::datasets::{bundled_dataset, table_dataset, TableDatasetSpec};
use super::TrialStats;
use crate::csv_io::{read_csv, CsvOptions};
use crate::data::{
    normalize_minmax, ols_fit, partition_replications, relative_error, shuffle_within_replications,
    Dataset, WeightVector, CONSTANT_COLUMN_TOL,
};
use crate::error::{Error, Result};
use crate::estimators::{estimate_resolved, EstimatorChoice, EstimatorKind};
use crate::rng::Seed;

/// Where a dataset comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatasetSource {
    /// One of the bundled datasets.
    Bundled(String),
    File {
        path: PathBuf,
        label_column: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Generated(TableDatasetSpec),
}

impl DatasetSource {
    pub fn name(&self) -> String {
        match self {
            DatasetSource::Bundled(n) => n.clone(),
            DatasetSource::File { path, name, .. } => name
                .clone()
                .unwrap_or_else(|| path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned())),
            DatasetSource::Generated(spec) => spec.name.clone(),
        }
    }

    pub fn load(&self) -> Result<Dataset> {
        match self {
            DatasetSource::Bundled(n) => bundled_dataset(n),
            DatasetSource::File { path, label_column, .. } => read_csv(path, &CsvOptions::new(label_column.clone())),
            DatasetSource::Generated(spec) => table_dataset(spec),
        }
    }
}

fn default_r_values() -> Vec<usize> {
    vec![1, 2, 4, 6, 8]
}
fn default_trials() -> usize {
    10
}
fn default_estimator() -> EstimatorChoice {
    EstimatorChoice::new(EstimatorKind::Auto)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ChoiceRepr {
    Name(EstimatorKind),
    Full(EstimatorChoice),
}

fn choice<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<EstimatorChoice, D::Error> {
    Ok(match ChoiceRepr::deserialize(de)? {
        ChoiceRepr::Name(k) => EstimatorChoice::new(k),
        ChoiceRepr::Full(c) => c,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardConfig {
    #[serde(default)]
    pub datasets: Vec<DatasetSource>,
    #[serde(default = "default_r_values")]
    pub r_values: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub seed: u64,
    /// A name like `"auto"` or a full estimator object.
    #[serde(default = "default_estimator", deserialize_with = "choice")]
    pub estimator: EstimatorChoice,
}

impl StandardConfig {
    pub fn new(seed: u64) -> Self {
        StandardConfig {
            datasets: Vec::new(),
            r_values: default_r_values(),
            trials: default_trials(),
            seed,
            estimator: default_estimator(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.trials == 0 || self.r_values.is_empty() {
            return Err(Error::invalid("protocol needs R values and trials >= 1"));
        }
        if let Some(&r) = self.r_values.iter().find(|&&r| r == 0 || r > n) {
            return Err(Error::invalid(format!("replication count {r} must be in 1..={n}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRow {
    pub dataset: String,
    pub r: usize,
    /// The estimator that ran; `ols` for the negative control.
    pub estimator: String,
    pub trials: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub min_error: f64,
    pub max_error: f64,
    pub failures: usize,
}

fn has_constant_column(ds: &Dataset) -> bool {
    ds.features().column_iter().any(|c| c.max() - c.min() < CONSTANT_COLUMN_TOL)
}

/// Normalize, add a bias column unless a constant column already exists,
/// and compute the ordered least-squares reference weights.
pub fn prepare_standard(ds: &Dataset) -> Result<(Dataset, WeightVector)> {
    let (norm, _) = normalize_minmax(ds)?;
    let prepared = if has_constant_column(&norm) { norm } else { norm.with_bias_column()? };
    let w = ols_fit(&prepared)?;
    Ok((prepared, w))
}

// per-trial (error, resolved estimator)
fn run_trials(
    name: &str,
    ds: &Dataset,
    cfg: &StandardConfig,
    control: bool,
) -> Result<Vec<ProtocolRow>> {
    let (prepared, w_ref) = prepare_standard(ds)?;
    cfg.validate(prepared.n())?;
    let master = Seed(cfg.seed).child(name);
    let jobs: Vec<(usize, usize)> = cfg
        .r_values
        .iter()
        .flat_map(|&r| (0..cfg.trials).map(move |t| (r, t)))
        .collect();
    let out: Vec<(f64, Option<EstimatorKind>)> = jobs
        .par_iter()
        .map(|&(r, t)| -> Result<(f64, Option<EstimatorKind>)> {
            let s = master.index(r as u64).index(t as u64);
            let split = partition_replications(&prepared, r, s.child("part"))?;
            let shuffled = shuffle_within_replications(&split, s.child("shuffle"))?;
            let fit = if control {
                ols_fit(&shuffled).map(|w| (w, EstimatorKind::Ols))
            } else {
                let mut choice = cfg.estimator.clone();
                choice.fit_config.seed = s.child("fit").0;
                estimate_resolved(&shuffled, &choice).map(|(k, f)| (f.weights, k))
            };
            match fit {
                Ok((w, k)) => Ok((relative_error(&w, &w_ref)?, Some(k))),
                Err(e) if e.is_numerical() => Ok((f64::NAN, None)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &r in &cfg.r_values {
        let cell: Vec<&(f64, Option<EstimatorKind>)> = jobs
            .iter()
            .zip(&out)
            .filter(|((jr, _), _)| *jr == r)
            .map(|(_, o)| o)
            .collect();
        let errs: Vec<f64> = cell.iter().map(|o| o.0).collect();
        let kind = cell
            .iter()
            .find_map(|o| o.1)
            .unwrap_or(if control { EstimatorKind::Ols } else { cfg.estimator.kind });
        let s = TrialStats::of(&errs);
        rows.push(ProtocolRow {
            dataset: name.to_string(),
            r,
            estimator: kind.name().to_string(),
            trials: cfg.trials,
            mean_error: s.mean,
            std_error: s.std,
            min_error: s.min,
            max_error: s.max,
            failures: s.failures,
        });
    }
    Ok(rows)
}

/// Relative error of the configured estimator against the ordered
/// least-squares weights, per `R`. `ds` is the raw dataset; preparation
/// happens here. The `datasets` field of `cfg` is not used.
pub fn standard_dataset_protocol(name: &str, ds: &Dataset, cfg: &StandardConfig) -> Result<Vec<ProtocolRow>> {
    run_trials(name, ds, cfg, false)
}

/// Least squares on the shuffled rows, scored like
/// [`standard_dataset_protocol`]. Uses the same splits and shuffles.
pub fn negative_control(name: &str, ds: &Dataset, cfg: &StandardConfig) -> Result<Vec<ProtocolRow>> {
    run_trials(name, ds, cfg, true)
}

pub(crate) fn run_on_datasets(cfg: &StandardConfig, control: bool) -> Result<Vec<ProtocolRow>> {
    if cfg.datasets.is_empty() {
        return Err(Error::invalid("no datasets given"));
    }
    let mut rows = Vec::new();
    for src in &cfg.datasets {
        let ds = src.load()?;
        rows.extend(run_trials(&src.name(), &ds, cfg, control)?);
    }
    Ok(rows)
}

/// One line per dataset with mean errors in `R` order.
pub(crate) fn wide_table(rows: &[ProtocolRow]) -> String {
    let mut rs: Vec<usize> = rows.iter().map(|r| r.r).collect();
    rs.sort_unstable();
    rs.dedup();
    let mut out = String::from("dataset");
    for r in &rs {
        out.push_str(&format!(",R={r}"));
    }
    out.push('\n');
    let mut names: Vec<&str> = Vec::new();
    for row in rows {
        if !names.contains(&row.dataset.as_str()) {
            names.push(&row.dataset);
        }
    }
    for name in names {
        out.push_str(name);
        for r in &rs {
            let v = rows
                .iter()
                .find(|x| x.dataset == name && x.r == *r)
                .map_or(String::new(), |x| format!("{:.4}", x.mean_error));
            out.push(',');
            out.push_str(&v);
        }
        out.push('\n');
    }
    out
}
