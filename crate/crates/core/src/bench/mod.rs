//! Experiment harness: simulation studies, estimator sweeps, and the
//! standard-dataset protocol with its negative control.
//!
//! Every study is a pure function of its configuration, including the
//! master seed. Per-cell and per-trial seeds are derived from the master
//! seed and the cell coordinates, so running cells in parallel never
//! changes a result. Running time is measured by loss evaluations, not
//! wall-clock, which keeps every output file reproducible byte for byte.

mod datasets;
mod standard;
mod studies;
mod sweep;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use datasets::{bundled_dataset, bundled_specs, table_dataset, TableDatasetSpec, BUNDLED_DATASETS};
pub use standard::{
    negative_control, prepare_standard, standard_dataset_protocol, DatasetSource, ProtocolRow,
    StandardConfig,
};
pub use studies::{
    consistency_curve, noise_adjustment_study, regularization_study, replication_curve,
    ConsistencyConfig, ConsistencyRow, NoiseAdjustmentConfig, NoiseAdjustmentRow,
    sparse_weights, RegularizationConfig, RegularizationRow, ReplicationConfig, ReplicationRow,
};
pub use sweep::{
    run_sweep, select_winner, winner_map, CellResult, EstimatorStats, SweepGrid, SweepRow, WinnerRow,
};

/// Mean-error bands used to summarize a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorBucket {
    /// Below 5%.
    Small,
    /// 5% to 30%.
    Medium,
    /// Above 30%, or not finite.
    Large,
}

impl ErrorBucket {
    pub fn of(error: f64) -> Self {
        if error < 0.05 {
            ErrorBucket::Small
        } else if error <= 0.30 {
            ErrorBucket::Medium
        } else {
            ErrorBucket::Large
        }
    }
}

/// Summary of a list of trial errors. Non-finite entries count as failures
/// and are left out of the statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub failures: usize,
}

impl TrialStats {
    pub fn of(values: &[f64]) -> Self {
        let ok: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        let failures = values.len() - ok.len();
        if ok.is_empty() {
            return TrialStats {
                mean: f64::NAN,
                std: f64::NAN,
                min: f64::NAN,
                max: f64::NAN,
                failures,
            };
        }
        TrialStats {
            mean: crate::data::mean(&ok),
            std: crate::data::std_dev(&ok),
            min: ok.iter().copied().fold(f64::INFINITY, f64::min),
            max: ok.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            failures,
        }
    }
}

/// A study as read from JSON, tagged by `"study"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "study", rename_all = "snake_case")]
pub enum Study {
    Sweep(SweepGrid),
    Consistency(ConsistencyConfig),
    Replications(ReplicationConfig),
    NoiseAdjustment(NoiseAdjustmentConfig),
    Regularization(RegularizationConfig),
    Standard(StandardConfig),
    Control(StandardConfig),
}

impl Study {
    pub fn name(&self) -> &'static str {
        match self {
            Study::Sweep(_) => "sweep",
            Study::Consistency(_) => "consistency",
            Study::Replications(_) => "replications",
            Study::NoiseAdjustment(_) => "noise_adjustment",
            Study::Regularization(_) => "regularization",
            Study::Standard(_) => "standard",
            Study::Control(_) => "control",
        }
    }

    /// Replace the master seed.
    pub fn set_seed(&mut self, seed: u64) {
        match self {
            Study::Sweep(c) => c.seed = seed,
            Study::Consistency(c) => c.seed = seed,
            Study::Replications(c) => c.seed = seed,
            Study::NoiseAdjustment(c) => c.seed = seed,
            Study::Regularization(c) => c.seed = seed,
            Study::Standard(c) | Study::Control(c) => c.seed = seed,
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, Serialize)]
struct Manifest<'a> {
    crate_name: &'static str,
    crate_version: &'static str,
    study: &'a Study,
    files: Vec<String>,
    rows: usize,
}

/// Serialize rows as CSV with a header line.
pub fn write_rows<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Render rows as CSV text.
pub fn rows_to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::error::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Run a study and write `results.csv`, `manifest.json`, and a figure or
/// table file into `out_dir`. Returns the paths written.
pub fn run_study(study: &Study, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir)?;
    let results = dir.join("results.csv");
    let mut files = vec![results.clone()];
    let rows = match study {
        Study::Sweep(grid) => {
            let cells = run_sweep(grid)?;
            let flat = sweep::flatten(&cells);
            write_rows(&results, &flat)?;
            let fig = dir.join(if grid.r.iter().any(|&r| r > 1) { "fig6.csv" } else { "fig4.csv" });
            write_rows(&fig, &winner_map(&cells))?;
            files.push(fig);
            flat.len()
        }
        Study::Consistency(cfg) => {
            let rows = consistency_curve(cfg)?;
            write_rows(&results, &rows)?;
            let fig = dir.join(if cfg.d == 1 { "fig2.csv" } else { "fig3.csv" });
            write_rows(&fig, &rows)?;
            files.push(fig);
            rows.len()
        }
        Study::Replications(cfg) => {
            let rows = replication_curve(cfg)?;
            write_rows(&results, &rows)?;
            files.push(copy_as(&results, dir.join("fig5.csv"))?);
            rows.len()
        }
        Study::NoiseAdjustment(cfg) => {
            let rows = noise_adjustment_study(cfg)?;
            write_rows(&results, &rows)?;
            files.push(copy_as(&results, dir.join("fig7.csv"))?);
            rows.len()
        }
        Study::Regularization(cfg) => {
            let rows = regularization_study(cfg)?;
            write_rows(&results, &rows)?;
            files.push(copy_as(&results, dir.join("fig8.csv"))?);
            rows.len()
        }
        Study::Standard(cfg) => {
            let rows = standard::run_on_datasets(cfg, false)?;
            write_rows(&results, &rows)?;
            let table = dir.join("table2.csv");
            fs::write(&table, standard::wide_table(&rows))?;
            files.push(table);
            rows.len()
        }
        Study::Control(cfg) => {
            let rows = standard::run_on_datasets(cfg, true)?;
            write_rows(&results, &rows)?;
            let table = dir.join("table4.csv");
            fs::write(&table, standard::wide_table(&rows))?;
            files.push(table);
            rows.len()
        }
    };
    let manifest_path = dir.join("manifest.json");
    let manifest = Manifest {
        crate_name: env!("CARGO_PKG_NAME"),
        crate_version: env!("CARGO_PKG_VERSION"),
        study,
        files: files
            .iter()
            .chain(std::iter::once(&manifest_path))
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect(),
        rows,
    };
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    files.push(manifest_path);
    Ok(files)
}

fn copy_as(src: &Path, dst: PathBuf) -> Result<PathBuf> {
    fs::copy(src, &dst)?;
    Ok(dst)
}
