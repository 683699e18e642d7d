//! Command-line front end. `main.rs` only parses and dispatches here.
//!
//! Exit codes: 0 on success, 1 for usage, input or IO errors, 2 when the
//! numerics fail.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bench::{run_study, DatasetSource, StandardConfig, Study, SweepGrid};
use crate::csv_io::{read_csv, write_csv, CsvOptions, DEFAULT_REPLICATION_COLUMN};
use crate::data::{normalize_minmax, Normalization};
use crate::error::{Error, Result};
use crate::estimators::{estimate_resolved, EstimatorChoice, EstimatorKind};
use crate::losses::LossSpec;
use crate::optim::FitConfig;
use crate::rng::Seed;
use crate::synth::{NoiseSpec, Scenario};

#[derive(Debug, Parser)]
#[command(name = "shufreg", version, about = "Linear regression with shuffled labels")]
pub struct Cli {
    /// Log more (-v info, -vv debug); logs go to stderr
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit an estimator to a CSV file and write the result as JSON
    Fit(FitArgs),
    /// Generate a shuffled dataset and write it as CSV
    Simulate(SimulateArgs),
    /// Run an estimator sweep described by a JSON file
    Sweep(StudyArgs),
    /// Run any study described by a JSON file
    Bench(StudyArgs),
    /// Least squares on shuffled rows, scored against ordered least squares
    Control(ControlArgs),
}

fn parse_estimator(s: &str) -> std::result::Result<EstimatorKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input CSV with a header row
    #[arg(long)]
    pub input: PathBuf,
    /// Name of the label column
    #[arg(long, default_value = "y")]
    pub label_col: String,
    /// Integer column of replication ids; a column named `replication`
    /// is used when present
    #[arg(long)]
    pub replication_col: Option<String>,
    /// ols, sm, ls, p1, p2, emd, ks, smalld or auto
    #[arg(long, default_value = "auto", value_parser = parse_estimator)]
    pub estimator: EstimatorKind,
    /// Loss settings as a JSON file or inline JSON object
    #[arg(long)]
    pub loss_spec: Option<String>,
    /// Optimizer settings as a JSON file or inline JSON object
    #[arg(long)]
    pub fit_config: Option<String>,
    /// Seed for the optimizer's starting points
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Min-max normalize features and labels before fitting
    #[arg(long)]
    pub normalize: bool,
    /// Output JSON path; stdout when omitted
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    /// Scenario JSON; inline flags are used when omitted
    #[arg(long, conflicts_with_all = ["n", "d"])]
    pub scenario: Option<PathBuf>,
    #[arg(long, required_unless_present = "scenario")]
    pub n: Option<usize>,
    #[arg(long, required_unless_present = "scenario")]
    pub d: Option<usize>,
    /// Mean of every feature
    #[arg(long, default_value_t = 1.0)]
    pub mean: f64,
    /// Standard deviation of every feature
    #[arg(long, default_value_t = 1.0)]
    pub std: f64,
    /// Comma-separated true weights; drawn from N(0, I) when omitted
    #[arg(long, value_delimiter = ',')]
    pub w0: Option<Vec<f64>>,
    #[arg(long, group = "noise_level")]
    pub snr_db: Option<f64>,
    #[arg(long, group = "noise_level")]
    pub nsr_db: Option<f64>,
    /// Noise standard deviation
    #[arg(long, group = "noise_level")]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub replications: usize,
    /// Master seed; overrides every seed of a scenario file
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path
    #[arg(long)]
    pub output: PathBuf,
    /// Also write the true weights, noise level and permutation as JSON
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    /// Study JSON file
    #[arg(long)]
    pub study: PathBuf,
    /// Output directory
    #[arg(long)]
    pub output: PathBuf,
    /// Overrides the study's master seed
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ControlArgs {
    /// Study JSON file (a control or standard study)
    #[arg(long, conflicts_with_all = ["input", "dataset"])]
    pub study: Option<PathBuf>,
    /// Dataset CSV
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = "y")]
    pub label_col: String,
    /// Name of a bundled dataset; repeatable
    #[arg(long)]
    pub dataset: Vec<String>,
    /// Comma-separated replication counts
    #[arg(long, value_delimiter = ',')]
    pub r_values: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    pub output: PathBuf,
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        2
    } else {
        1
    }
}

/// Parse, run, and report. Returns the process exit status.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn json_arg<T: serde::de::DeserializeOwned>(arg: &str) -> Result<T> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        read_text(Path::new(arg))?
    };
    Ok(serde_json::from_str(&text)?)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read `{}`: {e}", path.display())))
}

fn header(path: &Path) -> Result<Vec<String>> {
    let text = read_text(path)?;
    let first = text.lines().next().unwrap_or("");
    Ok(first.split(',').map(|h| h.trim().to_string()).collect())
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Fit(a) => fit(a, out),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => {
            let text = read_text(&a.study)?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let mut study = if value.get("study").is_some() {
                serde_json::from_value::<Study>(value)?
            } else {
                Study::Sweep(serde_json::from_value::<SweepGrid>(value)?)
            };
            if !matches!(study, Study::Sweep(_)) {
                return Err(Error::InvalidArgument(format!(
                    "`sweep` needs a sweep study, got `{}`; use `bench`",
                    study.name()
                )));
            }
            if let Some(s) = a.seed {
                study.set_seed(s);
            }
            list_files(run_study(&study, &a.output)?, out)
        }
        Command::Bench(a) => {
            let mut study: Study = serde_json::from_str(&read_text(&a.study)?)?;
            if let Some(s) = a.seed {
                study.set_seed(s);
            }
            list_files(run_study(&study, &a.output)?, out)
        }
        Command::Control(a) => control(a, out),
    }
}

fn list_files(files: Vec<PathBuf>, out: &mut dyn Write) -> Result<()> {
    for f in files {
        writeln!(out, "{}", f.display())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct FitOutput {
    weights: Vec<f64>,
    loss: f64,
    estimator_resolved: String,
    diagnostics: Diagnostics,
}

#[derive(Serialize)]
struct Diagnostics {
    resolved: String,
    n: usize,
    d: usize,
    r: usize,
    start_index: usize,
    iterations_per_start: Vec<usize>,
    converged: Vec<bool>,
    evaluations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    normalization: Option<Normalization>,
}

fn fit(a: &FitArgs, out: &mut dyn Write) -> Result<()> {
    let mut opts = CsvOptions::new(a.label_col.clone());
    match &a.replication_col {
        Some(r) => opts = opts.replication_column(r.clone()),
        None if header(&a.input)?.iter().any(|h| h == DEFAULT_REPLICATION_COLUMN) => {
            opts = opts.replication_column(DEFAULT_REPLICATION_COLUMN)
        }
        None => {}
    }
    let raw = read_csv(&a.input, &opts)?;
    let (ds, norm) = if a.normalize {
        let (d, n) = normalize_minmax(&raw)?;
        (d, Some(n))
    } else {
        (raw, None)
    };
    let mut cfg: FitConfig = match &a.fit_config {
        Some(s) => json_arg(s)?,
        None => FitConfig::default(),
    };
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.starts {
        cfg.starts = v;
    }
    if let Some(v) = a.step {
        cfg.step = v;
    }
    if let Some(v) = a.threshold {
        cfg.threshold = v;
    }
    if let Some(v) = a.max_iters {
        cfg.max_iters = v;
    }
    let mut choice = EstimatorChoice::new(a.estimator).with_fit_config(cfg);
    if let Some(s) = &a.loss_spec {
        choice = choice.with_loss_spec(json_arg::<LossSpec>(s)?);
    }
    let (kind, fit) = estimate_resolved(&ds, &choice)?;
    let result = FitOutput {
        weights: fit.weights.0.clone(),
        loss: fit.loss,
        estimator_resolved: kind.name().to_string(),
        diagnostics: Diagnostics {
            resolved: kind.name().to_string(),
            n: ds.n(),
            d: ds.d(),
            r: ds.r(),
            start_index: fit.start_index,
            iterations_per_start: fit.iterations_per_start,
            converged: fit.converged,
            evaluations: fit.evaluations,
            normalization: norm,
        },
    };
    write_json(&result, a.output.as_deref(), out)
}

#[derive(Serialize)]
struct Truth<'a> {
    w0: &'a [f64],
    sigma_e: f64,
    permutation: &'a [usize],
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let mut scenario = match &a.scenario {
        Some(p) => serde_json::from_str::<Scenario>(&read_text(p)?)?,
        None => {
            let (n, d) = (a.n.unwrap(), a.d.unwrap());
            let noise = match (a.snr_db, a.nsr_db, a.sigma) {
                (Some(v), _, _) => NoiseSpec::SnrDb(v),
                (_, Some(v), _) => NoiseSpec::NsrDb(v),
                (_, _, Some(v)) => NoiseSpec::Sigma(v),
                _ => NoiseSpec::Sigma(0.0),
            };
            let seed = a.seed.unwrap_or(0);
            Scenario {
                n,
                d,
                means: vec![a.mean; d],
                stds: vec![a.std; d],
                w0: a.w0.clone(),
                w0_seed: if a.w0.is_some() { None } else { Some(Seed(seed).child("w0").0) },
                noise,
                design_seed: 0,
                perm_seed: 0,
                noise_seed: 0,
                replications: a.replications,
                replication_seed: 0,
                replication_designs: None,
            }
        }
    };
    if let Some(s) = a.seed {
        let s = Seed(s);
        scenario.design_seed = s.child("design").0;
        scenario.perm_seed = s.child("permutation").0;
        scenario.noise_seed = s.child("noise").0;
        scenario.replication_seed = s.child("split").0;
        if scenario.w0_seed.is_some() {
            scenario.w0_seed = Some(s.child("w0").0);
        }
    }
    let sim = scenario.simulate()?;
    write_csv(&sim.dataset, &a.output)?;
    if let Some(p) = &a.truth {
        let t = Truth { w0: &sim.w0.0, sigma_e: sim.sigma_e, permutation: &sim.permutation };
        fs::write(p, serde_json::to_string_pretty(&t)? + "\n")?;
    }
    Ok(())
}

fn control(a: &ControlArgs, out: &mut dyn Write) -> Result<()> {
    let mut study = match &a.study {
        Some(p) => {
            let text = read_text(p)?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            match value.get("study").and_then(|s| s.as_str()) {
                Some("control") | Some("standard") | None => {
                    let mut v = value;
                    if let Some(o) = v.as_object_mut() {
                        o.remove("study");
                    }
                    serde_json::from_value::<StandardConfig>(v)?
                }
                Some(other) => {
                    return Err(Error::InvalidArgument(format!(
                        "`control` needs a control study, got `{other}`"
                    )))
                }
            }
        }
        None => {
            let mut cfg = StandardConfig::new(0);
            if let Some(p) = &a.input {
                cfg.datasets.push(DatasetSource::File {
                    path: p.clone(),
                    label_column: a.label_col.clone(),
                    name: None,
                });
            }
            cfg.datasets.extend(a.dataset.iter().cloned().map(DatasetSource::Bundled));
            if cfg.datasets.is_empty() {
                return Err(Error::InvalidArgument(
                    "give --study, --input or at least one --dataset".into(),
                ));
            }
            cfg
        }
    };
    if let Some(r) = &a.r_values {
        study.r_values = r.clone();
    }
    if let Some(t) = a.trials {
        study.trials = t;
    }
    if let Some(s) = a.seed {
        study.seed = s;
    }
    list_files(run_study(&Study::Control(study), &a.output)?, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run_from(std::iter::once("shufreg").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn help_exits_zero() {
        for sub in ["fit", "simulate", "sweep", "bench", "control"] {
            let (code, out, _) = run(&[sub, "--help"]);
            assert_eq!(code, 0);
            assert!(out.contains("--output"), "{sub}: {out}");
        }
    }

    #[test]
    fn unknown_estimator_is_usage_error() {
        let (code, _, err) = run(&["fit", "--input", "x.csv", "--estimator", "magic"]);
        assert_eq!(code, 1);
        assert!(err.contains("smalld"), "{err}");
    }

    #[test]
    fn missing_subcommand() {
        assert_eq!(run(&[]).0, 1);
    }

    #[test]
    fn inline_json_arg() {
        let c: FitConfig = json_arg(r#"{"starts": 3}"#).unwrap();
        assert_eq!(c.starts, 3);
        assert_eq!(c.step, 0.1);
    }
}
