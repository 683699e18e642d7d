//! Estimator comparison over a grid of problem sizes and noise levels.

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use super::studies::simulate;
use super::{ErrorBucket, TrialStats};
use crate::data::relative_error;
use crate::error::{Error, Result};
use crate::estimators::{estimate, EstimatorChoice, EstimatorKind};
use crate::rng::Seed;
use crate::synth::{gaussian_weights, NoiseSpec};

fn one_vec() -> Vec<usize> {
    vec![1]
}
fn default_noise() -> Vec<NoiseSpec> {
    vec![NoiseSpec::SnrDb(15.0)]
}
fn zero_vec() -> Vec<f64> {
    vec![0.0]
}
fn default_margin() -> f64 {
    0.02
}
fn one() -> f64 {
    1.0
}

/// An estimator given either by name or as a full choice object.
#[derive(Deserialize)]
#[serde(untagged)]
enum ChoiceRepr {
    Name(EstimatorKind),
    Full(EstimatorChoice),
}

fn choices<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Vec<EstimatorChoice>, D::Error> {
    let raw = Vec::<ChoiceRepr>::deserialize(de)?;
    Ok(raw
        .into_iter()
        .map(|c| match c {
            ChoiceRepr::Name(k) => EstimatorChoice::new(k),
            ChoiceRepr::Full(c) => c,
        })
        .collect())
}

/// Axes of the grid. Every combination of `n`, `d`, `r`, `noise` and
/// `lambda2` is one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub n: Vec<usize>,
    pub d: Vec<usize>,
    #[serde(default = "one_vec")]
    pub r: Vec<usize>,
    #[serde(default = "default_noise")]
    pub noise: Vec<NoiseSpec>,
    /// Penalty applied to loss-based estimators; ignored by the others.
    #[serde(default = "zero_vec")]
    pub lambda2: Vec<f64>,
    /// Names like `"sm"` or full estimator objects.
    #[serde(deserialize_with = "choices")]
    pub estimators: Vec<EstimatorChoice>,
    pub trials: usize,
    pub seed: u64,
    /// Estimators within this absolute mean-error margin of the best one
    /// count as tied; the cheaper one wins.
    #[serde(default = "default_margin")]
    pub tie_margin: f64,
    #[serde(default = "one")]
    pub mean: f64,
    #[serde(default = "one")]
    pub std: f64,
}

impl SweepGrid {
    pub fn new(n: Vec<usize>, d: Vec<usize>, estimators: Vec<EstimatorKind>, trials: usize, seed: u64) -> Self {
        SweepGrid {
            n,
            d,
            r: one_vec(),
            noise: default_noise(),
            lambda2: zero_vec(),
            estimators: estimators.into_iter().map(EstimatorChoice::new).collect(),
            trials,
            seed,
            tie_margin: default_margin(),
            mean: 1.0,
            std: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty()
            || self.d.is_empty()
            || self.r.is_empty()
            || self.noise.is_empty()
            || self.lambda2.is_empty()
            || self.estimators.is_empty()
        {
            return Err(Error::invalid("sweep axes must be nonempty"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        if self.d.contains(&0) || self.r.contains(&0) || self.n.contains(&0) {
            return Err(Error::invalid("n, d and r values must be >= 1"));
        }
        if !(self.tie_margin >= 0.0) {
            return Err(Error::invalid("tie_margin must be >= 0"));
        }
        Ok(())
    }

    fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &d in &self.d {
                for &r in &self.r {
                    for &noise in &self.noise {
                        for &lambda2 in &self.lambda2 {
                            out.push(Cell { n, d, r, noise, lambda2 });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    n: usize,
    d: usize,
    r: usize,
    noise: NoiseSpec,
    lambda2: f64,
}

fn noise_label(noise: NoiseSpec) -> String {
    match noise {
        NoiseSpec::Sigma(s) => format!("sigma={s}"),
        NoiseSpec::NsrDb(db) => format!("nsr_db={db}"),
        NoiseSpec::SnrDb(db) => format!("snr_db={db}"),
    }
}

fn noise_key(noise: NoiseSpec) -> Seed {
    let (tag, v) = match noise {
        NoiseSpec::Sigma(s) => ("sigma", s),
        NoiseSpec::NsrDb(db) => ("nsr_db", db),
        NoiseSpec::SnrDb(db) => ("snr_db", db),
    };
    Seed(0).child(tag).index(v.to_bits())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorStats {
    pub estimator: String,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub failures: usize,
    /// Mean loss evaluations per trial; the running-time measure.
    pub evaluations: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    pub noise: NoiseSpec,
    pub lambda2: f64,
    pub stats: Vec<EstimatorStats>,
    /// `None` when every estimator failed in every trial.
    pub winner: Option<String>,
    pub bucket: ErrorBucket,
}

/// Index of the winning estimator: lowest mean error, except that
/// estimators within `margin` of the lowest count as tied and the one with
/// fewer evaluations wins. Remaining ties go to the earlier entry.
pub fn select_winner(stats: &[EstimatorStats], margin: f64) -> Option<usize> {
    let best = stats
        .iter()
        .map(|s| s.mean)
        .filter(|m| m.is_finite())
        .fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return None;
    }
    let mut pick: Option<usize> = None;
    for (i, s) in stats.iter().enumerate() {
        if !(s.mean <= best + margin) {
            continue;
        }
        pick = match pick {
            Some(j) if stats[j].evaluations <= s.evaluations => Some(j),
            _ => Some(i),
        };
    }
    pick
}

/// Run every cell of the grid. Estimator failures are recorded as trial
/// failures and never abort the sweep.
pub fn run_sweep(grid: &SweepGrid) -> Result<Vec<CellResult>> {
    grid.validate()?;
    let master = Seed(grid.seed).child("sweep");
    let cells = grid.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..grid.trials).map(move |t| (c, t)))
        .collect();
    // per job: (error, evaluations) per estimator
    let outcomes: Vec<Vec<(f64, u64)>> = jobs
        .par_iter()
        .map(|&(c, t)| -> Result<Vec<(f64, u64)>> {
            let cell = cells[c];
            if cell.r > cell.n {
                return Ok(vec![(f64::NAN, 0); grid.estimators.len()]);
            }
            let trial = master
                .index(cell.n as u64)
                .index(cell.d as u64)
                .index(noise_key(cell.noise).0)
                .index(t as u64);
            let w0 = gaussian_weights(cell.d, trial.child("w0"));
            let split = trial.child("split").index(cell.r as u64);
            let sim = simulate(cell.n, &w0, grid.mean, grid.std, cell.noise, cell.r, trial, split)?;
            let mut out = Vec::with_capacity(grid.estimators.len());
            for choice in &grid.estimators {
                let mut choice = choice.clone();
                choice.fit_config.seed = trial.child("fit").0;
                if let Some(lk) = choice.resolved(&sim.dataset).loss_kind() {
                    let spec = match choice.loss_spec.take() {
                        Some(s) if s.kind == lk => s,
                        _ => crate::losses::LossSpec::new(lk),
                    };
                    choice.loss_spec = Some(spec.with_lambda2(cell.lambda2));
                }
                out.push(match estimate(&sim.dataset, &choice) {
                    Ok(fit) => (relative_error(&fit.weights, &w0)?, fit.evaluations),
                    Err(e) if e.is_numerical() => (f64::NAN, 0),
                    Err(e) => return Err(e),
                });
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut results = Vec::with_capacity(cells.len());
    for (c, cell) in cells.iter().enumerate() {
        let trials: Vec<&Vec<(f64, u64)>> = jobs
            .iter()
            .zip(&outcomes)
            .filter(|((jc, _), _)| *jc == c)
            .map(|(_, o)| o)
            .collect();
        let stats: Vec<EstimatorStats> = grid
            .estimators
            .iter()
            .enumerate()
            .map(|(e, choice)| {
                let errs: Vec<f64> = trials.iter().map(|o| o[e].0).collect();
                let evals = trials.iter().map(|o| o[e].1 as f64).sum::<f64>() / trials.len() as f64;
                let s = TrialStats::of(&errs);
                EstimatorStats {
                    estimator: choice.kind.name().to_string(),
                    mean: s.mean,
                    std: s.std,
                    min: s.min,
                    max: s.max,
                    failures: s.failures,
                    evaluations: evals,
                }
            })
            .collect();
        let winner = select_winner(&stats, grid.tie_margin);
        let bucket = ErrorBucket::of(winner.map_or(f64::NAN, |w| stats[w].mean));
        results.push(CellResult {
            n: cell.n,
            d: cell.d,
            r: cell.r,
            noise: cell.noise,
            lambda2: cell.lambda2,
            winner: winner.map(|w| stats[w].estimator.clone()),
            stats,
            bucket,
        });
    }
    Ok(results)
}

/// One row per cell and estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    pub noise: String,
    pub lambda2: f64,
    pub estimator: String,
    pub mean_error: f64,
    pub std_error: f64,
    pub min_error: f64,
    pub max_error: f64,
    pub failures: usize,
    pub evaluations: f64,
    pub winner: bool,
}

pub(crate) fn flatten(cells: &[CellResult]) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for c in cells {
        for s in &c.stats {
            rows.push(SweepRow {
                n: c.n,
                d: c.d,
                r: c.r,
                noise: noise_label(c.noise),
                lambda2: c.lambda2,
                estimator: s.estimator.clone(),
                mean_error: s.mean,
                std_error: s.std,
                min_error: s.min,
                max_error: s.max,
                failures: s.failures,
                evaluations: s.evaluations,
                winner: c.winner.as_deref() == Some(s.estimator.as_str()),
            });
        }
    }
    rows
}

/// The winner of each cell with its error bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinnerRow {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    pub noise: String,
    pub lambda2: f64,
    pub winner: String,
    pub mean_error: f64,
    pub bucket: ErrorBucket,
}

pub fn winner_map(cells: &[CellResult]) -> Vec<WinnerRow> {
    cells
        .iter()
        .map(|c| {
            let err = c
                .stats
                .iter()
                .find(|s| Some(&s.estimator) == c.winner.as_ref())
                .map_or(f64::NAN, |s| s.mean);
            WinnerRow {
                n: c.n,
                d: c.d,
                r: c.r,
                noise: noise_label(c.noise),
                lambda2: c.lambda2,
                winner: c.winner.clone().unwrap_or_else(|| "none".into()),
                mean_error: err,
                bucket: c.bucket,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(name: &str, mean: f64, evals: f64) -> EstimatorStats {
        EstimatorStats {
            estimator: name.into(),
            mean,
            std: 0.0,
            min: mean,
            max: mean,
            failures: 0,
            evaluations: evals,
        }
    }

    #[test]
    fn tie_rule_prefers_cheaper() {
        let s = [st("p1", 0.040, 500.0), st("sm", 0.055, 1.0)];
        assert_eq!(select_winner(&s, 0.02), Some(1));
        assert_eq!(select_winner(&s, 0.0), Some(0));
        let s = [st("p1", 0.04, 500.0), st("sm", 0.07, 1.0)];
        assert_eq!(select_winner(&s, 0.02), Some(0));
        let s = [st("a", f64::NAN, 1.0), st("b", 0.3, 9.0)];
        assert_eq!(select_winner(&s, 0.02), Some(1));
        assert_eq!(select_winner(&[st("a", f64::NAN, 1.0)], 0.02), None);
    }

    #[test]
    fn grid_json_accepts_names() {
        let g: SweepGrid = serde_json::from_str(
            r#"{"n":[64],"d":[1],"estimators":["sm",{"kind":"p1"}],"trials":1,"seed":0}"#,
        )
        .unwrap();
        assert_eq!(g.estimators[1].kind, EstimatorKind::P1);
        assert_eq!(g.noise, vec![NoiseSpec::SnrDb(15.0)]);
    }

    #[test]
    fn d1_sm_beats_p1_by_cost() {
        let g = SweepGrid::new(vec![200], vec![1], vec![EstimatorKind::Sm, EstimatorKind::P1], 2, 5);
        let cells = run_sweep(&g).unwrap();
        assert_eq!(cells[0].winner.as_deref(), Some("sm"));
        assert_eq!(winner_map(&cells).len(), 1);
        assert_eq!(flatten(&cells).len(), 2);
    }

    #[test]
    fn deterministic() {
        let g = SweepGrid::new(vec![50], vec![2], vec![EstimatorKind::Sm, EstimatorKind::Ls], 2, 9);
        assert_eq!(run_sweep(&g).unwrap(), run_sweep(&g).unwrap());
    }
}
