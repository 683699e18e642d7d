//! Simulation studies on Gaussian designs.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TrialStats;
use crate::data::{relative_error, Dataset, WeightVector};
use crate::error::{Error, Result};
use crate::estimators::{estimate, sm_d2_analytic, EstimatorChoice, EstimatorKind};
use crate::losses::{gaussian_noise_moments, Loss, LossSpec};
use crate::optim::{multistart_descent, FitConfig};
use crate::rng::Seed;
use crate::synth::{NoiseSpec, Scenario, Simulated};

fn one() -> f64 {
    1.0
}

/// Simulate one instance; the design, permutation and noise streams come
/// from `trial`, the replication split from `split`.
pub(crate) fn simulate(
    n: usize,
    w0: &[f64],
    mean: f64,
    std: f64,
    noise: NoiseSpec,
    r: usize,
    trial: Seed,
    split: Seed,
) -> Result<Simulated> {
    let d = w0.len();
    Scenario {
        n,
        d,
        means: vec![mean; d],
        stds: vec![std; d],
        w0: Some(w0.to_vec()),
        w0_seed: None,
        noise,
        design_seed: trial.child("design").0,
        perm_seed: trial.child("permutation").index(r as u64).0,
        noise_seed: trial.child("noise").0,
        replications: r,
        replication_seed: split.0,
        replication_designs: None,
    }
    .simulate()
}

/// The simulated rows re-paired with their own labels.
pub(crate) fn unshuffled(sim: &Simulated) -> Result<Dataset> {
    let ds = &sim.dataset;
    let x = ds.features();
    let mut ordered = DMatrix::zeros(ds.n(), ds.d());
    for (i, &p) in sim.permutation.iter().enumerate() {
        ordered.set_row(i, &x.row(p));
    }
    Dataset::new(ordered, ds.labels().to_vec())
}

fn db_key(db: f64) -> u64 {
    db.to_bits()
}

/// Error curves against sample size for a fixed population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyConfig {
    pub d: usize,
    pub n_values: Vec<usize>,
    pub w0: Vec<f64>,
    #[serde(default = "one")]
    pub mean: f64,
    #[serde(default = "one")]
    pub std: f64,
    pub sigma_e: f64,
    pub trials: usize,
    pub seed: u64,
    /// `ols` runs on the unshuffled pairs.
    #[serde(default = "default_consistency_estimators")]
    pub estimators: Vec<EstimatorKind>,
    #[serde(default)]
    pub fit_config: FitConfig,
}

fn default_consistency_estimators() -> Vec<EstimatorKind> {
    vec![EstimatorKind::Ls, EstimatorKind::Sm, EstimatorKind::Ols]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub n: usize,
    pub estimator: String,
    pub trials: usize,
    pub mean_error: f64,
    pub std_error: f64,
    /// Mean of `|ŵ - w0|₂²`.
    pub mean_squared_error: f64,
    /// Mean of `|ŵ|₂`.
    pub mean_norm: f64,
    /// Mean of the first weight.
    pub mean_first_weight: f64,
    pub failures: usize,
}

pub fn consistency_curve(cfg: &ConsistencyConfig) -> Result<Vec<ConsistencyRow>> {
    if cfg.w0.len() != cfg.d {
        return Err(Error::invalid("w0 length must equal d"));
    }
    if cfg.trials == 0 || cfg.n_values.is_empty() {
        return Err(Error::invalid("consistency study needs n values and trials >= 1"));
    }
    let master = Seed(cfg.seed).child("consistency");
    let jobs: Vec<(usize, usize)> = cfg
        .n_values
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();
    let fits: Vec<Vec<Option<WeightVector>>> = jobs
        .par_iter()
        .map(|&(n, t)| -> Result<Vec<Option<WeightVector>>> {
            let trial = master.index(n as u64).index(t as u64);
            let sim = simulate(n, &cfg.w0, cfg.mean, cfg.std, NoiseSpec::Sigma(cfg.sigma_e), 1, trial, trial)?;
            let ordered = unshuffled(&sim)?;
            Ok(cfg
                .estimators
                .iter()
                .map(|&k| {
                    let ds = if k == EstimatorKind::Ols { &ordered } else { &sim.dataset };
                    let choice = EstimatorChoice::new(k)
                        .with_fit_config(FitConfig { seed: trial.child("fit").0, ..cfg.fit_config.clone() });
                    estimate(ds, &choice).ok().map(|f| f.weights)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &n in &cfg.n_values {
        for (e, k) in cfg.estimators.iter().enumerate() {
            let ws: Vec<&WeightVector> = jobs
                .iter()
                .zip(&fits)
                .filter(|((jn, _), _)| *jn == n)
                .filter_map(|(_, f)| f[e].as_ref())
                .collect();
            let errors: Vec<f64> = ws.iter().map(|w| relative_error(w, &cfg.w0).unwrap()).collect();
            let sq: Vec<f64> = ws
                .iter()
                .map(|w| w.iter().zip(&cfg.w0).map(|(a, b)| (a - b) * (a - b)).sum())
                .collect();
            let norms: Vec<f64> = ws.iter().map(|w| w.norm()).collect();
            let firsts: Vec<f64> = ws.iter().map(|w| w[0]).collect();
            let stats = TrialStats::of(&errors);
            rows.push(ConsistencyRow {
                n,
                estimator: k.name().to_string(),
                trials: cfg.trials,
                mean_error: stats.mean,
                std_error: stats.std,
                mean_squared_error: crate::data::mean(&sq),
                mean_norm: crate::data::mean(&norms),
                mean_first_weight: crate::data::mean(&firsts),
                failures: cfg.trials - ws.len(),
            });
        }
    }
    Ok(rows)
}

/// Error against the number of replications at fixed `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationConfig {
    pub d: usize,
    pub n: usize,
    pub w0: Vec<f64>,
    #[serde(default = "one")]
    pub mean: f64,
    #[serde(default = "one")]
    pub std: f64,
    pub nsr_db: Vec<f64>,
    pub r_values: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Self-moment loss settings; `K` defaults to `d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_spec: Option<LossSpec>,
    #[serde(default)]
    pub fit_config: FitConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRow {
    pub nsr_db: f64,
    pub r: usize,
    pub trials: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub min_error: f64,
    pub max_error: f64,
    pub failures: usize,
}

/// Fits the self-moment estimator after splitting a fixed sample into
/// `R` independently shuffled replications. The design and noise of a
/// trial do not depend on `R`; only the split and the shuffle do.
pub fn replication_curve(cfg: &ReplicationConfig) -> Result<Vec<ReplicationRow>> {
    if cfg.w0.len() != cfg.d {
        return Err(Error::invalid("w0 length must equal d"));
    }
    if let Some(&r) = cfg.r_values.iter().find(|&&r| r == 0 || r > cfg.n) {
        return Err(Error::invalid(format!("replication count {r} must be in 1..={}", cfg.n)));
    }
    if cfg.trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let spec = cfg.loss_spec.clone().unwrap_or_else(LossSpec::sm);
    let master = Seed(cfg.seed).child("replications");
    let mut jobs = Vec::new();
    for &db in &cfg.nsr_db {
        for &r in &cfg.r_values {
            for t in 0..cfg.trials {
                jobs.push((db, r, t));
            }
        }
    }
    let errors: Vec<f64> = jobs
        .par_iter()
        .map(|&(db, r, t)| -> Result<f64> {
            let trial = master.index(db_key(db)).index(t as u64);
            let split = trial.child("split").index(r as u64);
            let sim = simulate(cfg.n, &cfg.w0, cfg.mean, cfg.std, NoiseSpec::NsrDb(db), r, trial, split)?;
            let choice = EstimatorChoice::new(EstimatorKind::Sm)
                .with_loss_spec(spec.clone())
                .with_fit_config(FitConfig { seed: trial.child("fit").0, ..cfg.fit_config.clone() });
            Ok(match estimate(&sim.dataset, &choice) {
                Ok(fit) => relative_error(&fit.weights, &cfg.w0)?,
                Err(e) if e.is_numerical() => f64::NAN,
                Err(e) => return Err(e),
            })
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &db in &cfg.nsr_db {
        for &r in &cfg.r_values {
            let errs: Vec<f64> = jobs
                .iter()
                .zip(&errors)
                .filter(|((jd, jr, _), _)| *jd == db && *jr == r)
                .map(|(_, e)| *e)
                .collect();
            let s = TrialStats::of(&errs);
            rows.push(ReplicationRow {
                nsr_db: db,
                r,
                trials: cfg.trials,
                mean_error: s.mean,
                std_error: s.std,
                min_error: s.min,
                max_error: s.max,
                failures: s.failures,
            });
        }
    }
    Ok(rows)
}

fn default_na_w0() -> Vec<f64> {
    vec![1.0, -1.0]
}

/// Two-feature closed form with and without the true noise variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseAdjustmentConfig {
    pub n: usize,
    #[serde(default = "default_na_w0")]
    pub w0: Vec<f64>,
    #[serde(default = "one")]
    pub mean: f64,
    #[serde(default = "one")]
    pub std: f64,
    pub nsr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Used only when the closed form has no real root.
    #[serde(default)]
    pub fit_config: FitConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseAdjustmentRow {
    pub nsr_db: f64,
    /// `sm` or `na_sm`.
    pub estimator: String,
    pub trials: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub min_error: f64,
    pub max_error: f64,
    /// Trials where the closed form had no real root and descent was used.
    pub fallbacks: usize,
}

fn closed_form_or_descent(
    ds: &Dataset,
    noise_var: Option<f64>,
    cfg: &FitConfig,
) -> Result<(WeightVector, bool)> {
    match sm_d2_analytic(ds, noise_var) {
        Ok(set) => Ok((set.best().weights.clone(), false)),
        Err(Error::NoRealSolution { discriminant }) => {
            log::info!("negative discriminant {discriminant:e}; falling back to descent");
            let mut spec = LossSpec::sm().with_k(2);
            if let Some(v) = noise_var {
                spec = spec.with_noise_moments(gaussian_noise_moments(v.sqrt(), 2));
            }
            let loss = Loss::new(ds, &spec)?;
            let fit = multistart_descent(&loss, cfg)?;
            Ok((fit.weights, true))
        }
        Err(e) => Err(e),
    }
}

pub fn noise_adjustment_study(cfg: &NoiseAdjustmentConfig) -> Result<Vec<NoiseAdjustmentRow>> {
    if cfg.w0.len() != 2 {
        return Err(Error::invalid("the noise-adjustment study needs two weights"));
    }
    if cfg.trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let master = Seed(cfg.seed).child("noise_adjustment");
    let jobs: Vec<(f64, usize)> = cfg
        .nsr_db
        .iter()
        .flat_map(|&db| (0..cfg.trials).map(move |t| (db, t)))
        .collect();
    let out: Vec<[(f64, bool); 2]> = jobs
        .par_iter()
        .map(|&(db, t)| -> Result<[(f64, bool); 2]> {
            let trial = master.index(db_key(db)).index(t as u64);
            let sim = simulate(cfg.n, &cfg.w0, cfg.mean, cfg.std, NoiseSpec::NsrDb(db), 1, trial, trial)?;
            let fc = FitConfig { seed: trial.child("fit").0, ..cfg.fit_config.clone() };
            let mut res = [(f64::NAN, false); 2];
            for (slot, var) in [None, Some(sim.sigma_e * sim.sigma_e)].into_iter().enumerate() {
                res[slot] = match closed_form_or_descent(&sim.dataset, var, &fc) {
                    Ok((w, fb)) => (relative_error(&w, &cfg.w0)?, fb),
                    Err(e) if e.is_numerical() => (f64::NAN, true),
                    Err(e) => return Err(e),
                };
            }
            Ok(res)
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &db in &cfg.nsr_db {
        for (slot, name) in ["sm", "na_sm"].into_iter().enumerate() {
            let cell: Vec<(f64, bool)> = jobs
                .iter()
                .zip(&out)
                .filter(|((jd, _), _)| *jd == db)
                .map(|(_, r)| r[slot])
                .collect();
            let errs: Vec<f64> = cell.iter().map(|c| c.0).collect();
            let s = TrialStats::of(&errs);
            rows.push(NoiseAdjustmentRow {
                nsr_db: db,
                estimator: name.to_string(),
                trials: cfg.trials,
                mean_error: s.mean,
                std_error: s.std,
                min_error: s.min,
                max_error: s.max,
                fallbacks: cell.iter().filter(|c| c.1).count(),
            });
        }
    }
    Ok(rows)
}

fn default_reg_noise() -> NoiseSpec {
    NoiseSpec::NsrDb(-20.0)
}

/// Self-moment fits with an L2 penalty on `w0 = [1, 1, 0, ..., 0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizationConfig {
    pub n: usize,
    /// Number of zero weights appended to `[1, 1]`.
    pub sparsity: Vec<usize>,
    pub lambda2: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_reg_noise")]
    pub noise: NoiseSpec,
    #[serde(default = "one")]
    pub mean: f64,
    #[serde(default = "one")]
    pub std: f64,
    /// Moment order; `None` uses the feature count.
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default)]
    pub fit_config: FitConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizationRow {
    pub sparsity: usize,
    pub d: usize,
    pub lambda2: f64,
    pub trials: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub min_error: f64,
    pub max_error: f64,
    pub failures: usize,
}

/// `[1, 1]` followed by `sparsity` zeros.
pub fn sparse_weights(sparsity: usize) -> Vec<f64> {
    let mut w = vec![0.0; sparsity + 2];
    w[0] = 1.0;
    w[1] = 1.0;
    w
}

/// For every sparsity level and trial the same data is fitted under each
/// penalty, so differences between penalties are paired.
pub fn regularization_study(cfg: &RegularizationConfig) -> Result<Vec<RegularizationRow>> {
    if cfg.trials == 0 || cfg.lambda2.is_empty() {
        return Err(Error::invalid("regularization study needs penalties and trials >= 1"));
    }
    let master = Seed(cfg.seed).child("regularization");
    let mut jobs = Vec::new();
    for &s in &cfg.sparsity {
        for (li, _) in cfg.lambda2.iter().enumerate() {
            for t in 0..cfg.trials {
                jobs.push((s, li, t));
            }
        }
    }
    let errors: Vec<f64> = jobs
        .par_iter()
        .map(|&(s, li, t)| -> Result<f64> {
            let w0 = sparse_weights(s);
            let trial = master.index(s as u64).index(t as u64);
            let sim = simulate(cfg.n, &w0, cfg.mean, cfg.std, cfg.noise, 1, trial, trial)?;
            let mut spec = LossSpec::sm().with_lambda2(cfg.lambda2[li]);
            if let Some(k) = cfg.k {
                spec = spec.with_k(k);
            }
            let choice = EstimatorChoice::new(EstimatorKind::Sm)
                .with_loss_spec(spec)
                .with_fit_config(FitConfig { seed: trial.child("fit").0, ..cfg.fit_config.clone() });
            Ok(match estimate(&sim.dataset, &choice) {
                Ok(fit) => relative_error(&fit.weights, &w0)?,
                Err(e) if e.is_numerical() => f64::NAN,
                Err(e) => return Err(e),
            })
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &s in &cfg.sparsity {
        for (li, &lam) in cfg.lambda2.iter().enumerate() {
            let errs: Vec<f64> = jobs
                .iter()
                .zip(&errors)
                .filter(|((js, jl, _), _)| *js == s && *jl == li)
                .map(|(_, e)| *e)
                .collect();
            let st = TrialStats::of(&errs);
            rows.push(RegularizationRow {
                sparsity: s,
                d: s + 2,
                lambda2: lam,
                trials: cfg.trials,
                mean_error: st.mean,
                std_error: st.std,
                min_error: st.min,
                max_error: st.max,
                failures: st.failures,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unshuffled_restores_pairs() {
        let sim = simulate(30, &[2.0, -1.0], 1.0, 1.0, NoiseSpec::Sigma(0.0), 1, Seed(1), Seed(1)).unwrap();
        let ordered = unshuffled(&sim).unwrap();
        let z = ordered.predict(&[2.0, -1.0]);
        for (a, b) in z.iter().zip(ordered.labels()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn replication_count_n_is_ordered_regression() {
        let cfg = ReplicationConfig {
            d: 2,
            n: 40,
            w0: vec![1.0, 1.0],
            mean: 1.0,
            std: 1.0,
            nsr_db: vec![-20.0],
            r_values: vec![40],
            trials: 2,
            seed: 4,
            loss_spec: Some(LossSpec::sm().with_k(1)),
            fit_config: FitConfig { threshold: 1e-14, step: 1.0, ..FitConfig::default() },
        };
        let rows = replication_curve(&cfg).unwrap();
        // blocks of one row: first moments per block are the ordered equations
        assert!(rows[0].mean_error < 0.05, "{rows:?}");
    }

    #[test]
    fn zero_noise_adjustment_matches_plain() {
        let cfg = NoiseAdjustmentConfig {
            n: 200,
            w0: vec![1.0, -1.0],
            mean: 1.0,
            std: 1.0,
            nsr_db: vec![-300.0],
            trials: 3,
            seed: 8,
            fit_config: FitConfig::default(),
        };
        let rows = noise_adjustment_study(&cfg).unwrap();
        assert!((rows[0].mean_error - rows[1].mean_error).abs() < 1e-9);
    }

    #[test]
    fn heavy_penalty_shrinks_to_zero() {
        let cfg = RegularizationConfig {
            n: 200,
            sparsity: vec![0],
            lambda2: vec![1e3],
            trials: 2,
            seed: 2,
            noise: NoiseSpec::NsrDb(-20.0),
            mean: 1.0,
            std: 1.0,
            k: None,
            fit_config: FitConfig::default(),
        };
        let rows = regularization_study(&cfg).unwrap();
        assert!((rows[0].mean_error - 1.0).abs() < 0.05, "{rows:?}");
    }
}
