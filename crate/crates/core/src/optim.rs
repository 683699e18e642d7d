//! Multi-start gradient descent with finite-difference gradients.
//!
//! Each start draws its initial point from `N(0, init_scale²)` using its own
//! seed stream (redrawing while the loss there is not finite), then iterates `w ← w − α ∇C(w)`. When a step fails to lower
//! the loss the step is halved, at most [`FitConfig::max_halvings`] times,
//! and `α` is restored at the next iteration. A start stops once the loss
//! decrease drops below the threshold, when no halving yields a decrease, or
//! after `max_iters` iterations (reported as not converged). The start with
//! the lowest final loss wins; ties go to the lowest start index.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::WeightVector;
use crate::error::{Error, Result};
use crate::losses::Loss;
use crate::rng::Seed;

/// A scalar function of the weights that the optimizer can minimize.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, w: &[f64]) -> f64;

    /// Map a point back onto the feasible set; called on every initial
    /// point and after every step.
    fn project(&self, _w: &mut [f64]) {}
}

impl Objective for Loss<'_> {
    fn dim(&self) -> usize {
        self.dataset().d()
    }

    fn eval(&self, w: &[f64]) -> f64 {
        Loss::eval(self, w)
    }
}

/// Adapts a closure into an [`Objective`].
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnObjective { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, w: &[f64]) -> f64 {
        (self.f)(w)
    }
}

fn default_halvings() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub starts: usize,
    /// Initial step size `α` of every iteration.
    pub step: f64,
    /// Stop when the loss decreases by less than this in one iteration.
    pub threshold: f64,
    pub max_iters: usize,
    /// Relative finite-difference step; coordinate `i` uses `h·max(1, |w_i|)`.
    pub gradient_step: f64,
    pub init_scale: f64,
    pub seed: u64,
    #[serde(default = "default_halvings")]
    pub max_halvings: usize,
    pub record_trace: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            starts: 10,
            step: 0.1,
            threshold: 1e-6,
            max_iters: 10_000,
            gradient_step: 1e-6,
            init_scale: 1.0,
            seed: 0,
            max_halvings: default_halvings(),
            record_trace: false,
        }
    }
}

impl FitConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_starts(mut self, starts: usize) -> Self {
        self.starts = starts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if self.starts < 1 || self.max_iters < 1 {
            return Err(Error::invalid("starts and max_iters must be >= 1"));
        }
        if !positive(self.step)
            || !positive(self.threshold)
            || !positive(self.gradient_step)
            || !positive(self.init_scale)
        {
            return Err(Error::invalid(
                "step, threshold, gradient_step and init_scale must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub weights: WeightVector,
    pub loss: f64,
    pub start_index: usize,
    pub iterations_per_start: Vec<usize>,
    pub converged: Vec<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_trace: Option<Vec<Vec<f64>>>,
    /// Objective evaluations spent, a deterministic proxy for running time.
    pub evaluations: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl FitResult {
    /// Result of a closed-form estimate.
    pub fn closed_form(weights: WeightVector, loss: f64, evaluations: u64) -> Self {
        FitResult {
            weights,
            loss,
            start_index: 0,
            iterations_per_start: vec![0],
            converged: vec![true],
            loss_trace: None,
            evaluations,
            elapsed: Duration::ZERO,
        }
    }
}

/// Central-difference gradient with per-coordinate step `h·max(1, |w_i|)`.
pub fn numerical_gradient<O: Objective + ?Sized>(f: &O, w: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut probe = w.to_vec();
    let mut g = Vec::with_capacity(w.len());
    for i in 0..w.len() {
        let hi = h * w[i].abs().max(1.0);
        probe[i] = w[i] + hi;
        let up = f.eval(&probe);
        probe[i] = w[i] - hi;
        let down = f.eval(&probe);
        probe[i] = w[i];
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::NonFinite {
                value: if up.is_finite() { down } else { up },
                context: format!("gradient probe along coordinate {i}"),
            });
        }
        g.push((up - down) / (2.0 * hi));
    }
    Ok(g)
}

struct StartOutcome {
    weights: Vec<f64>,
    loss: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
    evaluations: u64,
}

/// Initial draws per start before the start is declared diverged.
pub const INIT_DRAWS: usize = 1000;

fn run_start<O: Objective + ?Sized>(f: &O, cfg: &FitConfig, index: usize) -> StartOutcome {
    use rand::Rng as _;
    let d = f.dim();
    let mut rng = Seed(cfg.seed).child("start").index(index as u64).rng();
    let mut w = vec![0.0; d];
    let mut c = f64::NAN;
    let mut evaluations = 0u64;
    // points outside the objective's domain are redrawn a bounded number of times
    for _ in 0..INIT_DRAWS {
        for v in w.iter_mut() {
            *v = cfg.init_scale * rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        f.project(&mut w);
        c = f.eval(&w);
        evaluations += 1;
        if c.is_finite() {
            break;
        }
    }
    let mut trace = vec![c];
    if !c.is_finite() {
        return StartOutcome {
            weights: w,
            loss: c,
            iterations: 0,
            converged: false,
            trace,
            evaluations,
        };
    }
    let mut converged = false;
    let mut iterations = 0;
    let mut cand = vec![0.0; d];
    while iterations < cfg.max_iters {
        let g = match numerical_gradient(f, &w, cfg.gradient_step) {
            Ok(g) => g,
            Err(_) => {
                evaluations += 2 * d as u64;
                break;
            }
        };
        evaluations += 2 * d as u64;
        iterations += 1;
        let mut step = cfg.step;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            for ((ci, wi), gi) in cand.iter_mut().zip(&w).zip(&g) {
                *ci = wi - step * gi;
            }
            f.project(&mut cand);
            let cc = f.eval(&cand);
            evaluations += 1;
            if cc.is_finite() && cc < c {
                accepted = Some(cc);
                break;
            }
            step *= 0.5;
        }
        let Some(cc) = accepted else {
            // no decrease at any step length: numerically stationary
            converged = true;
            break;
        };
        let delta = c - cc;
        std::mem::swap(&mut w, &mut cand);
        c = cc;
        trace.push(c);
        if delta < cfg.threshold {
            converged = true;
            break;
        }
    }
    StartOutcome {
        weights: w,
        loss: c,
        iterations,
        converged,
        trace,
        evaluations,
    }
}

/// Minimize `f` from `cfg.starts` random initial points.
pub fn multistart_descent<O: Objective + ?Sized>(f: &O, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    if f.dim() == 0 {
        return Err(Error::invalid("objective dimension must be >= 1"));
    }
    let t0 = Instant::now();
    let outcomes: Vec<StartOutcome> = (0..cfg.starts)
        .into_par_iter()
        .map(|i| run_start(f, cfg, i))
        .collect();

    let mut best: Option<usize> = None;
    for (i, o) in outcomes.iter().enumerate() {
        if !o.loss.is_finite() {
            continue;
        }
        if best.is_none_or(|b| o.loss < outcomes[b].loss) {
            best = Some(i);
        }
    }
    let evaluations = outcomes.iter().map(|o| o.evaluations).sum();
    let Some(b) = best else {
        return Err(Error::OptimizationFailed {
            starts: cfg.starts,
            traces: outcomes.into_iter().map(|o| o.trace).collect(),
        });
    };
    let iterations_per_start = outcomes.iter().map(|o| o.iterations).collect();
    let converged = outcomes.iter().map(|o| o.converged).collect();
    let weights = WeightVector(outcomes[b].weights.clone());
    let loss = outcomes[b].loss;
    let loss_trace = cfg
        .record_trace
        .then(|| outcomes.into_iter().map(|o| o.trace).collect());
    Ok(FitResult {
        weights,
        loss,
        start_index: b,
        iterations_per_start,
        converged,
        loss_trace,
        evaluations,
        elapsed: t0.elapsed(),
    })
}
