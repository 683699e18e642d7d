//! Projection hybrids: search a low-dimensional projection `p` of the
//! features, solve the self-moment equations in the projected space in
//! closed form, and score the embedded weights `p · w̃` by the sorted
//! squared loss.

use nalgebra::DMatrix;

use super::closed_form::{d2_roots, degenerate, Moments2};
use crate::data::{predict, Dataset, WeightVector};
use crate::error::{Error, Result};
use crate::losses::{Loss, LossSpec};
use crate::optim::{multistart_descent, FitConfig, FitResult, Objective};

/// Objective over the entries of a `d × d_p` projection matrix stored
/// column by column.
pub struct ProjectionObjective<'a> {
    x: &'a DMatrix<f64>,
    labels: &'a [f64],
    d: usize,
    dp: usize,
    ls: Loss<'a>,
}

impl<'a> ProjectionObjective<'a> {
    pub fn new(ds: &'a Dataset, dp: usize) -> Result<Self> {
        if dp == 0 || dp > 2 || dp > ds.d() {
            return Err(Error::invalid(format!(
                "projection dimension must be in 1..={}, got {dp}",
                ds.d().min(2)
            )));
        }
        Ok(ProjectionObjective {
            x: ds.features(),
            labels: ds.labels(),
            d: ds.d(),
            dp,
            ls: Loss::new(ds, &LossSpec::ls())?,
        })
    }

    /// Embedded weights `p · w̃` and their sorted squared loss, or `None`
    /// when the projected moment equations have no usable solution.
    pub fn solve(&self, p: &[f64]) -> Option<(Vec<f64>, f64)> {
        let d = self.d;
        let cols: Vec<Vec<f64>> = (0..self.dp)
            .map(|j| predict(self.x, &p[j * d..(j + 1) * d]))
            .collect();
        let n = self.labels.len();
        let embed = |wt: &[f64]| -> Vec<f64> {
            (0..d)
                .map(|i| (0..self.dp).map(|j| p[j * d + i] * wt[j]).sum())
                .collect()
        };
        if self.dp == 1 {
            let s: f64 = cols[0].iter().sum();
            if degenerate(s, n) {
                return None;
            }
            let wt = self.labels.iter().sum::<f64>() / s;
            let z: Vec<f64> = cols[0].iter().map(|v| v * wt).collect();
            let loss = self.ls.data_term_from_predictions(&z);
            return Some((embed(&[wt]), loss));
        }
        let m = Moments2::from_columns(&cols[0], &cols[1], self.labels);
        let roots = d2_roots(&m, 0.0).ok()?;
        let mut best: Option<(Vec<f64>, f64)> = None;
        for wt in roots {
            let z: Vec<f64> = (0..n).map(|i| cols[0][i] * wt[0] + cols[1][i] * wt[1]).collect();
            let loss = self.ls.data_term_from_predictions(&z);
            if best.as_ref().is_none_or(|b| loss < b.1) {
                best = Some((embed(&wt), loss));
            }
        }
        best
    }
}

impl Objective for ProjectionObjective<'_> {
    fn dim(&self) -> usize {
        self.d * self.dp
    }

    fn eval(&self, p: &[f64]) -> f64 {
        self.solve(p).map_or(f64::INFINITY, |(_, loss)| loss)
    }

    fn project(&self, p: &mut [f64]) {
        for (j, col) in p.chunks_mut(self.d).enumerate() {
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 && norm.is_finite() {
                col.iter_mut().for_each(|v| *v /= norm);
            } else {
                col.iter_mut().enumerate().for_each(|(i, v)| *v = if i == j { 1.0 } else { 0.0 });
            }
        }
    }
}

/// Fit the `d_p`-dimensional projection hybrid. Restarts come from
/// `cfg.starts`; the returned weights are the embedded `p · w̃` and the
/// loss is the sorted squared loss at those weights.
pub fn projection_estimate(ds: &Dataset, dp: usize, cfg: &FitConfig) -> Result<FitResult> {
    let obj = ProjectionObjective::new(ds, dp)?;
    let mut fit = multistart_descent(&obj, cfg)?;
    let (w, _) = obj.solve(&fit.weights).ok_or_else(|| Error::NonFinite {
        value: fit.loss,
        context: "best projection".into(),
    })?;
    fit.loss = obj.ls.eval(&w);
    fit.weights = WeightVector(w);
    Ok(fit)
}
