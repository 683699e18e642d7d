//! Order-invariant loss functions `L(x, y, w)`.
//!
//! Every loss compares the predictions `x · w` with the labels only through
//! quantities that do not depend on row order inside a replication, and sums
//! the per-replication terms with equal weight. An optional L2 penalty
//! `λ₂ |w|₂²` is added to any kind.

mod moments;
mod sorted;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

pub use moments::{moment_weight, moments_up_to, sample_moment, MomentSummary, MomentWeights};
pub use sorted::{emd_sorted, ks_sorted, small_d_sorted, sort_ascending, sorted_sq_distance};

/// Default number of smallest entries compared by the small-D loss.
pub const DEFAULT_SMALL_D: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Squared distance between sorted predictions and sorted labels.
    Ls,
    /// Weighted squared mismatch of self-moments.
    Sm,
    /// Earth mover's distance between the empirical distributions.
    Emd,
    /// Kolmogorov–Smirnov distance between the empirical distributions.
    Ks,
    /// Squared distance between the D smallest predictions and labels.
    #[serde(rename = "smalld", alias = "small_d")]
    SmallD,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Ls => "ls",
            LossKind::Sm => "sm",
            LossKind::Emd => "emd",
            LossKind::Ks => "ks",
            LossKind::SmallD => "smalld",
        }
    }
}

/// Which loss to evaluate and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    /// Highest moment order for `Sm`; defaults to the feature count.
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default)]
    pub weights: MomentWeights,
    /// `[E[E⁰], E[E¹], ..., E[E^K]]` of the additive noise, for `Sm` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_moments: Option<Vec<f64>>,
    #[serde(default)]
    pub lambda2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub small_d: Option<usize>,
}

impl LossSpec {
    pub fn new(kind: LossKind) -> Self {
        LossSpec {
            kind,
            k: None,
            weights: MomentWeights::InverseFactorial,
            noise_moments: None,
            lambda2: 0.0,
            small_d: None,
        }
    }

    pub fn ls() -> Self {
        Self::new(LossKind::Ls)
    }

    pub fn sm() -> Self {
        Self::new(LossKind::Sm)
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_lambda2(mut self, lambda2: f64) -> Self {
        self.lambda2 = lambda2;
        self
    }

    pub fn with_weights(mut self, weights: MomentWeights) -> Self {
        self.weights = weights;
        self
    }

    pub fn with_noise_moments(mut self, moments: Vec<f64>) -> Self {
        self.noise_moments = Some(moments);
        self
    }

    pub fn with_small_d(mut self, d: usize) -> Self {
        self.small_d = Some(d);
        self
    }

    /// Moment order used on a dataset with `d` features.
    pub fn order(&self, d: usize) -> usize {
        self.k.unwrap_or(d)
    }
}

/// Moments `E[E^j]`, `j = 0..=k`, of zero-mean Gaussian noise with std `sigma`.
pub fn gaussian_noise_moments(sigma: f64, k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k + 1];
    out[0] = 1.0;
    let mut j = 2;
    while j <= k {
        // (j-1)!! σ^j
        out[j] = out[j - 2] * (j - 1) as f64 * sigma * sigma;
        j += 2;
    }
    out
}

struct MomentParts {
    weights: Vec<f64>,
    label_moments: Vec<Vec<f64>>,
    noise: Option<(Vec<f64>, Vec<Vec<f64>>)>,
}

/// A loss bound to a dataset, with label-side quantities precomputed.
///
/// `eval` takes `&self` and may be called concurrently.
pub struct Loss<'a> {
    ds: &'a Dataset,
    kind: LossKind,
    lambda2: f64,
    sorted_labels: Vec<Vec<f64>>,
    moments: Option<MomentParts>,
    small_d: usize,
}

impl<'a> Loss<'a> {
    pub fn new(ds: &'a Dataset, spec: &LossSpec) -> Result<Self> {
        if !(spec.lambda2 >= 0.0) || !spec.lambda2.is_finite() {
            return Err(Error::invalid("lambda2 must be finite and >= 0"));
        }
        let y = ds.labels();
        let min_group = ds.groups().iter().map(Vec::len).min().unwrap_or(0);
        let mut small_d = 0;
        let mut sorted_labels = Vec::new();
        let mut moments = None;
        match spec.kind {
            LossKind::Sm => {
                let k = spec.order(ds.d());
                if k == 0 {
                    return Err(Error::invalid("moment order K must be >= 1"));
                }
                if ds.r() == 1 && k < ds.d() {
                    log::warn!(
                        "moment order K={k} is below d={} with a single replication; \
                         the weights are not identifiable",
                        ds.d()
                    );
                }
                let mut weights = vec![0.0];
                for i in 1..=k {
                    weights.push(moment_weight(i, &spec.weights)?);
                }
                let noise = match &spec.noise_moments {
                    None => None,
                    Some(nm) => {
                        if nm.len() != k + 1 {
                            return Err(Error::invalid(format!(
                                "noise_moments needs K+1 = {} entries, got {}",
                                k + 1,
                                nm.len()
                            )));
                        }
                        if nm[0] != 1.0 || (k >= 1 && nm[1] != 0.0) {
                            return Err(Error::invalid(
                                "noise_moments must start with E[E^0] = 1 and E[E^1] = 0",
                            ));
                        }
                        Some((nm.clone(), moments::binomial_table(k)))
                    }
                };
                moments = Some(MomentParts {
                    weights,
                    label_moments: MomentSummary::of_labels(ds, k).moments,
                    noise,
                });
            }
            kind => {
                if kind == LossKind::SmallD {
                    small_d = spec.small_d.unwrap_or(DEFAULT_SMALL_D.min(min_group));
                    if small_d == 0 || small_d > min_group {
                        return Err(Error::invalid(format!(
                            "small-D count {small_d} must be in 1..={min_group}"
                        )));
                    }
                }
                sorted_labels = ds
                    .groups()
                    .iter()
                    .map(|g| {
                        let mut v: Vec<f64> = g.iter().map(|&i| y[i]).collect();
                        sort_ascending(&mut v);
                        v
                    })
                    .collect();
            }
        }
        Ok(Loss {
            ds,
            kind: spec.kind,
            lambda2: spec.lambda2,
            sorted_labels,
            moments,
            small_d,
        })
    }

    pub fn dataset(&self) -> &Dataset {
        self.ds
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    /// Full loss including the L2 penalty.
    pub fn eval(&self, w: &[f64]) -> f64 {
        let penalty = if self.lambda2 > 0.0 {
            self.lambda2 * w.iter().map(|v| v * v).sum::<f64>()
        } else {
            0.0
        };
        self.data_term(w) + penalty
    }

    /// Loss without the L2 penalty.
    pub fn data_term(&self, w: &[f64]) -> f64 {
        let z = self.ds.predict(w);
        self.data_term_from_predictions(&z)
    }

    /// Loss of given predictions `z = x · w` (no penalty).
    pub fn data_term_from_predictions(&self, z: &[f64]) -> f64 {
        let groups = self.ds.groups();
        if let Some(mp) = &self.moments {
            let k = mp.weights.len() - 1;
            let mut total = 0.0;
            for (r, g) in groups.iter().enumerate() {
                let mut m = moments_up_to(g.iter().map(|&i| &z[i]), k);
                if let Some((noise, binom)) = &mp.noise {
                    m = moments::noise_adjusted(&m, noise, binom);
                }
                let n = &mp.label_moments[r];
                for i in 1..=k {
                    let diff = m[i] - n[i];
                    total += mp.weights[i] * diff * diff;
                }
            }
            return total;
        }
        let mut total = 0.0;
        let mut buf = Vec::new();
        for (r, g) in groups.iter().enumerate() {
            buf.clear();
            buf.extend(g.iter().map(|&i| z[i]));
            sort_ascending(&mut buf);
            let ys = &self.sorted_labels[r];
            total += match self.kind {
                LossKind::Ls => sorted_sq_distance(&buf, ys),
                LossKind::Emd => emd_sorted(&buf, ys),
                LossKind::Ks => ks_sorted(&buf, ys),
                LossKind::SmallD => small_d_sorted(&buf, ys, self.small_d),
                LossKind::Sm => unreachable!(),
            };
        }
        total
    }
}

/// Evaluate `spec` on a dataset at `w`.
pub fn evaluate(ds: &Dataset, w: &[f64], spec: &LossSpec) -> Result<f64> {
    check_len(ds, w)?;
    Ok(Loss::new(ds, spec)?.eval(w))
}

fn check_len(ds: &Dataset, w: &[f64]) -> Result<()> {
    if w.len() != ds.d() {
        return Err(Error::invalid(format!(
            "weights have length {}, dataset has {} features",
            w.len(),
            ds.d()
        )));
    }
    Ok(())
}

/// `Σ_r |sort(x_r · w) - sort(y_r)|²`.
pub fn ls_loss(ds: &Dataset, w: &[f64]) -> f64 {
    evaluate(ds, w, &LossSpec::ls()).expect("valid least-squares loss")
}

/// Self-moment loss `λ₂|w|² + Σ_r Σ_k f(k)(M_{r,k} - N_{r,k})²`.
pub fn sm_loss(ds: &Dataset, w: &[f64], spec: &LossSpec) -> Result<f64> {
    let spec = LossSpec {
        kind: LossKind::Sm,
        ..spec.clone()
    };
    evaluate(ds, w, &spec)
}

pub fn emd_loss(ds: &Dataset, w: &[f64]) -> f64 {
    evaluate(ds, w, &LossSpec::new(LossKind::Emd)).expect("valid EMD loss")
}

pub fn ks_loss(ds: &Dataset, w: &[f64]) -> f64 {
    evaluate(ds, w, &LossSpec::new(LossKind::Ks)).expect("valid KS loss")
}

pub fn small_d_loss(ds: &Dataset, w: &[f64], count: usize) -> Result<f64> {
    evaluate(ds, w, &LossSpec::new(LossKind::SmallD).with_small_d(count))
}
