//! Estimators for shuffled linear regression.

mod closed_form;
mod projection;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{ols_fit, Dataset};
use crate::error::{Error, Result};
use crate::losses::{Loss, LossKind, LossSpec};
use crate::optim::{multistart_descent, FitConfig, FitResult};

pub use closed_form::{sm_d1, sm_d2_analytic, Candidate, CandidateSet, DEGENERATE_EPS};
pub use projection::{projection_estimate, ProjectionObjective};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    /// Ordinary least squares on the rows as given (ignores shuffling).
    Ols,
    Sm,
    Ls,
    /// Projection hybrid with one direction.
    P1,
    /// Projection hybrid with two directions.
    P2,
    Emd,
    Ks,
    #[serde(alias = "small_d")]
    SmallD,
    Auto,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 9] = [
        EstimatorKind::Ols,
        EstimatorKind::Sm,
        EstimatorKind::Ls,
        EstimatorKind::P1,
        EstimatorKind::P2,
        EstimatorKind::Emd,
        EstimatorKind::Ks,
        EstimatorKind::SmallD,
        EstimatorKind::Auto,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Ols => "ols",
            EstimatorKind::Sm => "sm",
            EstimatorKind::Ls => "ls",
            EstimatorKind::P1 => "p1",
            EstimatorKind::P2 => "p2",
            EstimatorKind::Emd => "emd",
            EstimatorKind::Ks => "ks",
            EstimatorKind::SmallD => "smalld",
            EstimatorKind::Auto => "auto",
        }
    }

    /// Loss minimized by the numerical path, if the estimator has one.
    pub fn loss_kind(self) -> Option<LossKind> {
        match self {
            EstimatorKind::Sm => Some(LossKind::Sm),
            EstimatorKind::Ls => Some(LossKind::Ls),
            EstimatorKind::Emd => Some(LossKind::Emd),
            EstimatorKind::Ks => Some(LossKind::Ks),
            EstimatorKind::SmallD => Some(LossKind::SmallD),
            _ => None,
        }
    }

    pub fn projection_dim(self) -> Option<usize> {
        match self {
            EstimatorKind::P1 => Some(1),
            EstimatorKind::P2 => Some(2),
            _ => None,
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let key = if lower == "small_d" { "smalld" } else { lower.as_str() };
        Self::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
                Error::invalid(format!("unknown estimator `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

/// SM when `d ≤ 2` or `r ≥ 3d`, P1 otherwise. `d` counts every feature
/// column, including a bias column.
pub fn resolve_auto(d: usize, r: usize) -> EstimatorKind {
    if d <= 2 || r >= 3 * d {
        EstimatorKind::Sm
    } else {
        EstimatorKind::P1
    }
}

/// An estimator together with its loss and optimizer settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorChoice {
    pub kind: EstimatorKind,
    /// Settings for the loss; its `kind` must agree with the estimator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_spec: Option<LossSpec>,
    #[serde(default)]
    pub fit_config: FitConfig,
    /// Must match the estimator (1 for P1, 2 for P2) when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection_dim: Option<usize>,
}

impl EstimatorChoice {
    pub fn new(kind: EstimatorKind) -> Self {
        EstimatorChoice {
            kind,
            loss_spec: None,
            fit_config: FitConfig::default(),
            projection_dim: None,
        }
    }

    pub fn with_loss_spec(mut self, spec: LossSpec) -> Self {
        self.loss_spec = Some(spec);
        self
    }

    pub fn with_fit_config(mut self, cfg: FitConfig) -> Self {
        self.fit_config = cfg;
        self
    }

    /// The concrete estimator this choice runs on `ds`.
    pub fn resolved(&self, ds: &Dataset) -> EstimatorKind {
        match self.kind {
            EstimatorKind::Auto => resolve_auto(ds.d(), ds.r()),
            k => k,
        }
    }

    fn validate(&self, kind: EstimatorKind) -> Result<()> {
        if let Some(dp) = self.projection_dim {
            if kind.projection_dim() != Some(dp) {
                return Err(Error::invalid(format!(
                    "projection_dim {dp} does not match estimator {kind}"
                )));
            }
        }
        if let (Some(spec), Some(lk)) = (&self.loss_spec, kind.loss_kind()) {
            if spec.kind != lk {
                return Err(Error::invalid(format!(
                    "loss spec kind `{}` does not match estimator {kind}",
                    spec.kind.name()
                )));
            }
        }
        Ok(())
    }

    fn loss_spec_for(&self, kind: LossKind) -> LossSpec {
        match &self.loss_spec {
            Some(s) if s.kind == kind => s.clone(),
            _ => LossSpec::new(kind),
        }
    }
}

/// Fit `choice` on `ds`.
pub fn estimate(ds: &Dataset, choice: &EstimatorChoice) -> Result<FitResult> {
    estimate_resolved(ds, choice).map(|(_, fit)| fit)
}

/// Fit `choice` on `ds`, also reporting the estimator that actually ran.
pub fn estimate_resolved(ds: &Dataset, choice: &EstimatorChoice) -> Result<(EstimatorKind, FitResult)> {
    let kind = choice.resolved(ds);
    choice.validate(kind)?;
    let cfg = &choice.fit_config;
    let fit = match kind {
        EstimatorKind::Ols => {
            let w = ols_fit(ds)?;
            let z = ds.predict(&w);
            let rss = z.iter().zip(ds.labels()).map(|(a, b)| (a - b) * (a - b)).sum();
            FitResult::closed_form(w, rss, 1)
        }
        EstimatorKind::P1 | EstimatorKind::P2 => {
            projection_estimate(ds, kind.projection_dim().unwrap(), cfg)?
        }
        EstimatorKind::Sm => {
            let spec = choice.loss_spec_for(LossKind::Sm);
            match sm_closed_form(ds, &spec)? {
                Some(fit) => fit,
                None => numerical(ds, &spec, cfg)?,
            }
        }
        EstimatorKind::Auto => unreachable!("auto resolves before fitting"),
        other => {
            let spec = choice.loss_spec_for(other.loss_kind().unwrap());
            numerical(ds, &spec, cfg)?
        }
    };
    Ok((kind, fit))
}

fn numerical(ds: &Dataset, spec: &LossSpec, cfg: &FitConfig) -> Result<FitResult> {
    let loss = Loss::new(ds, spec)?;
    multistart_descent(&loss, cfg)
}

/// The closed form applies to a single replication with `K = d`, no
/// penalty, and noise moments only where the closed form can absorb them.
/// Returns `None` when the numerical path must be taken instead.
fn sm_closed_form(ds: &Dataset, spec: &LossSpec) -> Result<Option<FitResult>> {
    let d = ds.d();
    if ds.r() != 1 || spec.lambda2 != 0.0 || spec.order(d) != d || d > 2 {
        return Ok(None);
    }
    let loss = Loss::new(ds, spec)?;
    let w = if d == 1 {
        sm_d1(ds)?
    } else {
        let noise_var = spec.noise_moments.as_ref().map(|m| m[2]);
        match sm_d2_analytic(ds, noise_var) {
            Ok(set) => set.best().weights.clone(),
            Err(Error::NoRealSolution { discriminant }) => {
                log::info!("no real moment solution (discriminant {discriminant:e}); using descent");
                return Ok(None);
            }
            Err(e) => return Err(e),
        }
    };
    let value = loss.eval(&w);
    Ok(Some(FitResult::closed_form(w, value, 1 + 2 * (d as u64 - 1))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::ls_loss;
    use crate::rng::Seed;
    use crate::synth::{shuffled_instance, GaussianDesignSpec, NoiseSpec};

    #[test]
    fn auto_rule() {
        assert_eq!(resolve_auto(2, 1), EstimatorKind::Sm);
        assert_eq!(resolve_auto(1, 1), EstimatorKind::Sm);
        assert_eq!(resolve_auto(5, 15), EstimatorKind::Sm);
        assert_eq!(resolve_auto(5, 14), EstimatorKind::P1);
        assert_eq!(resolve_auto(5, 4), EstimatorKind::P1);
    }

    #[test]
    fn names_round_trip() {
        for k in EstimatorKind::ALL {
            assert_eq!(k.name().parse::<EstimatorKind>().unwrap(), k);
            let js = serde_json::to_string(&k).unwrap();
            assert_eq!(js, format!("\"{}\"", k.name()));
        }
        assert!("nope".parse::<EstimatorKind>().is_err());
    }

    fn instance(d: usize, sigma: f64, seed: u64) -> (Dataset, Vec<f64>) {
        let w0: Vec<f64> = (0..d).map(|i| 1.0 - 0.3 * i as f64).collect();
        let spec = GaussianDesignSpec::isotropic(200, d, 1.0, 1.0);
        let (ds, _) = shuffled_instance(&spec, &w0, NoiseSpec::Sigma(sigma), Seed(seed)).unwrap();
        (ds, w0)
    }

    #[test]
    fn ls_not_worse_than_truth() {
        let (ds, w0) = instance(2, 0.3, 4);
        let fit = estimate(&ds, &EstimatorChoice::new(EstimatorKind::Ls)).unwrap();
        assert!(fit.loss <= ls_loss(&ds, &w0) + 1e-9);
        assert!((fit.loss - ls_loss(&ds, &fit.weights)).abs() <= 1e-12);
    }

    #[test]
    fn sm_d1_dispatch_is_closed_form() {
        let (ds, _) = instance(1, 0.1, 3);
        let fit = estimate(&ds, &EstimatorChoice::new(EstimatorKind::Sm)).unwrap();
        assert_eq!(fit.weights, sm_d1(&ds).unwrap());
        assert_eq!(fit.iterations_per_start, vec![0]);
    }

    #[test]
    fn auto_reports_resolution() {
        let (ds, _) = instance(3, 0.0, 8);
        let (k, fit) = estimate_resolved(&ds, &EstimatorChoice::new(EstimatorKind::Auto)).unwrap();
        assert_eq!(k, EstimatorKind::P1);
        assert!(fit.loss.is_finite());
    }

    #[test]
    fn mismatched_loss_spec_rejected() {
        let (ds, _) = instance(1, 0.0, 1);
        let c = EstimatorChoice::new(EstimatorKind::Ls).with_loss_spec(LossSpec::sm());
        assert!(matches!(estimate(&ds, &c), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn ols_on_unshuffled_noiseless_data() {
        let x = vec![vec![1.0, 2.0], vec![2.0, 0.5], vec![3.0, 1.0], vec![0.5, 4.0]];
        let y = x.iter().map(|r| 2.0 * r[0] - r[1]).collect();
        let ds = Dataset::from_rows(&x, y).unwrap();
        let fit = estimate(&ds, &EstimatorChoice::new(EstimatorKind::Ols)).unwrap();
        assert!((fit.weights[0] - 2.0).abs() < 1e-10 && (fit.weights[1] + 1.0).abs() < 1e-10);
    }
}
