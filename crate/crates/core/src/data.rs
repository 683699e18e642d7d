//! Dataset model, dataset transformations and evaluation metrics.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Seed;

/// Columns whose range is below this are treated as constant by
/// [`normalize_minmax`].
pub const CONSTANT_COLUMN_TOL: f64 = 1e-12;

/// Weights of a linear model, one per feature column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(pub Vec<f64>);

impl WeightVector {
    pub fn new(values: Vec<f64>) -> Self {
        WeightVector(values)
    }

    pub fn zeros(d: usize) -> Self {
        WeightVector(vec![0.0; d])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Deref for WeightVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for WeightVector {
    fn from(v: Vec<f64>) -> Self {
        WeightVector(v)
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Features, shuffled labels and the replication each row belongs to.
///
/// Rows of one replication are aligned as a block with their labels, but the
/// order inside the block is unknown. A dataset with a single replication is
/// fully shuffled.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    labels: Vec<f64>,
    replication_ids: Vec<usize>,
    groups: Vec<Vec<usize>>,
    feature_names: Vec<String>,
    label_name: String,
}

impl Dataset {
    /// A dataset with a single replication.
    pub fn new(features: DMatrix<f64>, labels: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        Self::with_replications(features, labels, vec![0; n])
    }

    pub fn with_replications(
        features: DMatrix<f64>,
        labels: Vec<f64>,
        replication_ids: Vec<usize>,
    ) -> Result<Self> {
        let d = features.ncols();
        let names = (0..d).map(|j| format!("x{j}")).collect();
        Self::with_names(features, labels, replication_ids, names, "y".to_string())
    }

    pub fn with_names(
        features: DMatrix<f64>,
        labels: Vec<f64>,
        replication_ids: Vec<usize>,
        feature_names: Vec<String>,
        label_name: String,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::invalid("dataset must have at least one row"));
        }
        if features.nrows() != n || replication_ids.len() != n {
            return Err(Error::invalid(format!(
                "row counts disagree: features {}, labels {}, replication ids {}",
                features.nrows(),
                n,
                replication_ids.len()
            )));
        }
        if features.ncols() == 0 {
            return Err(Error::invalid("dataset must have at least one feature"));
        }
        if feature_names.len() != features.ncols() {
            return Err(Error::invalid("one name per feature column is required"));
        }
        if !features.iter().chain(labels.iter()).all(|v| v.is_finite()) {
            return Err(Error::invalid("dataset contains non-finite values"));
        }
        let groups = groups_from_ids(&replication_ids)?;
        Ok(Dataset {
            features,
            labels,
            replication_ids,
            groups,
            feature_names,
            label_name,
        })
    }

    /// Build from row-major feature rows.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("feature rows have unequal lengths"));
        }
        let x = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
        Self::new(x, labels)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    /// Number of replications.
    pub fn r(&self) -> usize {
        self.groups.len()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn replication_ids(&self) -> &[usize] {
        &self.replication_ids
    }

    /// Row indices of each replication, in replication-id order.
    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.features.row(i).iter().copied().collect()
    }

    /// Predictions `x · w`.
    pub fn predict(&self, w: &[f64]) -> Vec<f64> {
        predict(&self.features, w)
    }

    pub fn with_labels(&self, labels: Vec<f64>) -> Result<Self> {
        Self::with_names(
            self.features.clone(),
            labels,
            self.replication_ids.clone(),
            self.feature_names.clone(),
            self.label_name.clone(),
        )
    }

    pub fn with_replication_ids(&self, ids: Vec<usize>) -> Result<Self> {
        Self::with_names(
            self.features.clone(),
            self.labels.clone(),
            ids,
            self.feature_names.clone(),
            self.label_name.clone(),
        )
    }

    /// Append a constant column of ones.
    pub fn with_bias_column(&self) -> Result<Self> {
        let (n, d) = self.features.shape();
        let x = self.features.clone().insert_column(d, 1.0);
        debug_assert_eq!(x.nrows(), n);
        let mut names = self.feature_names.clone();
        names.push("bias".to_string());
        Self::with_names(
            x,
            self.labels.clone(),
            self.replication_ids.clone(),
            names,
            self.label_name.clone(),
        )
    }
}

/// `x · w` accumulated column by column.
pub fn predict(x: &DMatrix<f64>, w: &[f64]) -> Vec<f64> {
    assert_eq!(x.ncols(), w.len(), "weight length must equal feature count");
    let mut z = vec![0.0; x.nrows()];
    for (j, &wj) in w.iter().enumerate() {
        if wj == 0.0 {
            continue;
        }
        for (zi, &xij) in z.iter_mut().zip(x.column(j).iter()) {
            *zi += xij * wj;
        }
    }
    z
}

fn groups_from_ids(ids: &[usize]) -> Result<Vec<Vec<usize>>> {
    let r = ids.iter().copied().max().map_or(0, |m| m + 1);
    let mut groups = vec![Vec::new(); r];
    for (i, &id) in ids.iter().enumerate() {
        groups[id].push(i);
    }
    if let Some(empty) = groups.iter().position(Vec::is_empty) {
        return Err(Error::invalid(format!(
            "replication id {empty} has no rows; ids must cover 0..{r}"
        )));
    }
    Ok(groups)
}

/// Affine map applied by [`normalize_minmax`]: `normalized = (raw - offset) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub feature_offsets: Vec<f64>,
    pub feature_scales: Vec<f64>,
    pub label_offset: f64,
    pub label_scale: f64,
}

impl Normalization {
    /// Map a raw label back from normalized units.
    pub fn denormalize_label(&self, v: f64) -> f64 {
        v * self.label_scale + self.label_offset
    }
}

fn minmax(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

fn affine_for(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo < CONSTANT_COLUMN_TOL {
        (0.0, 1.0)
    } else {
        (lo, hi - lo)
    }
}

/// Map each non-constant feature column and the labels onto `[0, 1]`.
///
/// Constant columns (such as a bias column of ones) pass through unchanged.
pub fn normalize_minmax(ds: &Dataset) -> Result<(Dataset, Normalization)> {
    if ds.n() < 2 {
        return Err(Error::invalid("normalization needs at least two rows"));
    }
    let mut x = ds.features.clone();
    let mut offsets = Vec::with_capacity(ds.d());
    let mut scales = Vec::with_capacity(ds.d());
    for j in 0..ds.d() {
        let (lo, hi) = minmax(x.column(j).iter().copied());
        let (off, scale) = affine_for(lo, hi);
        if off != 0.0 || scale != 1.0 {
            for v in x.column_mut(j).iter_mut() {
                *v = ((*v - off) / scale).clamp(0.0, 1.0);
            }
        }
        offsets.push(off);
        scales.push(scale);
    }
    let (lo, hi) = minmax(ds.labels.iter().copied());
    let (label_offset, label_scale) = affine_for(lo, hi);
    let labels = ds
        .labels
        .iter()
        .map(|&v| {
            if label_offset == 0.0 && label_scale == 1.0 {
                v
            } else {
                ((v - label_offset) / label_scale).clamp(0.0, 1.0)
            }
        })
        .collect();
    let out = Dataset::with_names(
        x,
        labels,
        ds.replication_ids.clone(),
        ds.feature_names.clone(),
        ds.label_name.clone(),
    )?;
    Ok((
        out,
        Normalization {
            feature_offsets: offsets,
            feature_scales: scales,
            label_offset,
            label_scale,
        },
    ))
}

/// Assign rows to `r` replications uniformly at random with sizes balanced
/// to within one.
pub fn partition_replications(ds: &Dataset, r: usize, seed: Seed) -> Result<Dataset> {
    let ids = balanced_assignment(ds.n(), r, seed)?;
    ds.with_replication_ids(ids)
}

/// Random replication ids for `n` rows: `i mod r` labels, permuted.
pub fn balanced_assignment(n: usize, r: usize, seed: Seed) -> Result<Vec<usize>> {
    if r == 0 || r > n {
        return Err(Error::invalid(format!(
            "replication count {r} must be in 1..={n}"
        )));
    }
    let mut ids: Vec<usize> = (0..n).map(|i| i % r).collect();
    fisher_yates(&mut ids, &mut seed.rng());
    Ok(ids)
}

/// In-place Fisher–Yates shuffle.
pub fn fisher_yates<T>(v: &mut [T], rng: &mut crate::rng::Rng) {
    for i in (1..v.len()).rev() {
        let j = rng.random_range(0..=i);
        v.swap(i, j);
    }
}

/// Permute labels uniformly at random inside each replication.
pub fn shuffle_within_replications(ds: &Dataset, seed: Seed) -> Result<Dataset> {
    let mut rng = seed.rng();
    let mut labels = ds.labels.clone();
    for group in &ds.groups {
        let mut block: Vec<f64> = group.iter().map(|&i| ds.labels[i]).collect();
        fisher_yates(&mut block, &mut rng);
        for (&i, v) in group.iter().zip(block) {
            labels[i] = v;
        }
    }
    ds.with_labels(labels)
}

/// `|w_hat - w_ref|₂ / |w_ref|₂`.
pub fn relative_error(w_hat: &[f64], w_ref: &[f64]) -> Result<f64> {
    if w_hat.len() != w_ref.len() {
        return Err(Error::invalid(format!(
            "weight lengths differ: {} vs {}",
            w_hat.len(),
            w_ref.len()
        )));
    }
    let denom = norm2(w_ref);
    if denom == 0.0 {
        return Err(Error::invalid("reference weights have zero norm"));
    }
    let diff: f64 = w_hat
        .iter()
        .zip(w_ref)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(diff / denom)
}

/// Ordinary least squares on the rows as ordered, via Householder QR.
pub fn ols_fit(ds: &Dataset) -> Result<WeightVector> {
    ols_solve(&ds.features, &ds.labels)
}

pub(crate) fn ols_solve(x: &DMatrix<f64>, y: &[f64]) -> Result<WeightVector> {
    let (n, d) = x.shape();
    if n < d {
        return Err(Error::Singular(format!(
            "{n} rows cannot determine {d} weights"
        )));
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let max_diag = (0..d).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let tol = max_diag * (n.max(d) as f64) * f64::EPSILON;
    if max_diag == 0.0 || (0..d).any(|i| r[(i, i)].abs() <= tol) {
        return Err(Error::Singular(
            "feature matrix is rank deficient".to_string(),
        ));
    }
    let qty = qr.q().transpose() * DVector::from_column_slice(y);
    let w = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Singular("triangular solve failed".to_string()))?;
    Ok(WeightVector(w.iter().copied().collect()))
}

/// Mean relative error of an estimator over repeated trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub estimator: String,
    pub relative_error: f64,
    pub final_loss: f64,
    pub trials: usize,
    pub per_trial_errors: Vec<f64>,
}

impl EvalReport {
    /// `final_loss` is the mean of the per-trial final losses.
    pub fn from_trials(estimator: impl Into<String>, errors: Vec<f64>, losses: &[f64]) -> Self {
        let trials = errors.len();
        let relative_error = mean(&errors);
        EvalReport {
            estimator: estimator.into(),
            relative_error,
            final_loss: mean(losses),
            trials,
            per_trial_errors: errors,
        }
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

pub(crate) fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}
