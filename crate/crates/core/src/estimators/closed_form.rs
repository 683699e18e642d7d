//! Closed-form self-moment estimators for one and two features.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, WeightVector};
use crate::error::{Error, Result};
use crate::losses::{Loss, LossSpec};

/// Relative zero test for sums: `|Σ| < DEGENERATE_EPS · n`.
pub const DEGENERATE_EPS: f64 = 1e-12;

pub(crate) fn degenerate(sum: f64, n: usize) -> bool {
    !(sum.abs() >= DEGENERATE_EPS * n as f64)
}

/// `ŵ = Σy / Σx` for a single feature, pooled over replications.
pub fn sm_d1(ds: &Dataset) -> Result<WeightVector> {
    if ds.d() != 1 {
        return Err(Error::invalid(format!("sm_d1 needs d = 1, got d = {}", ds.d())));
    }
    let sx: f64 = ds.features().column(0).iter().sum();
    if degenerate(sx, ds.n()) {
        return Err(Error::DegenerateMean(format!("feature sum {sx:e} is numerically zero")));
    }
    let sy: f64 = ds.labels().iter().sum();
    Ok(WeightVector(vec![sy / sx]))
}

/// A candidate solution with the loss used to rank it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub weights: WeightVector,
    pub loss: f64,
}

/// Candidates sorted ascending by disambiguation loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub candidates: Vec<Candidate>,
}

impl CandidateSet {
    /// Sorts by loss; equal losses keep their input order.
    pub fn new(mut candidates: Vec<Candidate>) -> Self {
        candidates.sort_by(|a, b| a.loss.total_cmp(&b.loss));
        CandidateSet { candidates }
    }

    pub fn best(&self) -> &Candidate {
        &self.candidates[0]
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// First and second sample moments of two feature columns and the labels.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments2 {
    pub n: usize,
    pub e1: f64,
    pub e2: f64,
    pub s11: f64,
    pub s12: f64,
    pub s22: f64,
    pub ey: f64,
    pub ey2: f64,
}

impl Moments2 {
    pub fn from_columns(x1: &[f64], x2: &[f64], y: &[f64]) -> Self {
        let n = y.len();
        let mut m = Moments2 { n, ..Default::default() };
        for i in 0..n {
            let (a, b) = (x1[i], x2[i]);
            m.e1 += a;
            m.e2 += b;
            m.s11 += a * a;
            m.s12 += a * b;
            m.s22 += b * b;
            m.ey += y[i];
            m.ey2 += y[i] * y[i];
        }
        let c = n as f64;
        for v in [
            &mut m.e1, &mut m.e2, &mut m.s11, &mut m.s12, &mut m.s22, &mut m.ey, &mut m.ey2,
        ] {
            *v /= c;
        }
        m
    }

    fn swapped(&self) -> Self {
        Moments2 {
            e1: self.e2,
            e2: self.e1,
            s11: self.s22,
            s22: self.s11,
            ..*self
        }
    }
}

/// Both roots `[w1, w2]` of the two-feature moment equations
/// `E[x·w] = E[y]`, `E[(x·w)²] = E[y²] − σ²`.
pub(crate) fn d2_roots(m: &Moments2, noise_variance: f64) -> Result<[[f64; 2]; 2]> {
    let n = m.n;
    if degenerate(m.e1 * n as f64, n) {
        if degenerate(m.e2 * n as f64, n) {
            return Err(Error::DegenerateMean(
                "both feature means are numerically zero".into(),
            ));
        }
        let r = d2_roots(&m.swapped(), noise_variance)?;
        return Ok([[r[0][1], r[0][0]], [r[1][1], r[1][0]]]);
    }
    let q = m.ey / m.e1;
    let r = m.e2 / m.e1;
    let a = r * r * m.s11 - 2.0 * r * m.s12 + m.s22;
    let b = 2.0 * q * m.s12 - 2.0 * q * r * m.s11;
    let c = q * q * m.s11 - (m.ey2 - noise_variance);
    let scale = m.s11 * r * r + m.s22;
    if !(a.abs() > 1e-12 * scale) {
        return Err(Error::Singular(
            "feature columns are collinear; the quadratic degenerates".into(),
        ));
    }
    let mut disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        if disc >= -1e-12 * (b * b + (4.0 * a * c).abs()) {
            disc = 0.0;
        } else {
            return Err(Error::NoRealSolution { discriminant: disc });
        }
    }
    let root = disc.sqrt();
    let t = -0.5 * (b + if b >= 0.0 { root } else { -root });
    let (u, v) = if t == 0.0 {
        (0.0, 0.0)
    } else {
        (t / a, c / t)
    };
    Ok([[q - r * u, u], [q - r * v, v]])
}

/// Closed-form self-moment estimate for two features.
///
/// Returns both roots of the moment equations ranked by the sorted squared
/// loss on `ds`. With `noise_variance = Some(σ²)` the second moment of the
/// labels is reduced by `σ²`.
pub fn sm_d2_analytic(ds: &Dataset, noise_variance: Option<f64>) -> Result<CandidateSet> {
    if ds.d() != 2 {
        return Err(Error::invalid(format!("sm_d2_analytic needs d = 2, got d = {}", ds.d())));
    }
    let s2 = noise_variance.unwrap_or(0.0);
    if !(s2 >= 0.0) || !s2.is_finite() {
        return Err(Error::invalid("noise variance must be finite and >= 0"));
    }
    let x = ds.features();
    let x1: Vec<f64> = x.column(0).iter().copied().collect();
    let x2: Vec<f64> = x.column(1).iter().copied().collect();
    let m = Moments2::from_columns(&x1, &x2, ds.labels());
    let roots = d2_roots(&m, s2)?;
    let ls = Loss::new(ds, &LossSpec::ls())?;
    Ok(CandidateSet::new(
        roots
            .iter()
            .map(|w| Candidate {
                weights: WeightVector(w.to_vec()),
                loss: ls.eval(w),
            })
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::moments_up_to;

    fn ds(rows: &[[f64; 2]], y: &[f64]) -> Dataset {
        Dataset::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), y.to_vec()).unwrap()
    }

    fn ds1(x: &[f64], y: &[f64]) -> Dataset {
        Dataset::from_rows(&x.iter().map(|v| vec![*v]).collect::<Vec<_>>(), y.to_vec()).unwrap()
    }

    #[test]
    fn d1_examples() {
        assert_eq!(sm_d1(&ds1(&[1.0, 2.0, 3.0], &[6.0, 2.0, 4.0])).unwrap()[0], 2.0);
        assert_eq!(sm_d1(&ds1(&[1.0, 1.0], &[3.0, 1.0])).unwrap()[0], 2.0);
        assert!(matches!(
            sm_d1(&ds1(&[-1.0, 1.0], &[3.0, 1.0])),
            Err(Error::DegenerateMean(_))
        ));
    }

    fn moment_residuals(d: &Dataset, w: &[f64]) -> (f64, f64) {
        let z = d.predict(w);
        let mz = moments_up_to(z.iter(), 2);
        let my = moments_up_to(d.labels().iter(), 2);
        (mz[1] - my[1], mz[2] - my[2])
    }

    #[test]
    fn d2_recovers_truth_and_second_root() {
        let d = ds(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], &[5.0, 2.0, 3.0]);
        let set = sm_d2_analytic(&d, None).unwrap();
        assert_eq!(set.len(), 2);
        assert!(set
            .candidates
            .iter()
            .any(|c| (c.weights[0] - 2.0).abs() < 1e-9 && (c.weights[1] - 3.0).abs() < 1e-9));
        for c in &set.candidates {
            let (r1, r2) = moment_residuals(&d, &c.weights);
            assert!(r1.abs() < 1e-9 && r2.abs() < 1e-9, "{r1} {r2}");
        }
        assert!(set.candidates[0].loss <= set.candidates[1].loss);
    }

    #[test]
    fn d2_symmetric_instance() {
        let d = ds(&[[1.0, 0.0], [0.0, 1.0]], &[4.0, 4.0]);
        let set = sm_d2_analytic(&d, None).unwrap();
        let (a, b) = (&set.candidates[0], &set.candidates[1]);
        assert_eq!(moment_residuals(&d, &a.weights), moment_residuals(&d, &b.weights));
    }

    #[test]
    fn d2_column_swap_on_zero_first_mean() {
        let d = ds(&[[1.0, 1.0], [-1.0, 2.0], [0.5, 0.5], [-0.5, 1.5]], &[0.0; 4]);
        let truth = [1.5, 2.0];
        let y = d.predict(&truth);
        let d = d.with_labels(vec![y[2], y[0], y[3], y[1]]).unwrap();
        let set = sm_d2_analytic(&d, None).unwrap();
        for c in &set.candidates {
            let (r1, r2) = moment_residuals(&d, &c.weights);
            assert!(r1.abs() < 1e-9 && r2.abs() < 1e-9);
        }
    }

    #[test]
    fn d2_errors() {
        let zero = ds(&[[1.0, -1.0], [-1.0, 1.0]], &[1.0, 2.0]);
        assert!(matches!(sm_d2_analytic(&zero, None), Err(Error::DegenerateMean(_))));
        // labels with a second moment below what any w can reach
        let d = ds(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], &[3.0, 3.0, 3.0]);
        assert!(matches!(
            sm_d2_analytic(&d, Some(5.0)),
            Err(Error::NoRealSolution { .. })
        ));
    }

    #[test]
    fn noise_adjustment_shrinks_second_moment() {
        let d = ds(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], &[5.0, 2.0, 3.0]);
        let set = sm_d2_analytic(&d, Some(0.1)).unwrap();
        for c in &set.candidates {
            let z = d.predict(&c.weights);
            let m = moments_up_to(z.iter(), 2);
            assert!((m[2] + 0.1 - 38.0 / 3.0).abs() < 1e-9);
        }
    }
}
