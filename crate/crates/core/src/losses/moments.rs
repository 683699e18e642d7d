//! Self-moments and their weighting.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// `(1/n) Σ v_i^k`.
pub fn sample_moment(v: &[f64], k: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    v.iter().map(|x| x.powi(k as i32)).sum::<f64>() / v.len() as f64
}

/// Sample moments of orders `0..=k_max`; index 0 holds 1.
pub fn moments_up_to<'a>(values: impl Iterator<Item = &'a f64>, k_max: usize) -> Vec<f64> {
    let mut acc = vec![0.0; k_max + 1];
    let mut count = 0usize;
    for &z in values {
        let mut p = 1.0;
        for a in acc.iter_mut().skip(1) {
            p *= z;
            *a += p;
        }
        count += 1;
    }
    acc[0] = count as f64;
    let c = count as f64;
    acc.iter_mut().for_each(|a| *a /= c);
    acc
}

/// How much each moment order contributes to the self-moment loss.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentWeights {
    /// `f(k) = 1 / k!`
    #[default]
    InverseFactorial,
    /// `f(k) = 1`
    Uniform,
    /// `f(k) = list[k - 1]`
    Custom(Vec<f64>),
}

pub fn moment_weight(k: usize, weights: &MomentWeights) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("moment weights are defined for k >= 1"));
    }
    match weights {
        MomentWeights::InverseFactorial => Ok(1.0 / (1..=k).map(|i| i as f64).product::<f64>()),
        MomentWeights::Uniform => Ok(1.0),
        MomentWeights::Custom(list) => list.get(k - 1).copied().ok_or_else(|| {
            Error::invalid(format!(
                "custom moment weights have {} entries, order {k} requested",
                list.len()
            ))
        }),
    }
}

/// Per-replication label moments `N[r][k]` for `k = 0..=K` and block sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSummary {
    pub moments: Vec<Vec<f64>>,
    pub sizes: Vec<usize>,
}

impl MomentSummary {
    pub fn of_labels(ds: &Dataset, k_max: usize) -> Self {
        let y = ds.labels();
        let moments = ds
            .groups()
            .iter()
            .map(|g| moments_up_to(g.iter().map(|&i| &y[i]), k_max))
            .collect();
        MomentSummary {
            moments,
            sizes: ds.groups().iter().map(Vec::len).collect(),
        }
    }
}

pub(crate) fn binomial_table(k_max: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; k_max + 1]; k_max + 1];
    for k in 0..=k_max {
        c[k][0] = 1.0;
        for j in 1..=k {
            c[k][j] = c[k - 1][j - 1] + if j < k { c[k - 1][j] } else { 0.0 };
        }
    }
    c
}

/// Moments of `z + E` given plain moments `m[j]` of `z` and noise moments
/// `e[j] = E[E^j]`: `Σ_j C(k, j) m_j e_{k-j}`.
pub(crate) fn noise_adjusted(m: &[f64], noise: &[f64], binom: &[Vec<f64>]) -> Vec<f64> {
    (0..m.len())
        .map(|k| (0..=k).map(|j| binom[k][j] * m[j] * noise[k - j]).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_examples() {
        assert_eq!(sample_moment(&[1.0, 2.0, 3.0], 1), 2.0);
        assert!((sample_moment(&[1.0, 2.0, 3.0], 2) - 14.0 / 3.0).abs() < 1e-15);
        assert_eq!(sample_moment(&[7.0, -3.0], 0), 1.0);
        let m = moments_up_to([1.0, 2.0, 3.0].iter(), 2);
        assert_eq!(m[0], 1.0);
        assert_eq!(m[1], 2.0);
        assert!((m[2] - 14.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn weight_examples() {
        assert!((moment_weight(3, &MomentWeights::InverseFactorial).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(moment_weight(1, &MomentWeights::InverseFactorial).unwrap(), 1.0);
        assert_eq!(moment_weight(5, &MomentWeights::Uniform).unwrap(), 1.0);
        assert_eq!(moment_weight(2, &MomentWeights::Custom(vec![0.3, 0.7])).unwrap(), 0.7);
        assert!(moment_weight(3, &MomentWeights::Custom(vec![0.3, 0.7])).is_err());
    }

    #[test]
    fn binomials() {
        let c = binomial_table(4);
        assert_eq!(c[4], vec![1.0, 4.0, 6.0, 4.0, 1.0]);
        assert_eq!(c[2][..3], [1.0, 2.0, 1.0]);
    }

    #[test]
    fn gaussian_noise_adjustment_matches_closed_form() {
        // z constant at 2, E ~ N(0, 1): E[(2+E)^2] = 5, E[(2+E)^3] = 8 + 3*2 = 14
        let m = vec![1.0, 2.0, 4.0, 8.0];
        let noise = vec![1.0, 0.0, 1.0, 0.0];
        let adj = noise_adjusted(&m, &noise, &binomial_table(3));
        assert_eq!(adj, vec![1.0, 2.0, 5.0, 14.0]);
    }
}
