//! Population-level limits for the single-feature Gaussian model
//! `y = π(x) w0 + e`, `x ~ N(μ_X, σ_X²)`, `e ~ N(0, σ_E²)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub mu_x: f64,
    pub sigma_x: f64,
    pub sigma_e: f64,
    pub w0: f64,
}

impl PopulationSpec {
    pub fn new(mu_x: f64, sigma_x: f64, sigma_e: f64, w0: f64) -> Result<Self> {
        if !(sigma_x >= 0.0) || !(sigma_e >= 0.0) {
            return Err(Error::invalid("standard deviations must be >= 0"));
        }
        Ok(PopulationSpec { mu_x, sigma_x, sigma_e, w0 })
    }
}

/// Almost-sure limit of the sorted least-squares estimate as `n → ∞`:
/// `w0 (μ² + σ_X √(σ_X² + σ_E²/w0²)) / (μ² + σ_X²)`.
pub fn ls_limit_d1(p: &PopulationSpec) -> Result<f64> {
    let denom = p.mu_x * p.mu_x + p.sigma_x * p.sigma_x;
    if denom == 0.0 {
        return Err(Error::invalid("μ_X² + σ_X² must be positive"));
    }
    if p.sigma_e == 0.0 || p.sigma_x == 0.0 {
        return Ok(p.w0);
    }
    if p.w0 == 0.0 {
        return Err(Error::invalid("w0 must be nonzero when σ_E > 0"));
    }
    let spread = (p.sigma_x * p.sigma_x + (p.sigma_e / p.w0).powi(2)).sqrt();
    Ok(p.w0 * (p.mu_x * p.mu_x + p.sigma_x * spread) / denom)
}

/// Limit of `(1/n) Σ x_(i) y_(i)` for independent Gaussian samples sorted
/// ascending.
pub fn sorted_cross_moment_limit(mu_x: f64, sigma_x: f64, mu_y: f64, sigma_y: f64) -> f64 {
    mu_x * mu_y + sigma_x * sigma_y
}

/// Asymptotic mean squared error `σ_E² / (μ_X² n)` of the single-feature
/// self-moment estimate. An approximation for finite `n`.
pub fn sm_d1_mse(p: &PopulationSpec, n: usize) -> Result<f64> {
    if p.mu_x == 0.0 {
        return Err(Error::invalid("μ_X must be nonzero"));
    }
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    Ok(p.sigma_e * p.sigma_e / (p.mu_x * p.mu_x * n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::sort_ascending;
    use crate::rng::Seed;
    use proptest::prelude::*;
    use rand::Rng as _;
    use rand_distr::StandardNormal;

    fn pop(mu: f64, sx: f64, se: f64, w0: f64) -> PopulationSpec {
        PopulationSpec::new(mu, sx, se, w0).unwrap()
    }

    #[test]
    fn ls_limit_examples() {
        let v = ls_limit_d1(&pop(1.0, 1.0, 1.0, 1.0)).unwrap();
        assert!((v - (1.0 + 2f64.sqrt()) / 2.0).abs() < 1e-12);
        assert_eq!(ls_limit_d1(&pop(1.0, 1.0, 0.0, 1.7)).unwrap(), 1.7);
        assert_eq!(ls_limit_d1(&pop(2.0, 0.0, 3.0, -0.4)).unwrap(), -0.4);
        assert!(ls_limit_d1(&pop(0.0, 0.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn cross_moment_examples() {
        assert_eq!(sorted_cross_moment_limit(0.0, 1.0, 0.0, 1.0), 1.0);
        assert_eq!(sorted_cross_moment_limit(2.0, 0.0, 3.0, 5.0), 6.0);
    }

    #[test]
    fn cross_moment_monte_carlo() {
        let n = 100_000;
        let mut rng = Seed(11).rng();
        let mut draw = |mu: f64, s: f64| -> Vec<f64> {
            let mut v: Vec<f64> = (0..n).map(|_| mu + s * rng.sample::<f64, _>(StandardNormal)).collect();
            sort_ascending(&mut v);
            v
        };
        let x = draw(1.0, 2.0);
        let y = draw(-1.0, 3.0);
        let m = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        assert!((m - 5.0).abs() < 0.1, "{m}");
    }

    #[test]
    fn mse_examples() {
        assert!((sm_d1_mse(&pop(1.0, 1.0, 1.0, 1.0), 100).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(sm_d1_mse(&pop(1.0, 1.0, 0.0, 1.0), 100).unwrap(), 0.0);
        let a = sm_d1_mse(&pop(0.5, 1.0, 2.0, 1.0), 50).unwrap();
        let b = sm_d1_mse(&pop(0.5, 1.0, 2.0, 1.0), 100).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
        assert!(sm_d1_mse(&pop(0.0, 1.0, 1.0, 1.0), 10).is_err());
    }

    proptest! {
        #[test]
        fn amplification_and_monotonicity(
            mu in -3.0f64..3.0, sx in 0.01f64..3.0, se in 0.0f64..3.0, w0 in 0.1f64..3.0, extra in 0.01f64..1.0,
        ) {
            let base = ls_limit_d1(&pop(mu, sx, se, w0)).unwrap();
            prop_assert!(base >= w0 * (1.0 - 1e-12));
            if se > 1e-3 {
                prop_assert!(base > w0);
            }
            let more = ls_limit_d1(&pop(mu, sx, se + extra, w0)).unwrap();
            prop_assert!(more >= base);
        }
    }
}
