//! Synthetic shuffled-regression instances under a Gaussian random design.

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{self, norm2, Dataset, WeightVector};
use crate::error::{Error, Result};
use crate::rng::Seed;

/// Column `i` of the design is drawn i.i.d. from `N(means[i], stds[i]²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianDesignSpec {
    pub n: usize,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl GaussianDesignSpec {
    /// Every column drawn from the same `N(mean, std²)`.
    pub fn isotropic(n: usize, d: usize, mean: f64, std: f64) -> Self {
        GaussianDesignSpec {
            n,
            means: vec![mean; d],
            stds: vec![std; d],
        }
    }

    pub fn d(&self) -> usize {
        self.means.len()
    }

    fn validate(&self) -> Result<()> {
        if self.means.len() != self.stds.len() {
            return Err(Error::invalid("means and stds must have equal length"));
        }
        if self.means.is_empty() {
            return Err(Error::invalid("design needs at least one column"));
        }
        if self.stds.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::invalid("standard deviations must be finite and >= 0"));
        }
        if self.means.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("means must be finite"));
        }
        Ok(())
    }
}

/// Draw an `n × d` design. Entries are drawn row by row.
pub fn generate_design(spec: &GaussianDesignSpec, seed: Seed) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let d = spec.d();
    let mut rng = seed.rng();
    let mut vals = Vec::with_capacity(spec.n * d);
    for _ in 0..spec.n {
        for (m, s) in spec.means.iter().zip(&spec.stds) {
            let z: f64 = rng.sample(StandardNormal);
            vals.push(m + s * z);
        }
    }
    Ok(DMatrix::from_row_slice(spec.n, d, &vals))
}

/// Uniformly random permutation of `0..n` (Fisher–Yates).
pub fn sample_permutation(n: usize, seed: Seed) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    data::fisher_yates(&mut p, &mut seed.rng());
    p
}

/// A permutation that maps every group's index set onto itself.
pub fn block_permutation(groups: &[Vec<usize>], seed: Seed) -> Vec<usize> {
    let n: usize = groups.iter().map(Vec::len).sum();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = seed.rng();
    for g in groups {
        let mut targets = g.clone();
        data::fisher_yates(&mut targets, &mut rng);
        for (&i, t) in g.iter().zip(targets) {
            perm[i] = t;
        }
    }
    perm
}

/// Noise level, given directly or relative to the signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseSpec {
    /// Standard deviation of the additive Gaussian noise.
    Sigma(f64),
    /// `20 log10(σ_E / |w0|₂)`.
    NsrDb(f64),
    /// Mean power of `x · w0` over noise power, in dB.
    SnrDb(f64),
}

impl NoiseSpec {
    /// Noise standard deviation for a given signal `x · w0` and weights.
    pub fn resolve_sigma(&self, signal: &[f64], w0: &[f64]) -> Result<f64> {
        let sigma = match *self {
            NoiseSpec::Sigma(s) => s,
            NoiseSpec::NsrDb(db) => norm2(w0) * 10f64.powf(db / 20.0),
            NoiseSpec::SnrDb(db) => {
                let power = signal.iter().map(|s| s * s).sum::<f64>() / signal.len() as f64;
                (power / 10f64.powf(db / 10.0)).sqrt()
            }
        };
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::invalid(format!("noise level resolves to {sigma}")));
        }
        Ok(sigma)
    }
}

/// Labels `y[i] = (x · w0)[perm[i]] + e[i]` with `e ~ N(0, σ_E²)` i.i.d.
///
/// Returns the labels together with the resolved `σ_E`.
pub fn apply_model(
    x: &DMatrix<f64>,
    w0: &[f64],
    perm: &[usize],
    noise: NoiseSpec,
    seed: Seed,
) -> Result<(Vec<f64>, f64)> {
    if x.ncols() != w0.len() {
        return Err(Error::invalid(format!(
            "design has {} columns but w0 has {} entries",
            x.ncols(),
            w0.len()
        )));
    }
    if perm.len() != x.nrows() {
        return Err(Error::invalid("permutation length must equal row count"));
    }
    let signal = data::predict(x, w0);
    let sigma = noise.resolve_sigma(&signal, w0)?;
    let mut y: Vec<f64> = perm.iter().map(|&p| signal[p]).collect();
    if sigma > 0.0 {
        let mut rng = seed.rng();
        for v in y.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v += sigma * z;
        }
    }
    Ok((y, sigma))
}

/// Draw `d` weights i.i.d. from `N(0, 1)`.
pub fn gaussian_weights(d: usize, seed: Seed) -> WeightVector {
    let mut rng = seed.rng();
    WeightVector((0..d).map(|_| rng.sample(StandardNormal)).collect())
}

/// Design distribution for one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationDesign {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

fn one() -> usize {
    1
}

/// A simulation scenario, as read from JSON by the CLI `simulate` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n: usize,
    pub d: usize,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w0_seed: Option<u64>,
    pub noise: NoiseSpec,
    #[serde(default)]
    pub design_seed: u64,
    #[serde(default)]
    pub perm_seed: u64,
    #[serde(default)]
    pub noise_seed: u64,
    /// Balanced random split into this many independently shuffled blocks.
    #[serde(default = "one")]
    pub replications: usize,
    #[serde(default)]
    pub replication_seed: u64,
    /// Optional per-replication design overriding `means`/`stds`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replication_designs: Option<Vec<ReplicationDesign>>,
}

/// A realised scenario together with its ground truth.
#[derive(Debug, Clone)]
pub struct Simulated {
    pub dataset: Dataset,
    pub w0: WeightVector,
    pub sigma_e: f64,
    pub permutation: Vec<usize>,
}

impl Scenario {
    pub fn weights(&self) -> Result<WeightVector> {
        match (&self.w0, self.w0_seed) {
            (Some(w), None) => {
                if w.len() != self.d {
                    return Err(Error::invalid("w0 length must equal d"));
                }
                Ok(WeightVector(w.clone()))
            }
            (None, Some(s)) => Ok(gaussian_weights(self.d, Seed(s))),
            _ => Err(Error::invalid("exactly one of w0 and w0_seed must be given")),
        }
    }

    pub fn simulate(&self) -> Result<Simulated> {
        if self.means.len() != self.d || self.stds.len() != self.d {
            return Err(Error::invalid("means and stds must have length d"));
        }
        let w0 = self.weights()?;
        let ids = data::balanced_assignment(self.n, self.replications, Seed(self.replication_seed))?;
        let x = match &self.replication_designs {
            None => generate_design(
                &GaussianDesignSpec {
                    n: self.n,
                    means: self.means.clone(),
                    stds: self.stds.clone(),
                },
                Seed(self.design_seed),
            )?,
            Some(designs) => {
                if designs.len() != self.replications {
                    return Err(Error::invalid(
                        "replication_designs needs one entry per replication",
                    ));
                }
                let mut x = DMatrix::zeros(self.n, self.d);
                for (r, rd) in designs.iter().enumerate() {
                    let rows: Vec<usize> = (0..self.n).filter(|&i| ids[i] == r).collect();
                    let block = generate_design(
                        &GaussianDesignSpec {
                            n: rows.len(),
                            means: rd.means.clone(),
                            stds: rd.stds.clone(),
                        },
                        Seed(self.design_seed).index(r as u64),
                    )?;
                    if block.ncols() != self.d {
                        return Err(Error::invalid("replication design must have d columns"));
                    }
                    for (k, &i) in rows.iter().enumerate() {
                        x.set_row(i, &block.row(k));
                    }
                }
                x
            }
        };
        let groups = {
            let mut g = vec![Vec::new(); self.replications];
            for (i, &id) in ids.iter().enumerate() {
                g[id].push(i);
            }
            g
        };
        let perm = if self.replications == 1 {
            sample_permutation(self.n, Seed(self.perm_seed))
        } else {
            block_permutation(&groups, Seed(self.perm_seed))
        };
        let (y, sigma_e) = apply_model(&x, &w0, &perm, self.noise, Seed(self.noise_seed))?;
        let dataset = Dataset::with_replications(x, y, ids)?;
        Ok(Simulated {
            dataset,
            w0,
            sigma_e,
            permutation: perm,
        })
    }
}

/// One shuffled instance with a single replication: design, permutation and
/// noise seeds are derived from `seed`.
pub fn shuffled_instance(
    design: &GaussianDesignSpec,
    w0: &[f64],
    noise: NoiseSpec,
    seed: Seed,
) -> Result<(Dataset, f64)> {
    let x = generate_design(design, seed.child("design"))?;
    let perm = sample_permutation(design.n, seed.child("permutation"));
    let (y, sigma) = apply_model(&x, w0, &perm, noise, seed.child("noise"))?;
    Ok((Dataset::new(x, y)?, sigma))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_std_rows_equal_means() {
        let spec = GaussianDesignSpec {
            n: 5,
            means: vec![1.5, -2.0],
            stds: vec![0.0, 0.0],
        };
        let x = generate_design(&spec, Seed(3)).unwrap();
        for i in 0..5 {
            assert_eq!(x[(i, 0)], 1.5);
            assert_eq!(x[(i, 1)], -2.0);
        }
    }

    #[test]
    fn design_moments_concentrate() {
        let x = generate_design(&GaussianDesignSpec::isotropic(100_000, 1, 1.0, 1.0), Seed(5)).unwrap();
        let m = x.column(0).mean();
        assert!((m - 1.0).abs() < 0.02, "mean {m}");
        let x = generate_design(&GaussianDesignSpec::isotropic(100_000, 1, 0.0, 1.0), Seed(6)).unwrap();
        let v = x.column(0).iter().map(|a| a * a).sum::<f64>() / 100_000.0 - x.column(0).mean().powi(2);
        assert!((v - 1.0).abs() < 0.03, "variance {v}");
    }

    #[test]
    fn invalid_design() {
        let bad = GaussianDesignSpec { n: 3, means: vec![0.0], stds: vec![-1.0] };
        assert!(generate_design(&bad, Seed(0)).is_err());
        let bad = GaussianDesignSpec { n: 3, means: vec![0.0, 1.0], stds: vec![1.0] };
        assert!(generate_design(&bad, Seed(0)).is_err());
    }

    #[test]
    fn permutation_basics() {
        assert_eq!(sample_permutation(1, Seed(9)), vec![0]);
        for s in 0..50 {
            let mut p = sample_permutation(17, Seed(s));
            p.sort();
            assert_eq!(p, (0..17).collect::<Vec<_>>());
        }
    }

    #[test]
    fn permutation_is_uniform_on_three() {
        // chi-square over the 6 permutations of 3 items
        let trials = 60_000u64;
        let mut counts = std::collections::HashMap::new();
        for s in 0..trials {
            *counts.entry(sample_permutation(3, Seed(s))).or_insert(0u64) += 1;
        }
        assert_eq!(counts.len(), 6);
        for (_, c) in counts {
            let f = c as f64 / trials as f64;
            assert!((f - 1.0 / 6.0).abs() < 0.01, "frequency {f}");
        }
    }

    #[test]
    fn block_permutation_stays_in_blocks() {
        let groups = vec![vec![0, 2, 4], vec![1, 3]];
        for s in 0..20 {
            let p = block_permutation(&groups, Seed(s));
            for g in &groups {
                for &i in g {
                    assert!(g.contains(&p[i]));
                }
            }
        }
    }

    #[test]
    fn noiseless_identity_is_exact() {
        let x = generate_design(&GaussianDesignSpec::isotropic(50, 3, 1.0, 2.0), Seed(1)).unwrap();
        let w0 = [0.5, -1.25, 3.0];
        let id: Vec<usize> = (0..50).collect();
        let (y, sigma) = apply_model(&x, &w0, &id, NoiseSpec::Sigma(0.0), Seed(2)).unwrap();
        assert_eq!(sigma, 0.0);
        assert_eq!(y, data::predict(&x, &w0));

        let perm = sample_permutation(50, Seed(4));
        let (mut ys, _) = apply_model(&x, &w0, &perm, NoiseSpec::Sigma(0.0), Seed(2)).unwrap();
        let mut s = data::predict(&x, &w0);
        ys.sort_by(f64::total_cmp);
        s.sort_by(f64::total_cmp);
        assert_eq!(ys, s);
    }

    #[test]
    fn noise_resolution() {
        let s = NoiseSpec::NsrDb(0.0).resolve_sigma(&[1.0], &[1.0]).unwrap();
        assert!((s - 1.0).abs() < 1e-15);
        let mut last = 0.0;
        for db in [-30.0, -10.0, 0.0, 5.0, 20.0] {
            let s = NoiseSpec::NsrDb(db).resolve_sigma(&[1.0], &[3.0, 4.0]).unwrap();
            assert!(s > last);
            last = s;
        }
        // signal power 4, 10 dB → noise power 0.4
        let s = NoiseSpec::SnrDb(10.0).resolve_sigma(&[2.0, -2.0], &[1.0]).unwrap();
        assert!((s * s - 0.4).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let x = DMatrix::from_element(3, 2, 1.0);
        assert!(apply_model(&x, &[1.0], &[0, 1, 2], NoiseSpec::Sigma(0.0), Seed(0)).is_err());
    }

    #[test]
    fn scenario_json() {
        let json = r#"{"n":40,"d":2,"means":[1,1],"stds":[1,1],"w0":[1,-1],
            "noise":{"nsr_db":-10},"perm_seed":3,"noise_seed":4,"replications":4}"#;
        let sc: Scenario = serde_json::from_str(json).unwrap();
        let sim = sc.simulate().unwrap();
        assert_eq!(sim.dataset.n(), 40);
        assert_eq!(sim.dataset.r(), 4);
        assert!((sim.sigma_e - 2f64.sqrt() * 10f64.powf(-0.5)).abs() < 1e-12);
        for g in sim.dataset.groups() {
            for &i in g {
                assert!(g.contains(&sim.permutation[i]));
            }
        }
        let both = r#"{"n":4,"d":1,"means":[1],"stds":[1],"w0":[1],"w0_seed":2,"noise":{"sigma":0}}"#;
        let sc: Scenario = serde_json::from_str(both).unwrap();
        assert!(sc.simulate().is_err());
    }
}
