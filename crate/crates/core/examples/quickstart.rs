//! Simulate a shuffled regression problem and fit it with the automatic estimator.
//!
//! Run with `cargo run --example quickstart`.

use shufreg::synth::{NoiseSpec, Scenario};
use shufreg::{estimate_resolved, relative_error, EstimatorChoice, EstimatorKind};

fn main() -> shufreg::Result<()> {
    let sim = Scenario {
        n: 500,
        d: 3,
        means: vec![1.0; 3],
        stds: vec![1.0; 3],
        w0: Some(vec![1.5, -0.5, 2.0]),
        w0_seed: None,
        noise: NoiseSpec::SnrDb(20.0),
        design_seed: 1,
        perm_seed: 2,
        noise_seed: 3,
        replications: 1,
        replication_seed: 0,
        replication_designs: None,
    }
    .simulate()?;

    let (kind, fit) = estimate_resolved(&sim.dataset, &EstimatorChoice::new(EstimatorKind::Auto))?;
    println!("auto resolved to {}", kind.name());
    println!("truth    {:?}", sim.w0.as_slice());
    println!("estimate {:?}", fit.weights.as_slice());
    println!("relative error {:.4}", relative_error(&fit.weights, &sim.w0)?);
    Ok(())
}
