//! The two-feature closed form returns every root of the moment equations,
//! ranked by a higher-moment check.

use shufreg::estimators::sm_d2_analytic;
use shufreg::synth::{shuffled_instance, GaussianDesignSpec, NoiseSpec};
use shufreg::{relative_error, Seed};

fn main() -> shufreg::Result<()> {
    let w0 = [0.8, -1.3];
    let spec = GaussianDesignSpec { n: 400, means: vec![1.0, 0.5], stds: vec![1.0, 0.7] };
    let (ds, _) = shuffled_instance(&spec, &w0, NoiseSpec::Sigma(0.0), Seed(11))?;
    let set = sm_d2_analytic(&ds, None)?;
    for (i, c) in set.candidates.iter().enumerate() {
        println!(
            "candidate {i}: {:?}  check loss {:.3e}  error {:.2e}",
            c.weights.as_slice(),
            c.loss,
            relative_error(&c.weights, &w0)?
        );
    }
    println!("chosen: {:?}", set.best().weights.as_slice());
    Ok(())
}
