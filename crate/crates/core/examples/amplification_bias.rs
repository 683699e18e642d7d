//! Sorted least squares overshoots the truth when the labels are noisy;
//! matching moments does not.

use shufreg::synth::{shuffled_instance, GaussianDesignSpec, NoiseSpec};
use shufreg::theory::{ls_limit_d1, PopulationSpec};
use shufreg::{estimate, EstimatorChoice, EstimatorKind, Seed};

fn main() -> shufreg::Result<()> {
    let spec = GaussianDesignSpec::isotropic(5000, 1, 1.0, 1.0);
    let limit = ls_limit_d1(&PopulationSpec::new(1.0, 1.0, 1.0, 1.0)?)?;
    println!("w0 = 1, noise std 1; sorted LS converges to {limit:.4}");
    for t in 0..5 {
        let (ds, _) = shuffled_instance(&spec, &[1.0], NoiseSpec::Sigma(1.0), Seed(7).index(t))?;
        let ls = estimate(&ds, &EstimatorChoice::new(EstimatorKind::Ls))?;
        let sm = estimate(&ds, &EstimatorChoice::new(EstimatorKind::Sm))?;
        println!("trial {t}: LS {:.4}  SM {:.4}", ls.weights[0], sm.weights[0]);
    }
    Ok(())
}
