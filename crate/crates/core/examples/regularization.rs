//! A ridge penalty keeps the moment estimator from wandering off when most
//! true weights are zero.

use shufreg::bench::sparse_weights;
use shufreg::synth::{shuffled_instance, GaussianDesignSpec, NoiseSpec};
use shufreg::{estimate, relative_error, EstimatorChoice, EstimatorKind, FitConfig, LossSpec, Seed};

fn main() -> shufreg::Result<()> {
    let w0 = sparse_weights(6);
    let spec = GaussianDesignSpec::isotropic(1000, w0.len(), 1.0, 1.0);
    let (ds, _) = shuffled_instance(&spec, &w0, NoiseSpec::NsrDb(-20.0), Seed(9))?;
    println!("truth {w0:?}");
    for lambda in [0.0, 0.01, 0.1] {
        let choice = EstimatorChoice::new(EstimatorKind::Sm)
            .with_loss_spec(LossSpec::sm().with_k(2).with_lambda2(lambda))
            .with_fit_config(FitConfig { starts: 4, ..FitConfig::default() });
        let fit = estimate(&ds, &choice)?;
        println!("lambda {lambda:<5} error {:.3}", relative_error(&fit.weights, &w0)?);
    }
    Ok(())
}
