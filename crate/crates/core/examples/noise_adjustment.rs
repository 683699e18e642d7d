//! Folding known Gaussian noise moments into the moment loss removes the
//! bias that noise adds to the label moments.

use shufreg::losses::gaussian_noise_moments;
use shufreg::synth::{shuffled_instance, GaussianDesignSpec, NoiseSpec};
use shufreg::{estimate, relative_error, EstimatorChoice, EstimatorKind, LossSpec, Seed};

fn main() -> shufreg::Result<()> {
    let w0 = [1.0, -0.5];
    let spec = GaussianDesignSpec::isotropic(5000, 2, 1.0, 1.0);
    let (ds, sigma) = shuffled_instance(&spec, &w0, NoiseSpec::NsrDb(0.0), Seed(3))?;
    println!("noise std {sigma:.3}");

    let plain = EstimatorChoice::new(EstimatorKind::Sm).with_loss_spec(LossSpec::sm().with_k(2));
    let adjusted = EstimatorChoice::new(EstimatorKind::Sm)
        .with_loss_spec(LossSpec::sm().with_k(2).with_noise_moments(gaussian_noise_moments(sigma, 2)));
    for (name, choice) in [("plain", plain), ("noise-adjusted", adjusted)] {
        let fit = estimate(&ds, &choice)?;
        println!("{name:>15}: {:?}  error {:.3}", fit.weights.as_slice(), relative_error(&fit.weights, &w0)?);
    }
    Ok(())
}
