//! With many features and one replication the projection hybrids search a
//! low-dimensional direction and solve the rest in closed form.

use shufreg::synth::{shuffled_instance, GaussianDesignSpec, NoiseSpec};
use shufreg::{estimate, relative_error, EstimatorChoice, EstimatorKind, Seed};

fn main() -> shufreg::Result<()> {
    let w0 = [1.0, -0.5, 0.8, 0.3, -1.2];
    let spec = GaussianDesignSpec::isotropic(256, w0.len(), 1.0, 1.0);
    let (ds, _) = shuffled_instance(&spec, &w0, NoiseSpec::SnrDb(15.0), Seed(21))?;
    for kind in [EstimatorKind::Sm, EstimatorKind::P1, EstimatorKind::P2, EstimatorKind::Ls] {
        let fit = estimate(&ds, &EstimatorChoice::new(kind))?;
        println!(
            "{:>3}: error {:.3}  evaluations {}",
            kind.name(),
            relative_error(&fit.weights, &w0)?,
            fit.evaluations
        );
    }
    Ok(())
}
