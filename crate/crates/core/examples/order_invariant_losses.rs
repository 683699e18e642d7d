//! Every loss in the library depends only on the multiset of labels, so
//! shuffling the labels leaves it unchanged.

use shufreg::losses::{evaluate, LossKind};
use shufreg::synth::{generate_design, sample_permutation, GaussianDesignSpec};
use shufreg::{Dataset, LossSpec, Seed};

fn main() -> shufreg::Result<()> {
    let x = generate_design(&GaussianDesignSpec::isotropic(50, 2, 0.5, 1.0), Seed(1))?;
    let w = [0.7, -0.2];
    let z = shufreg::data::predict(&x, &w);
    let perm = sample_permutation(z.len(), Seed(2));
    let ordered = Dataset::new(x.clone(), z.iter().map(|v| v + 0.1).collect())?;
    let shuffled = Dataset::new(x, perm.iter().map(|&i| z[i] + 0.1).collect())?;

    let specs = [
        LossSpec::ls(),
        LossSpec::sm(),
        LossSpec::new(LossKind::Emd),
        LossSpec::new(LossKind::Ks),
        LossSpec::new(LossKind::SmallD).with_small_d(10),
    ];
    for spec in specs {
        let a = evaluate(&ordered, &w, &spec)?;
        let b = evaluate(&shuffled, &w, &spec)?;
        println!("{:>7}: ordered {a:.6}  shuffled {b:.6}", spec.kind.name());
    }
    Ok(())
}
