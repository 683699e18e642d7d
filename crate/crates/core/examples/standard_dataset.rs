//! The dataset protocol on a bundled table: shuffle within R blocks and
//! recover the ordinary least squares fit. The negative control fits with
//! labels from an unrelated shuffle and should fail.

use shufreg::bench::{bundled_dataset, negative_control, standard_dataset_protocol, StandardConfig};

fn main() -> shufreg::Result<()> {
    let ds = bundled_dataset("synthetic1")?;
    let mut cfg = StandardConfig::new(1);
    cfg.r_values = vec![1, 4, 8];
    cfg.trials = 5;
    let real = standard_dataset_protocol("synthetic1", &ds, &cfg)?;
    let control = negative_control("synthetic1", &ds, &cfg)?;
    for (a, b) in real.iter().zip(&control) {
        println!("R = {}: error {:.3}  control {:.3}", a.r, a.mean_error, b.mean_error);
    }
    Ok(())
}
