//! Splitting the rows into independently shuffled blocks adds moment
//! equations, which is what lets the moment estimator handle more features.

use shufreg::bench::{replication_curve, ReplicationConfig};

fn main() -> shufreg::Result<()> {
    let cfg = ReplicationConfig {
        d: 3,
        n: 600,
        w0: vec![1.0, -1.0, 0.5],
        mean: 1.0,
        std: 1.0,
        nsr_db: vec![-20.0],
        r_values: vec![1, 3, 9],
        trials: 3,
        seed: 5,
        loss_spec: None,
        fit_config: Default::default(),
    };
    for row in replication_curve(&cfg)? {
        println!("R = {:>2}: mean error {:.3} (sd {:.3})", row.r, row.mean_error, row.std_error);
    }
    Ok(())
}
