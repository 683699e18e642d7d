//! Sweep sample size and dimension and report which estimator wins each cell.

use shufreg::bench::{run_sweep, winner_map, SweepGrid};
use shufreg::EstimatorKind;

fn main() -> shufreg::Result<()> {
    let grid = SweepGrid::new(
        vec![64, 256],
        vec![1, 2, 4],
        vec![EstimatorKind::Sm, EstimatorKind::P1, EstimatorKind::Ls],
        3,
        42,
    );
    let cells = run_sweep(&grid)?;
    println!("{:>5} {:>3} {:>6} {:>8} bucket", "n", "d", "winner", "error");
    for w in winner_map(&cells) {
        println!("{:>5} {:>3} {:>6} {:>8.3} {:?}", w.n, w.d, w.winner, w.mean_error, w.bucket);
    }
    Ok(())
}
