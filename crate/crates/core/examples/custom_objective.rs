//! The multi-start optimizer works on any objective, not only the built-in losses.

use shufreg::optim::{multistart_descent, FnObjective};
use shufreg::FitConfig;

fn main() -> shufreg::Result<()> {
    // two basins; the deeper one is at (2, -1)
    let f = FnObjective::new(2, |w: &[f64]| {
        let a = (w[0] - 2.0).powi(2) + (w[1] + 1.0).powi(2);
        let b = (w[0] + 1.0).powi(2) + (w[1] - 1.0).powi(2) + 0.5;
        a.min(b)
    });
    let cfg = FitConfig { starts: 8, record_trace: true, ..FitConfig::default() };
    let fit = multistart_descent(&f, &cfg)?;
    println!("best {:?} loss {:.2e} from start {}", fit.weights.as_slice(), fit.loss, fit.start_index);
    for (i, t) in fit.loss_trace.iter().flatten().enumerate() {
        println!("start {i}: {} iterations, final {:.3e}", t.len(), t.last().unwrap_or(&f64::NAN));
    }
    Ok(())
}
