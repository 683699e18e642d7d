//! Order-invariant losses against brute-force references.

use proptest::prelude::*;
use shufreg::losses::{emd_loss, ks_loss, ls_loss, small_d_loss, sm_loss};
use shufreg::{Dataset, LossSpec};

/// Every permutation of `0..n` (Heap's algorithm).
fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, a, out);
            let j = if k % 2 == 0 { i } else { 0 };
            a.swap(j, k - 1);
        }
    }
    let mut out = Vec::new();
    heap(n, &mut (0..n).collect(), &mut out);
    out
}

fn min_over_assignments(z: &[f64], y: &[f64], cost: impl Fn(f64, f64) -> f64) -> f64 {
    permutations(z.len())
        .iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| cost(z[i], y[j])).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

fn predictions(rows: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    rows.iter().map(|r| r.iter().zip(w).map(|(a, b)| a * b).sum()).collect()
}

fn naive_ks(a: &[f64], b: &[f64]) -> f64 {
    let cdf = |s: &[f64], t: f64| s.iter().filter(|&&v| v <= t).count() as f64 / s.len() as f64;
    a.iter()
        .chain(b)
        .map(|&t| (cdf(a, t) - cdf(b, t)).abs())
        .fold(0.0, f64::max)
}

fn instance() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
    (1usize..=6, 1usize..=3).prop_flat_map(|(n, d)| {
        (
            prop::collection::vec(prop::collection::vec(-5.0f64..5.0, d), n),
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(-3.0f64..3.0, d),
        )
    })
}

#[test]
fn heap_enumerates_all() {
    let mut p = permutations(4);
    assert_eq!(p.len(), 24);
    p.sort();
    p.dedup();
    assert_eq!(p.len(), 24);
}

proptest! {
    #[test]
    fn ls_is_min_over_permutations((rows, y, w) in instance()) {
        let ds = Dataset::from_rows(&rows, y.clone()).unwrap();
        let z = predictions(&rows, &w);
        let brute = min_over_assignments(&z, &y, |a, b| (a - b) * (a - b));
        let fast = ls_loss(&ds, &w);
        prop_assert!((fast - brute).abs() <= 1e-12 * brute.max(1.0), "{fast} vs {brute}");
    }

    #[test]
    fn emd_is_min_cost_assignment((rows, y, w) in instance()) {
        let ds = Dataset::from_rows(&rows, y.clone()).unwrap();
        let z = predictions(&rows, &w);
        let brute = min_over_assignments(&z, &y, |a, b| (a - b).abs()) / y.len() as f64;
        prop_assert!((emd_loss(&ds, &w) - brute).abs() <= 1e-12 * brute.max(1.0));
    }

    #[test]
    fn ks_matches_naive_scan((rows, y, w) in instance()) {
        let ds = Dataset::from_rows(&rows, y.clone()).unwrap();
        let z = predictions(&rows, &w);
        prop_assert!((ks_loss(&ds, &w) - naive_ks(&z, &y)).abs() < 1e-15);
    }

    #[test]
    fn ks_with_ties((a, b) in (prop::collection::vec(0i32..4, 1..8), prop::collection::vec(0i32..4, 1..8))) {
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        let (mut sa, mut sb) = (a.clone(), b.clone());
        sa.sort_by(f64::total_cmp);
        sb.sort_by(f64::total_cmp);
        prop_assert!((shufreg::losses::ks_sorted(&sa, &sb) - naive_ks(&a, &b)).abs() < 1e-15);
    }

    #[test]
    fn small_d_uses_smallest_entries((rows, y, w) in instance(), frac in 0.0f64..1.0) {
        let ds = Dataset::from_rows(&rows, y.clone()).unwrap();
        let count = 1 + ((y.len() - 1) as f64 * frac) as usize;
        let mut z = predictions(&rows, &w);
        let mut ys = y.clone();
        z.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        let expect: f64 = (0..count).map(|i| (z[i] - ys[i]).powi(2)).sum();
        let got = small_d_loss(&ds, &w, count).unwrap();
        prop_assert!((got - expect).abs() <= 1e-12 * expect.max(1.0));
    }

    #[test]
    fn sm_matches_naive_moments((rows, y, w) in instance(), k in 1usize..=4) {
        let ds = Dataset::from_rows(&rows, y.clone()).unwrap();
        let z = predictions(&rows, &w);
        let n = y.len() as f64;
        let mut expect = 0.0;
        let mut fact = 1.0;
        for i in 1..=k {
            fact *= i as f64;
            let mz = z.iter().map(|v| v.powi(i as i32)).sum::<f64>() / n;
            let my = y.iter().map(|v| v.powi(i as i32)).sum::<f64>() / n;
            expect += (mz - my).powi(2) / fact;
        }
        let got = sm_loss(&ds, &w, &LossSpec::sm().with_k(k)).unwrap();
        prop_assert!((got - expect).abs() <= 1e-9 * expect.max(1.0), "{got} vs {expect}");
    }

    /// With replications, the sorted loss is the sum of per-block minima.
    #[test]
    fn ls_with_blocks((rows, y, w) in instance(), split in 0usize..6) {
        let n = y.len();
        let cut = split.min(n);
        let ids: Vec<usize> = (0..n).map(|i| usize::from(i >= cut && cut > 0)).collect();
        let x = nalgebra::DMatrix::from_fn(n, w.len(), |i, j| rows[i][j]);
        let ds = Dataset::with_replications(x, y.clone(), ids).unwrap();
        let z = predictions(&rows, &w);
        let brute = if cut == 0 || cut == n {
            min_over_assignments(&z, &y, |a, b| (a - b) * (a - b))
        } else {
            min_over_assignments(&z[..cut], &y[..cut], |a, b| (a - b) * (a - b))
                + min_over_assignments(&z[cut..], &y[cut..], |a, b| (a - b) * (a - b))
        };
        prop_assert!((ls_loss(&ds, &w) - brute).abs() <= 1e-12 * brute.max(1.0));
    }
}
