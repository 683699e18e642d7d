//! Distances between two sorted samples.

/// Sort ascending under the IEEE total order.
pub fn sort_ascending(v: &mut [f64]) {
    v.sort_unstable_by(f64::total_cmp);
}

/// `Σ (a_i - b_i)²` over equal-length sorted vectors.
pub fn sorted_sq_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// One-dimensional earth mover's distance between two equal-size samples,
/// `(1/n) Σ |a_(i) - b_(i)|`.
pub fn emd_sorted(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// Two-sample Kolmogorov–Smirnov statistic `sup_t |F_a(t) - F_b(t)|` by a
/// merge scan over the joint support. Ties inside and across samples are
/// consumed together so the ECDFs are compared only at support points.
pub fn ks_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (m, n) = (a.len(), b.len());
    if m == 0 || n == 0 {
        return if m == n { 0.0 } else { 1.0 };
    }
    let (mut i, mut j) = (0usize, 0usize);
    let mut stat: f64 = 0.0;
    while i < m && j < n {
        let t = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < m && a[i] <= t {
            i += 1;
        }
        while j < n && b[j] <= t {
            j += 1;
        }
        stat = stat.max((i as f64 / m as f64 - j as f64 / n as f64).abs());
    }
    stat
}

/// Squared distance between the `count` smallest entries of two sorted vectors.
pub fn small_d_sorted(a: &[f64], b: &[f64], count: usize) -> f64 {
    sorted_sq_distance(&a[..count], &b[..count])
}
