//! Distributional checks on the random digraph models.

use orihc_core::graph::Digraph;
use orihc_core::randgen::{sample_dnp, sample_subdigraph, split_k};

/// Subsampling the complete digraph at p is the same model as sampling
/// D(n, p) directly: two-sample test on edge counts at n = 50, p = 0.3.
#[test]
fn subdigraph_of_complete_matches_direct_model() {
    let n = 50;
    let p = 0.3;
    let complete = Digraph::complete(n);
    let runs = 300u64;
    let direct: Vec<f64> =
        (0..runs).map(|s| sample_dnp(n, p, 90_000 + s).edge_count() as f64).collect();
    let via_sub: Vec<f64> = (0..runs)
        .map(|s| sample_subdigraph(&complete, p, 91_000 + s).edge_count() as f64)
        .collect();

    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let var = |xs: &[f64], m: f64| xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0);
    let (m1, m2) = (mean(&direct), mean(&via_sub));
    let (v1, v2) = (var(&direct, m1), var(&via_sub, m2));
    // Welch z-statistic; both samples should share the Binomial(n(n-1), p) law.
    let z = (m1 - m2).abs() / ((v1 + v2) / runs as f64).sqrt();
    assert!(z < 4.0, "edge-count means differ: {m1} vs {m2} (z = {z:.2})");

    let expected_mean = (n * (n - 1)) as f64 * p;
    assert!((m1 - expected_mean).abs() < 4.0 * (v1 / runs as f64).sqrt() + 1e-9);
}

/// Each part of a k-way split of D(n, p) has Binomial(n(n-1), p/k) edge
/// counts: chi-square over standardized part counts, 500 seeds.
#[test]
fn split_part_sizes_match_binomial() {
    let n = 60;
    let p = 0.6;
    let k = 3;
    let pairs = (n * (n - 1)) as f64;
    let mu = pairs * p / k as f64;
    let sigma = (pairs * (p / k as f64) * (1.0 - p / k as f64)).sqrt();

    let seeds = 500u64;
    let mut chi2 = 0.0;
    let mut count = 0usize;
    for seed in 0..seeds {
        let d = sample_dnp(n, p, 70_000 + seed);
        for part in split_k(&d, k, 71_000 + seed) {
            let z = (part.edge_count() as f64 - mu) / sigma;
            chi2 += z * z;
            count += 1;
        }
    }
    assert_eq!(count, 1500);
    // Sum of 1500 squared standard-normal-ish terms; the multinomial
    // constraint within a seed only shrinks it. 0.999 quantiles of
    // chi-square with 1500 df are roughly 1500 +/- 170.
    assert!(chi2 < 1673.0, "chi2 = {chi2:.1}");
    assert!(chi2 > 1330.0, "chi2 = {chi2:.1} suspiciously small");
}
