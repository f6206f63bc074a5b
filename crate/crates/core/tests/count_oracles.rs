//! Counting estimators against exact oracles and closed forms.

use orihc_core::count::{
    brute_count, brute_count_paths, brute_flagged_path_stats, expected_copies, sample_f_path,
    sis_count_cycles, PoolFloor,
};
use orihc_core::orient::Orientation;
use orihc_core::randgen::sample_dnp;
use orihc_core::rng::stream_rng;

/// Averaging the exact copy count over many digraphs reproduces the
/// closed-form expectation (n!/sym) p^n within 10%.
#[test]
fn expectation_matches_monte_carlo_average() {
    let n = 6;
    let p = 0.5;
    let pattern = Orientation::consistent(n);
    let formula = expected_copies(n, p, &pattern);
    assert!((formula - 1.875).abs() < 1e-12);
    let mut total = 0u64;
    let digraphs = 500u64;
    for seed in 0..digraphs {
        let d = sample_dnp(n, p, 71_000 + seed);
        total += brute_count(&d, &pattern).unwrap();
    }
    let average = total as f64 / digraphs as f64;
    assert!(
        (average - formula).abs() <= 0.1 * formula,
        "average {average} vs formula {formula}"
    );
}

/// SIS estimates agree with brute-force counts across random patterns
/// and digraphs (three standard errors).
#[test]
fn sis_tracks_brute_force_across_instances() {
    let mut checked = 0;
    for seed in 0..10u64 {
        let n = 7;
        let d = sample_dnp(n, 0.4, 9_100 + seed);
        let pattern = Orientation::random(n, &mut stream_rng(9_200, seed));
        let exact = brute_count(&d, &pattern).unwrap();
        let report = sis_count_cycles(&d, &pattern, 40_000, 9_300 + seed).unwrap();
        let slack = 3.0 * report.std_error + 1e-9;
        assert!(
            (report.estimate - exact as f64).abs() <= slack,
            "seed {seed}: {} vs {exact}",
            report.estimate
        );
        checked += (exact > 0) as usize;
    }
    assert!(checked >= 2, "want some nonzero instances");
}

/// The path sampler's mean weight is the number of pattern-path
/// sequences; checked against exhaustive enumeration.
#[test]
fn path_sampler_unbiased_for_path_sequences() {
    let n = 7;
    let ell = 5;
    let d = sample_dnp(n, 0.5, 777);
    let pattern = Orientation::random(ell - 1, &mut stream_rng(778, 0));
    let exact = brute_count_paths(&d, &pattern, ell, None).unwrap();
    let samples = 50_000u64;
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for t in 0..samples {
        let mut rng = stream_rng(779, t);
        let w = sample_f_path(&d, &pattern, ell, PoolFloor::NONE, &mut rng).weight();
        sum += w;
        sum_sq += w * w;
    }
    let mean = sum / samples as f64;
    let se = (((sum_sq - sum * sum / samples as f64) / (samples as f64 - 1.0)).max(0.0)
        / samples as f64)
        .sqrt();
    assert!(
        (mean - exact as f64).abs() <= 3.0 * se + 1e-9,
        "mean {mean} vs exact {exact} (se {se})"
    );
}

/// Pool-floor flag frequency at the counting stage's own scale: with
/// n = 400 and the alpha = 6, eps = 0.75 parameterization, at least
/// 95% of samples keep every round's pool above its floor.
#[test]
fn pool_floor_flag_is_frequent_at_scale() {
    let n = 400usize;
    let alpha = 6.0f64;
    let eps = 0.75f64;
    let lnln = (n as f64).ln().ln();
    let p = (alpha * alpha * lnln * (n as f64).ln() / n as f64).min(1.0);
    let p1 = (1.0 - eps) * p;
    let ell = n - (n as f64 / (alpha * lnln)).ceil() as usize;
    let d = sample_dnp(n, p1, 31_337);
    let pattern = Orientation::random(ell - 1, &mut stream_rng(1, 0));
    let total = 2_000u64;
    let mut flagged = 0u64;
    for t in 0..total {
        let mut rng = stream_rng(5, t);
        let s = sample_f_path(&d, &pattern, ell, PoolFloor { eps, p1 }, &mut rng);
        if s.log_weight.is_some() && s.rounds_ok {
            flagged += 1;
        }
    }
    let rate = flagged as f64 / total as f64;
    assert!(rate >= 0.95, "flag rate {rate}");
}

/// Rearranging the sampler's per-path probability bound gives, for
/// every digraph, count >= mass * (1-eps)^(l-1) p1^(l-1) (n)_l where
/// mass is the exact probability that a sampled path respects every
/// pool floor. The floor-free asymptotic form (1-eps)^l (n)_l p1^l
/// (which additionally pretends mass ~ 1) holds in most but not all
/// small digraphs; its frequency is pinned as a regression floor.
#[test]
fn flagged_path_count_beats_lower_bound() {
    for n in [5usize, 6, 7] {
        let ell = n - 2;
        let p = 0.6f64;
        let eps = 0.3f64;
        let falling: f64 = (0..ell).map(|i| (n - i) as f64).product();
        let asymptotic = (1.0 - eps).powi(ell as i32) * falling * p.powi(ell as i32);
        let mut asymptotic_hits = 0;
        for seed in 0..100u64 {
            let d = sample_dnp(n, p, 50_000 + seed);
            let pattern = Orientation::random(ell - 1, &mut stream_rng(50_500, seed));
            let floor = PoolFloor { eps, p1: p };
            let (count, mass) = brute_flagged_path_stats(&d, &pattern, ell, floor).unwrap();
            assert_eq!(count, brute_count_paths(&d, &pattern, ell, Some(floor)).unwrap());
            let exact_bound = mass * (1.0 - eps).powi(ell as i32 - 1) * falling * p.powi(ell as i32 - 1);
            assert!(
                count as f64 >= exact_bound - 1e-9,
                "n={n} seed {seed}: count {count} below exact bound {exact_bound}"
            );
            if count as f64 >= asymptotic {
                asymptotic_hits += 1;
            }
        }
        assert!(
            asymptotic_hits >= 70,
            "n={n}: asymptotic bound met in only {asymptotic_hits}/100 digraphs"
        );
    }
}

/// Degenerate pattern lengths and caps are rejected, not mangled.
#[test]
fn oracle_input_validation() {
    let d = sample_dnp(5, 0.5, 1);
    assert!(brute_count(&d, &Orientation::consistent(4)).is_err());
    assert!(sis_count_cycles(&d, &Orientation::consistent(4), 10, 1).is_err());
    assert!(brute_count_paths(&d, &Orientation::consistent(4), 6, None).is_err());
}
