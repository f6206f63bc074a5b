//! Statistical behavior of the completion solvers on random windows.

use rand::Rng;
use rayon::prelude::*;

use orihc_core::complete::{exact_sigma_path, randomized_sigma_path, CompletionInstance};
use orihc_core::orient::Orientation;
use orihc_core::randgen::{near_regular_host, sample_subdigraph};
use orihc_core::rng::stream_rng;

fn random_instance(w: usize, p: f64, seed: u64) -> CompletionInstance {
    let g = near_regular_host(w, 2, 7_000 + seed);
    assert!(g.semi_degree() >= w - 3);
    let host = sample_subdigraph(&g, p, 8_000 + seed);
    let mut rng = stream_rng(9_000, seed);
    let a = rng.gen_range(0..w);
    let b = (a + 1 + rng.gen_range(0..w - 1)) % w;
    let pattern = Orientation::random(w - 1, &mut rng);
    CompletionInstance::from_compact(host, a, b, pattern).unwrap()
}

/// Dense-window rendering of the completion guarantee: windows of 16
/// and 20 vertices on hosts with semi-degree >= |W| - 3 at edge
/// probability min(1, 6 ln|W| / |W|) admit a spanning pattern path in
/// at least 95% of instances, found exactly by the DP.
#[test]
fn dense_windows_complete_with_high_frequency() {
    for w in [16usize, 20] {
        let p = (6.0 * (w as f64).ln() / w as f64).min(1.0);
        let total = 300u64;
        let solved: u64 = (0..total)
            .into_par_iter()
            .map(|seed| {
                let inst = random_instance(w, p, seed);
                let found = exact_sigma_path(&inst).unwrap();
                if let Some(path) = &found {
                    assert!(path.is_in(inst.host()));
                }
                found.is_some() as u64
            })
            .sum();
        assert!(
            solved * 100 >= total * 95,
            "w={w}: only {solved}/{total} solvable"
        );
    }
}

/// The budgeted randomized solver succeeds on almost all dense
/// half-probability windows of 40 vertices, and never emits a path the
/// validator rejects.
#[test]
fn randomized_solver_succeeds_on_dense_windows() {
    let w = 40usize;
    let total = 200u64;
    let solved: u64 = (0..total)
        .into_par_iter()
        .map(|seed| {
            let g = near_regular_host(w, 1, 17_000 + seed);
            let host = sample_subdigraph(&g, 0.5, 18_000 + seed);
            let mut rng = stream_rng(19_000, seed);
            let a = rng.gen_range(0..w);
            let b = (a + 1 + rng.gen_range(0..w - 1)) % w;
            let pattern = Orientation::random(w - 1, &mut rng);
            let inst = CompletionInstance::from_compact(host.clone(), a, b, pattern).unwrap();
            match randomized_sigma_path(&inst, 1_000_000, 20_000 + seed) {
                Some(path) => {
                    assert!(path.is_in(&host), "seed {seed} returned an invalid path");
                    assert_eq!((path.first(), path.last()), (a, b));
                    let mut vs = path.vertices().to_vec();
                    vs.sort_unstable();
                    assert_eq!(vs, (0..w).collect::<Vec<_>>(), "path must span the window");
                    1
                }
                None => 0,
            }
        })
        .sum();
    assert!(solved * 100 >= total * 95, "{solved}/{total} solved");
}

/// Against the exact solver on mid-density windows the randomized
/// search never claims a path where none exists.
#[test]
fn randomized_none_matches_exact_none() {
    let mut unsat_seen = 0;
    for seed in 0..150u64 {
        let inst = random_instance(12, 0.25, 30_000 + seed);
        let exact = exact_sigma_path(&inst).unwrap();
        let randomized = randomized_sigma_path(&inst, 300_000, 31_000 + seed);
        if exact.is_none() {
            unsat_seen += 1;
            assert!(randomized.is_none(), "seed {seed}: false positive");
        }
    }
    assert!(unsat_seen >= 10, "want unsatisfiable instances in the mix");
}
