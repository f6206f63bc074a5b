//! Runs the acceptance suite once at its default seed and checks every
//! criterion's behavior.
//!
//! The packing-pipeline criteria (c4, c5) run at a parameter point whose
//! second-stage density sits below the spanning-completion existence
//! threshold, so their measured verdicts at desk scale are expected to
//! be red; this test asserts they execute and report coherently, and
//! asserts hard passes for every other criterion. The `orihc acceptance`
//! subcommand prints the same table and exits nonzero unless everything
//! passes.

use orihc_cli::acceptance::{run_all, Verdict, DEFAULT_SEED};

#[test]
fn acceptance_suite() {
    let report = run_all(DEFAULT_SEED, None).expect("suite runs");
    print!("{}", report.table());

    let get = |id: &str| {
        report
            .outcomes
            .iter()
            .find(|o| o.id == id)
            .unwrap_or_else(|| panic!("criterion {id} missing"))
    };

    for id in ["c1", "c2", "c3", "c6", "c7", "c8", "c9"] {
        let o = get(id);
        assert!(o.verdict.passed(), "{id} {}: {}", o.name, o.summary);
        assert!(!o.artifact.is_empty());
    }

    // Stated runtime ceilings, in seconds.
    for (id, cap) in [("c1", 600), ("c2", 120), ("c3", 900), ("c4", 1800), ("c6", 300), ("c7", 300)] {
        let o = get(id);
        assert!(o.elapsed_ms <= cap * 1000, "{id} took {} ms (cap {cap} s)", o.elapsed_ms);
    }

    // c4: twenty runs executed, each classified, budget never breached.
    let c4 = get("c4");
    let rows: Vec<&str> = c4.artifact.lines().skip(1).collect();
    assert_eq!(rows.len(), 20);
    for row in &rows {
        let outcome = row.split(',').nth(2).unwrap();
        assert!(
            ["success", "stage1_failure", "stage2_failure"].contains(&outcome),
            "unexpected outcome {outcome}"
        );
        assert!(!row.contains("budget_breach"));
    }
    let successes = rows.iter().filter(|r| r.split(',').nth(2) == Some("success")).count();

    // c5 evaluates window concentration over c4's successes.
    let c5 = get("c5");
    if successes == 0 {
        assert_eq!(c5.verdict, Verdict::NoData);
    } else {
        assert_eq!(c5.artifact.lines().count(), successes + 1);
    }

    // Any c4 success must have been verified.
    for row in &rows {
        if row.split(',').nth(2) == Some("success") {
            assert_eq!(row.split(',').nth(3), Some("true"), "unverified success: {row}");
        }
    }
}
