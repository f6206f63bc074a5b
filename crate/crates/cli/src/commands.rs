//! Subcommand implementations: each validates its parameters, runs the
//! corresponding library operation, writes its output file, and prints a
//! one-line JSON summary (the only place wall-clock data appears).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use orihc_core::complete::{exact_sigma_path, randomized_sigma_path, CompletionInstance};
use orihc_core::count::{brute_count, expected_copies, sis_count_cycles, threshold_probe};
use orihc_core::embed::{
    check_param_window, embed_path, estimate_event_probs, EmbedParams, DEFAULT_PANEL_SIZE,
};
use orihc_core::graph::Digraph;
use orihc_core::orient::Orientation;
use orihc_core::pack::{pack_cycles, verify_packing, PackParams};
use orihc_core::randgen::{near_regular_host, sample_dnp, ExposureOracle};
use orihc_core::rng::{derive_seed, stream_rng, trial_stream};
use orihc_core::stats::{empirical_tail_check, submartingale_tail_bound, EventModel};

use crate::patterns::PatternSource;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ALGORITHM_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            std::fs::write(p, content).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

fn summary_line(mut value: serde_json::Value) {
    if let Some(obj) = value.as_object_mut() {
        obj.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    }
    println!("{value}");
}

// ---------------------------------------------------------------- gen

pub struct GenArgs {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

pub fn run_gen(args: GenArgs) -> Result<i32> {
    if !(0.0..=1.0).contains(&args.p) {
        bail!("p = {} outside [0, 1]", args.p);
    }
    let start = Instant::now();
    let g = sample_dnp(args.n, args.p, args.seed);
    write_output(args.out.as_deref(), &g.to_text())?;
    if args.out.is_some() {
        summary_line(json!({
            "command": "gen",
            "n": args.n,
            "p": args.p,
            "seed": args.seed,
            "edges": g.edge_count(),
            "wall_ms": start.elapsed().as_millis() as u64,
            "timestamp": timestamp(),
        }));
    }
    Ok(EXIT_OK)
}

// -------------------------------------------------------------- embed

pub struct EmbedArgs {
    pub n: usize,
    pub expose_prob: f64,
    pub path_len: usize,
    pub degree_slack: usize,
    pub sigma: PatternSource,
    pub trials: u64,
    pub seed: u64,
    pub panel: usize,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct EmbedRow {
    trial: u64,
    result: &'static str,
    rounds: usize,
    exposures: usize,
    failed_round: Option<usize>,
}

pub fn run_embed(args: EmbedArgs) -> Result<i32> {
    if args.degree_slack == 0 || args.degree_slack >= args.n {
        bail!("degree slack must lie in [1, n)");
    }
    if !(0.0 < args.expose_prob && args.expose_prob <= 1.0) {
        bail!("exposure probability must lie in (0, 1]");
    }
    let start = Instant::now();
    let host = near_regular_host(args.n, args.degree_slack - 1, derive_seed(args.seed, HOST_TAG));
    let pattern = args.sigma.materialize(args.path_len - 1, 1, args.seed)?.remove(0);
    let params = EmbedParams::new(args.path_len, pattern)?;

    let rows: Vec<EmbedRow> = (0..args.trials)
        .into_par_iter()
        .map(|trial| {
            let mut oracle =
                ExposureOracle::new(args.expose_prob, args.seed, trial_stream(trial, 0));
            let mut rng = stream_rng(args.seed, trial_stream(trial, 1));
            let trace = embed_path(&host, &params, &mut oracle, &mut rng)
                .expect("embed parameters validated");
            EmbedRow {
                trial,
                result: if trace.succeeded() { "success" } else { "failure" },
                rounds: trace.rounds_completed,
                exposures: trace.exposures.len(),
                failed_round: trace.failed_round(),
            }
        })
        .collect();

    let mut csv = csv::WriterBuilder::new().from_writer(Vec::new());
    for row in &rows {
        csv.serialize(row)?;
    }
    let content = String::from_utf8(csv.into_inner()?)?;
    write_output(args.out.as_deref(), &content)?;

    let report = estimate_event_probs(
        &host,
        &params,
        args.expose_prob,
        args.trials,
        args.panel,
        args.seed,
        2.576,
    )?;
    let window = check_param_window(
        args.n,
        args.path_len,
        args.degree_slack,
        args.expose_prob,
        orihc_core::embed::DEFAULT_WINDOW_SLACK,
    );
    summary_line(json!({
        "command": "embed",
        "n": args.n,
        "ell": args.path_len,
        "delta": args.degree_slack,
        "p_ex": args.expose_prob,
        "trials": args.trials,
        "failure_rate": report.failure.estimate,
        "max_exposed": {
            "pair": report.max_exposed.pair,
            "estimate": report.max_exposed.exposed.estimate,
            "wilson_lo": report.max_exposed.exposed.lo,
            "wilson_hi": report.max_exposed.exposed.hi,
        },
        "max_avoided": {
            "pair": report.max_avoided.pair,
            "estimate": report.max_avoided.avoided.estimate,
            "wilson_lo": report.max_avoided.avoided.lo,
            "wilson_hi": report.max_avoided.avoided.hi,
        },
        "window": window.ok().map(|w| json!({
            "lower": w.lower, "upper": w.upper, "in_window": w.in_window(),
        })),
        "wall_ms": start.elapsed().as_millis() as u64,
        "timestamp": timestamp(),
    }));
    Ok(EXIT_OK)
}

const HOST_TAG: u64 = 0x4855;

// --------------------------------------------------------------- pack

pub struct PackArgs {
    pub n: usize,
    pub p: f64,
    pub epsilon: f64,
    pub t: Option<usize>,
    pub sigmas: PatternSource,
    pub seed: u64,
    pub runs: u64,
    pub out: Option<PathBuf>,
}

fn run_line(
    run: u64,
    patterns: &[Orientation],
    params: &PackParams,
    run_seed: u64,
    n: usize,
) -> serde_json::Value {
    match pack_cycles(patterns, params, run_seed) {
        Ok(result) => {
            let verify = verify_packing(&result, patterns, n);
            json!({
                "run": run,
                "success": verify.ok,
                "verify_issues": verify.issues,
                "cycles": result.cycles.iter().map(|c| c.edges()).collect::<Vec<_>>(),
                "ledger": {
                    "max_reveals": result.ledger.max_reveals(),
                    "max_queries": result.ledger.max_queries(),
                    "max_window_rounds": result.ledger.max_window_count(),
                    "window_bound": result.diagnostics.window_rounds_bound,
                    "window_bound_violations": result.diagnostics.window_bound_violations,
                    "budget": params.exposure_budget(),
                },
                "coupling_ok": result.diagnostics.coupling_ok,
                "warnings": result.diagnostics.warnings,
                "failure": serde_json::Value::Null,
            })
        }
        Err(err) => json!({
            "run": run,
            "success": false,
            "failure": { "kind": err.kind(), "detail": err.to_string() },
        }),
    }
}

pub fn run_pack(args: PackArgs) -> Result<i32> {
    let start = Instant::now();
    let mut params = PackParams::new(args.n, args.p, args.epsilon)?;
    if let Some(t) = args.t {
        params.t = t;
    }
    // Runs are independent; parallelize across seeds and keep the
    // output ordered by run index.
    let run_patterns: Vec<_> = (0..args.runs)
        .map(|run| args.sigmas.materialize(args.n, params.t, derive_seed(args.seed, run)))
        .collect::<Result<_>>()?;
    let lines: Vec<serde_json::Value> = run_patterns
        .into_par_iter()
        .enumerate()
        .map(|(run, patterns)| {
            let run = run as u64;
            let run_seed = derive_seed(args.seed, run);
            let t0 = Instant::now();
            let mut line = run_line(run, &patterns, &params, run_seed, args.n);
            line["wall_ms"] = json!(t0.elapsed().as_millis() as u64);
            line
        })
        .collect();
    let successes = lines.iter().filter(|l| l["success"] == json!(true)).count() as u64;
    // Timings vary run to run; keep them out of the reproducible rows.
    let rows: String = lines
        .iter()
        .map(|l| {
            let mut l = l.clone();
            l.as_object_mut().unwrap().remove("wall_ms");
            format!("{l}\n")
        })
        .collect();
    write_output(args.out.as_deref(), &rows)?;

    summary_line(json!({
        "command": "pack",
        "n": args.n,
        "p": args.p,
        "epsilon": args.epsilon,
        "t": params.t,
        "ell": params.path_len,
        "p_ex": params.expose_prob,
        "p1": params.stage1_prob,
        "p2": params.stage2_prob,
        "runs": args.runs,
        "successes": successes,
        "per_run_wall_ms": lines.iter().map(|l| l["wall_ms"].clone()).collect::<Vec<_>>(),
        "wall_ms": start.elapsed().as_millis() as u64,
        "timestamp": timestamp(),
    }));
    Ok(if successes > 0 || args.runs == 0 || params.t == 0 {
        EXIT_OK
    } else {
        EXIT_ALGORITHM_FAILED
    })
}

// -------------------------------------------------------------- count

pub struct CountArgs {
    pub n: usize,
    pub p: f64,
    pub sigma: PatternSource,
    pub samples: u64,
    pub seed: u64,
    pub exact: bool,
    pub out: Option<PathBuf>,
}

pub fn run_count(args: CountArgs) -> Result<i32> {
    if !(0.0..=1.0).contains(&args.p) {
        bail!("p = {} outside [0, 1]", args.p);
    }
    let start = Instant::now();
    let pattern = args.sigma.materialize(args.n, 1, args.seed)?.remove(0);
    let d = sample_dnp(args.n, args.p, derive_seed(args.seed, HOST_TAG));
    let mut report = sis_count_cycles(&d, &pattern, args.samples, args.seed)?;
    if args.exact {
        report.exact = Some(brute_count(&d, &pattern)?);
    }
    report.formula = Some(expected_copies(args.n, args.p, &pattern));

    let mut csv = csv::WriterBuilder::new().from_writer(Vec::new());
    csv.write_record(["estimate", "std_error", "samples", "closed", "symmetries", "exact", "formula"])?;
    csv.write_record([
        format!("{}", report.estimate),
        format!("{}", report.std_error),
        format!("{}", report.samples),
        format!("{}", report.closed),
        format!("{}", report.symmetries),
        report.exact.map(|e| e.to_string()).unwrap_or_default(),
        format!("{}", report.formula.unwrap()),
    ])?;
    write_output(args.out.as_deref(), &String::from_utf8(csv.into_inner()?)?)?;

    summary_line(json!({
        "command": "count",
        "n": args.n,
        "p": args.p,
        "sigma": pattern.to_string(),
        "estimate": report.estimate,
        "std_error": report.std_error,
        "exact": report.exact,
        "formula": report.formula,
        "wall_ms": start.elapsed().as_millis() as u64,
        "timestamp": timestamp(),
    }));
    Ok(EXIT_OK)
}

// ---------------------------------------------------------- complete

pub struct CompleteArgs {
    pub graph: PathBuf,
    pub a: usize,
    pub b: usize,
    pub sigma: String,
    pub budget: u64,
    pub seed: u64,
}

pub fn run_complete(args: CompleteArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.graph)
        .with_context(|| format!("reading graph {}", args.graph.display()))?;
    let host = Digraph::from_text(&text)?;
    let pattern = Orientation::parse(&args.sigma)?;
    let window: Vec<usize> = (0..host.vertex_count()).collect();
    let inst = CompletionInstance::new(&host, &window, args.a, args.b, pattern)?;
    let found = if inst.window_size() <= 22 {
        exact_sigma_path(&inst)?
    } else {
        randomized_sigma_path(&inst, args.budget, args.seed)
    };
    match found {
        Some(path) => {
            let words: Vec<String> = path.vertices().iter().map(|v| v.to_string()).collect();
            println!("{}", words.join(" "));
            Ok(EXIT_OK)
        }
        None => {
            println!("NONE");
            Ok(EXIT_ALGORITHM_FAILED)
        }
    }
}

// --------------------------------------------------------- threshold

pub struct ThresholdArgs {
    pub n: usize,
    pub c_list: Vec<f64>,
    pub sigma: PatternSource,
    pub trials: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

pub fn run_threshold(args: ThresholdArgs) -> Result<i32> {
    let start = Instant::now();
    let pattern = args.sigma.materialize(args.n, 1, args.seed)?.remove(0);
    let points = threshold_probe(args.n, &args.c_list, &pattern, args.trials, args.seed)?;
    let mut csv = csv::WriterBuilder::new().from_writer(Vec::new());
    csv.write_record(["c", "p", "trials", "hits", "probability"])?;
    for pt in &points {
        csv.write_record([
            format!("{}", pt.c),
            format!("{}", pt.p),
            format!("{}", pt.trials),
            format!("{}", pt.hits),
            format!("{}", pt.probability()),
        ])?;
    }
    write_output(args.out.as_deref(), &String::from_utf8(csv.into_inner()?)?)?;
    summary_line(json!({
        "command": "threshold",
        "n": args.n,
        "sigma": pattern.to_string(),
        "trials": args.trials,
        "probabilities": points.iter().map(|p| p.probability()).collect::<Vec<_>>(),
        "wall_ms": start.elapsed().as_millis() as u64,
        "timestamp": timestamp(),
    }));
    Ok(EXIT_OK)
}

// -------------------------------------------------------- bound-check

pub struct BoundCheckArgs {
    pub model: String,
    pub steps: usize,
    pub q: f64,
    pub m_list: Vec<f64>,
    pub runs: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

pub fn parse_event_model(spec: &str) -> Result<EventModel> {
    Ok(match spec {
        "iid" => EventModel::Iid,
        "parity" => EventModel::SuccessParity,
        other => {
            let Some(path) = other.strip_prefix("adaptive:") else {
                bail!("unknown model {other:?}: use iid, parity, or adaptive:<file>");
            };
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading schedule {path}"))?;
            let factors: Vec<f64> = text
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| anyhow::anyhow!("bad factor {t:?}: {e}")))
                .collect::<Result<_>>()?;
            EventModel::Schedule(factors)
        }
    })
}

pub fn run_bound_check(args: BoundCheckArgs) -> Result<i32> {
    if !(0.0..=1.0).contains(&args.q) {
        bail!("q = {} outside [0, 1]", args.q);
    }
    let start = Instant::now();
    let model = parse_event_model(&args.model)?;
    let mut csv = csv::WriterBuilder::new().from_writer(Vec::new());
    csv.write_record([
        "model", "steps", "q", "m", "runs", "exceedances", "empirical", "bound", "threshold",
        "within_bound", "wilson_lo", "wilson_hi",
    ])?;
    let mut all_ok = true;
    for (idx, &m) in args.m_list.iter().enumerate() {
        let report = empirical_tail_check(
            &model,
            args.steps,
            args.q,
            m,
            args.runs,
            derive_seed(args.seed, idx as u64),
        )?;
        all_ok &= report.within_bound;
        csv.write_record([
            args.model.clone(),
            format!("{}", args.steps),
            format!("{}", args.q),
            format!("{m}"),
            format!("{}", report.runs),
            format!("{}", report.exceedances),
            format!("{}", report.empirical),
            format!("{}", report.bound),
            format!("{}", report.threshold),
            format!("{}", report.within_bound),
            format!("{}", report.wilson.lo),
            format!("{}", report.wilson.hi),
        ])?;
    }
    write_output(args.out.as_deref(), &String::from_utf8(csv.into_inner()?)?)?;
    summary_line(json!({
        "command": "bound-check",
        "model": args.model,
        "steps": args.steps,
        "q": args.q,
        "all_within_bound": all_ok,
        "spot_check": submartingale_tail_bound(100, 0.1, 1.0, 10.0).ok(),
        "wall_ms": start.elapsed().as_millis() as u64,
        "timestamp": timestamp(),
    }));
    Ok(if all_ok { EXIT_OK } else { EXIT_ALGORITHM_FAILED })
}

pub fn timestamp() -> String {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .unwrap_or_default();
    format!("{}", now.as_secs())
}

pub fn default_panel() -> usize {
    DEFAULT_PANEL_SIZE
}
