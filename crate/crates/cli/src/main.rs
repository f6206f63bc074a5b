use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};

use orihc_cli::commands::{self, EXIT_USAGE};
use orihc_cli::config::ExperimentConfig;
use orihc_cli::patterns::PatternSource;

/// Experiments with arbitrarily oriented Hamilton cycles in random
/// digraphs: generation, path embedding, edge-disjoint packing, cycle
/// counting, path completion, threshold probing, and tail-bound checks.
#[derive(Parser)]
#[command(name = "orihc", version, max_term_width = 100)]
struct Cli {
    /// Flat key = value config file; explicit flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores; env ORIHC_THREADS overrides).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample D(n, p) and write it in the digraph text format.
    Gen(GenCli),
    /// Run the path-embedding algorithm repeatedly and tabulate events.
    Embed(EmbedCli),
    /// Pack edge-disjoint oriented Hamilton cycles.
    Pack(PackCli),
    /// Estimate the number of copies of an oriented cycle.
    Count(CountCli),
    /// Find a pattern path between two endpoints spanning a window.
    Complete(CompleteCli),
    /// Empirical existence probability across p = (ln n + c)/n.
    Threshold(ThresholdCli),
    /// Check empirical tails against the submartingale bound.
    BoundCheck(BoundCheckCli),
    /// Run the full acceptance suite and print its pass/fail table.
    Acceptance(AcceptanceCli),
}

#[derive(Args)]
struct GenCli {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EmbedCli {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "p-ex")]
    p_ex: Option<f64>,
    /// Path length in vertices.
    #[arg(long)]
    ell: Option<usize>,
    /// Degree slack: the host is the complete digraph minus delta-1
    /// random permutation digraphs, so its semi-degree is >= n - delta.
    #[arg(long)]
    delta: Option<usize>,
    /// consistent | antidirected | random | file:<path>
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monitored-pair panel size.
    #[arg(long)]
    panel: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PackCli {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// "auto" (from (1-eps) n p) or an explicit count.
    #[arg(long)]
    t: Option<String>,
    /// consistent | antidirected | random | file:<path>
    #[arg(long)]
    sigmas: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CountCli {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also run the exact counter (refused for n > 10).
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompleteCli {
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    /// Pattern string over +/-, one sign per edge.
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ThresholdCli {
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated offsets c; p = (ln n + c)/n.
    #[arg(long = "c-list", allow_hyphen_values = true)]
    c_list: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundCheckCli {
    /// iid | parity | adaptive:<file of q-multipliers>
    #[arg(long)]
    model: Option<String>,
    /// Number of process steps.
    #[arg(long = "N", visible_alias = "steps")]
    steps: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    /// Tail offset(s), comma separated.
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AcceptanceCli {
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for per-criterion artifacts.
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
}

/// Resolve a value from flag, then config, then default.
fn resolve<T>(flag: Option<T>, cfg: Result<Option<T>>, default: Option<T>, key: &str) -> Result<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(v) = cfg? {
        return Ok(v);
    }
    default.ok_or_else(|| anyhow!("missing required parameter {key:?} (flag or config)"))
}

fn parse_float_list(spec: &str, key: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = spec
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("bad {key} entry {t:?}: {e}")))
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(anyhow!("{key} must be nonempty"));
    }
    Ok(values)
}

const DEFAULT_SEED: u64 = 1;

fn dispatch(cli: Cli) -> Result<i32> {
    let cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(),
    };

    match cli.command {
        Command::Gen(a) => commands::run_gen(commands::GenArgs {
            n: resolve(a.n, cfg.usize_of("n"), None, "n")?,
            p: resolve(a.p, cfg.probability_of("p"), None, "p")?,
            seed: resolve(a.seed, cfg.u64_of("seed"), Some(DEFAULT_SEED), "seed")?,
            out: a.out.or_else(|| cfg.string_of("out").map(PathBuf::from)),
        }),
        Command::Embed(a) => {
            let n = resolve(a.n, cfg.usize_of("n"), None, "n")?;
            commands::run_embed(commands::EmbedArgs {
                n,
                expose_prob: resolve(a.p_ex, cfg.probability_of("p_ex"), None, "p_ex")?,
                path_len: resolve(a.ell, cfg.usize_of("ell"), None, "ell")?,
                degree_slack: resolve(a.delta, cfg.usize_of("delta"), Some(1), "delta")?,
                sigma: PatternSource::parse(&resolve(
                    a.sigma,
                    Ok(cfg.string_of("sigma")),
                    Some("random".into()),
                    "sigma",
                )?)?,
                trials: resolve(a.trials, cfg.u64_of("trials"), Some(100), "trials")?,
                seed: resolve(a.seed, cfg.u64_of("seed"), Some(DEFAULT_SEED), "seed")?,
                panel: resolve(
                    a.panel,
                    cfg.usize_of("panel"),
                    Some(commands::default_panel()),
                    "panel",
                )?,
                out: a.out.or_else(|| cfg.string_of("out").map(PathBuf::from)),
            })
        }
        Command::Pack(a) => {
            let t_spec = resolve(a.t, Ok(cfg.string_of("t")), Some("auto".into()), "t")?;
            let t = match t_spec.as_str() {
                "auto" => None,
                other => Some(other.parse::<usize>().map_err(|e| anyhow!("bad t {other:?}: {e}"))?),
            };
            commands::run_pack(commands::PackArgs {
                n: resolve(a.n, cfg.usize_of("n"), None, "n")?,
                p: resolve(a.p, cfg.probability_of("p"), None, "p")?,
                epsilon: resolve(a.epsilon, cfg.f64_of("epsilon"), None, "epsilon")?,
                t,
                sigmas: PatternSource::parse(&resolve(
                    a.sigmas,
                    Ok(cfg.string_of("sigmas")),
                    Some("random".into()),
                    "sigmas",
                )?)?,
                seed: resolve(a.seed, cfg.u64_of("seed"), Some(DEFAULT_SEED), "seed")?,
                runs: resolve(a.runs, cfg.u64_of("runs"), Some(1), "runs")?,
                out: a.out.or_else(|| cfg.string_of("out").map(PathBuf::from)),
            })
        }
        Command::Count(a) => commands::run_count(commands::CountArgs {
            n: resolve(a.n, cfg.usize_of("n"), None, "n")?,
            p: resolve(a.p, cfg.probability_of("p"), None, "p")?,
            sigma: PatternSource::parse(&resolve(
                a.sigma,
                Ok(cfg.string_of("sigma")),
                Some("random".into()),
                "sigma",
            )?)?,
            samples: resolve(a.samples, cfg.u64_of("samples"), Some(10_000), "samples")?,
            seed: resolve(a.seed, cfg.u64_of("seed"), Some(DEFAULT_SEED), "seed")?,
            exact: a.exact || cfg.raw("exact") == Some("true"),
            out: a.out.or_else(|| cfg.string_of("out").map(PathBuf::from)),
        }),
        Command::Complete(a) => commands::run_complete(commands::CompleteArgs {
            graph: a
                .graph
                .or_else(|| cfg.string_of("graph").map(PathBuf::from))
                .ok_or_else(|| anyhow!("missing required parameter \"graph\""))?,
            a: resolve(a.a, cfg.usize_of("a"), None, "a")?,
            b: resolve(a.b, cfg.usize_of("b"), None, "b")?,
            sigma: resolve(a.sigma, Ok(cfg.string_of("sigma")), None, "sigma")?,
            budget: resolve(a.budget, cfg.u64_of("budget"), Some(1_000_000), "budget")?,
            seed: resolve(a.seed, cfg.u64_of("seed"), Some(DEFAULT_SEED), "seed")?,
        }),
        Command::Threshold(a) => commands::run_threshold(commands::ThresholdArgs {
            n: resolve(a.n, cfg.usize_of("n"), None, "n")?,
            c_list: parse_float_list(
                &resolve(a.c_list, Ok(cfg.string_of("c_list")), None, "c_list")?,
                "c_list",
            )?,
            sigma: PatternSource::parse(&resolve(
                a.sigma,
                Ok(cfg.string_of("sigma")),
                Some("random".into()),
                "sigma",
            )?)?,
            trials: resolve(a.trials, cfg.u64_of("trials"), Some(200), "trials")?,
            seed: resolve(a.seed, cfg.u64_of("seed"), Some(DEFAULT_SEED), "seed")?,
            out: a.out.or_else(|| cfg.string_of("out").map(PathBuf::from)),
        }),
        Command::BoundCheck(a) => commands::run_bound_check(commands::BoundCheckArgs {
            model: resolve(a.model, Ok(cfg.string_of("model")), Some("iid".into()), "model")?,
            steps: resolve(a.steps, cfg.usize_of("steps"), None, "N")?,
            q: resolve(a.q, cfg.probability_of("q"), None, "q")?,
            m_list: parse_float_list(&resolve(a.m, Ok(cfg.string_of("m")), None, "m")?, "m")?,
            runs: resolve(a.runs, cfg.u64_of("runs"), Some(1000), "runs")?,
            seed: resolve(a.seed, cfg.u64_of("seed"), Some(DEFAULT_SEED), "seed")?,
            out: a.out.or_else(|| cfg.string_of("out").map(PathBuf::from)),
        }),
        Command::Acceptance(a) => {
            let seed = resolve(
                a.seed,
                cfg.u64_of("seed"),
                Some(orihc_cli::acceptance::DEFAULT_SEED),
                "seed",
            )?;
            let out_dir = a
                .out_dir
                .or_else(|| cfg.string_of("out_dir").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("acceptance-out"));
            let report = orihc_cli::acceptance::run_all(seed, Some(&out_dir))?;
            print!("{}", report.table());
            println!(
                "acceptance: {} of {} criteria passed (seed {seed}, artifacts in {})",
                report.outcomes.iter().filter(|o| o.verdict.passed()).count(),
                report.outcomes.len(),
                out_dir.display()
            );
            Ok(if report.all_passed() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli
        .threads
        .or_else(|| std::env::var("ORIHC_THREADS").ok().and_then(|s| s.parse().ok()))
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
