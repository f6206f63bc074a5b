//! Randomized oriented-path embedding with full event instrumentation.
//!
//! The algorithm grows a pattern path one vertex per round. In round `i`
//! it shuffles the vertices not yet on the path, then walks that order,
//! exposing the pattern-oriented pair (head, candidate) through the
//! oracle; the first candidate whose coin lands true AND whose pair lies
//! in the host digraph is appended. A round that exhausts its candidates
//! fails the run.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bits::BitSet;
use crate::graph::Digraph;
use crate::orient::{Orientation, OrientedPath};
use crate::randgen::ExposureOracle;
use crate::rng::{stream_rng, trial_stream};
use crate::stats::{wilson_interval, WilsonInterval};
use crate::Error;

#[derive(Debug, Clone)]
pub struct EmbedParams {
    /// Target number of path vertices.
    pub path_len: usize,
    /// Pattern over the path's `path_len - 1` edges.
    pub pattern: Orientation,
}

impl EmbedParams {
    pub fn new(path_len: usize, pattern: Orientation) -> Result<Self, Error> {
        if path_len < 2 {
            return Err(Error::InvalidArgument("path needs at least 2 vertices".into()));
        }
        if pattern.len() != path_len - 1 {
            return Err(Error::Malformed(format!(
                "pattern length {} does not match {} edges",
                pattern.len(),
                path_len - 1
            )));
        }
        Ok(EmbedParams { path_len, pattern })
    }
}

/// One oracle query made by the algorithm.
#[derive(Debug, Clone, Copy)]
pub struct ExposureEvent {
    /// Round in which the query happened (1-based; round i picks vertex i+1).
    pub round: u32,
    /// The directed pair that was exposed.
    pub pair: (u32, u32),
    /// Coin outcome.
    pub edge: bool,
    /// Whether the pair also lies in the host digraph.
    pub in_host: bool,
    /// Whether this query sampled a fresh coin (false on memo hits).
    pub fresh: bool,
}

#[derive(Debug, Clone)]
pub enum EmbedOutcome {
    Success(OrientedPath),
    /// 1-based round that exhausted its candidate pool.
    Failure { round: usize },
}

#[derive(Debug, Clone)]
pub struct EmbeddingTrace {
    pub outcome: EmbedOutcome,
    pub exposures: Vec<ExposureEvent>,
    /// Vertices placed, in order; on failure this is the partial path.
    pub placed: Vec<usize>,
    pub rounds_completed: usize,
    pub host_n: usize,
    pub host_semi_degree: usize,
    pub expose_prob: f64,
}

impl EmbeddingTrace {
    pub fn succeeded(&self) -> bool {
        matches!(self.outcome, EmbedOutcome::Success(_))
    }

    pub fn failed_round(&self) -> Option<usize> {
        match self.outcome {
            EmbedOutcome::Failure { round } => Some(round),
            _ => None,
        }
    }

    pub fn path(&self) -> Option<&OrientedPath> {
        match &self.outcome {
            EmbedOutcome::Success(p) => Some(p),
            _ => None,
        }
    }

    /// Exposures that were accepted (coin true and pair in host); one per
    /// completed round.
    pub fn accepted_exposures(&self) -> usize {
        self.exposures.iter().filter(|e| e.edge && e.in_host).count()
    }

    /// Vertices on the path other than its two ends. On failure the
    /// partial path's last placed vertex stands in for the end.
    pub fn interior(&self) -> &[usize] {
        if self.placed.len() <= 2 {
            &[]
        } else {
            &self.placed[1..self.placed.len() - 1]
        }
    }
}

/// Run the embedding algorithm once. The oracle may be shared across
/// runs (its memo then couples them); `rng` drives the start vertex and
/// the per-round candidate shuffles.
pub fn embed_path(
    host: &Digraph,
    params: &EmbedParams,
    oracle: &mut ExposureOracle,
    rng: &mut impl Rng,
) -> Result<EmbeddingTrace, Error> {
    let n = host.vertex_count();
    if params.path_len > n {
        return Err(Error::InvalidArgument(format!(
            "path length {} exceeds host order {n}",
            params.path_len
        )));
    }
    let mut exposures = Vec::new();
    let mut placed_set = BitSet::new(n);
    let mut placed = Vec::with_capacity(params.path_len);

    let start = rng.gen_range(0..n);
    placed.push(start);
    placed_set.insert(start);

    for round in 1..params.path_len {
        let head = *placed.last().unwrap();
        let sign = params.pattern.sign(round - 1);
        let mut pool = placed_set.complement_indices();
        pool.shuffle(rng);

        let mut accepted = None;
        for y in pool {
            let (u, v) = sign.directed(head, y);
            let exposure = oracle.expose(u, v)?;
            let in_host = host.has_edge(u, v);
            exposures.push(ExposureEvent {
                round: round as u32,
                pair: (u as u32, v as u32),
                edge: exposure.edge,
                in_host,
                fresh: exposure.fresh,
            });
            if exposure.edge && in_host {
                accepted = Some(y);
                break;
            }
        }

        match accepted {
            Some(y) => {
                placed.push(y);
                placed_set.insert(y);
            }
            None => {
                return Ok(EmbeddingTrace {
                    outcome: EmbedOutcome::Failure { round },
                    exposures,
                    placed,
                    rounds_completed: round - 1,
                    host_n: n,
                    host_semi_degree: host.semi_degree(),
                    expose_prob: oracle.expose_prob(),
                });
            }
        }
    }

    let path = OrientedPath::new(placed.clone(), params.pattern.clone())?;
    Ok(EmbeddingTrace {
        outcome: EmbedOutcome::Success(path),
        exposures,
        placed,
        rounds_completed: params.path_len - 1,
        host_n: n,
        host_semi_degree: host.semi_degree(),
        expose_prob: oracle.expose_prob(),
    })
}

/// The parameter window under which the embedding analysis guarantees
/// apply: `log n / (n - l - Delta)` must sit well below the exposure
/// probability, which must sit well below both
/// `(n - l)^2 / (n^2 Delta)` and `1 / sqrt(n Delta)`.
#[derive(Debug, Clone, Copy)]
pub struct WindowReport {
    pub lower: f64,
    pub upper: f64,
    pub expose_prob: f64,
    /// expose_prob / lower; flagged when below `slack`.
    pub ratio_lower: f64,
    /// upper / expose_prob; flagged when below `slack`.
    pub ratio_upper: f64,
    pub slack: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

impl WindowReport {
    pub fn in_window(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

pub const DEFAULT_WINDOW_SLACK: f64 = 4.0;

pub fn check_param_window(
    n: usize,
    path_len: usize,
    degree_slack: usize,
    expose_prob: f64,
    slack: f64,
) -> Result<WindowReport, Error> {
    if n <= path_len + degree_slack {
        return Err(Error::InvalidArgument(format!(
            "lower endpoint undefined: n - l - Delta = {} - {} - {} <= 0",
            n, path_len, degree_slack
        )));
    }
    let nf = n as f64;
    let gap = (n - path_len) as f64;
    let delta = degree_slack.max(1) as f64;
    let lower = nf.ln() / (nf - path_len as f64 - degree_slack as f64);
    let upper = (gap * gap / (nf * nf * delta)).min(1.0 / (nf * delta).sqrt());
    Ok(WindowReport {
        lower,
        upper,
        expose_prob,
        ratio_lower: expose_prob / lower,
        ratio_upper: upper / expose_prob,
        slack,
        lower_ok: expose_prob / lower >= slack,
        upper_ok: upper / expose_prob >= slack,
    })
}

/// Probability estimates for one monitored pair.
#[derive(Debug, Clone, Copy)]
pub struct PairStats {
    pub pair: (usize, usize),
    /// The pair was exposed at some point during a run.
    pub exposed: WilsonInterval,
    /// Both endpoints avoided the path interior.
    pub avoided: WilsonInterval,
}

#[derive(Debug, Clone)]
pub struct EventProbReport {
    pub trials: u64,
    pub failure: WilsonInterval,
    pub panel: Vec<PairStats>,
    pub max_exposed: PairStats,
    pub max_avoided: PairStats,
}

pub const DEFAULT_PANEL_SIZE: usize = 200;

/// Monte Carlo estimate of the failure probability and, over a fixed
/// random panel of directed pairs, of the per-pair exposure and
/// interior-avoidance probabilities. One fresh oracle per trial; trials
/// run in parallel on per-trial streams.
pub fn estimate_event_probs(
    host: &Digraph,
    params: &EmbedParams,
    expose_prob: f64,
    trials: u64,
    panel_size: usize,
    seed: u64,
    wilson_z: f64,
) -> Result<EventProbReport, Error> {
    use rayon::prelude::*;

    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let n = host.vertex_count();
    let panel = sample_panel(n, panel_size, seed);
    let index: std::collections::HashMap<(u32, u32), usize> = panel
        .iter()
        .enumerate()
        .map(|(i, &(u, v))| ((u as u32, v as u32), i))
        .collect();

    let zero = || (0u64, vec![0u64; panel.len()], vec![0u64; panel.len()]);
    let (failures, exposed, avoided) = (0..trials)
        .into_par_iter()
        .fold(
            zero,
            |(mut f, mut e, mut a), trial| {
                let mut oracle =
                    ExposureOracle::new(expose_prob, seed, trial_stream(trial, ORACLE_ROLE));
                let mut rng = stream_rng(seed, trial_stream(trial, SHUFFLE_ROLE));
                let trace = embed_path(host, params, &mut oracle, &mut rng)
                    .expect("embed preconditions checked");
                if !trace.succeeded() {
                    f += 1;
                }
                let mut seen = vec![false; panel.len()];
                for ev in &trace.exposures {
                    if let Some(&i) = index.get(&ev.pair) {
                        if !seen[i] {
                            seen[i] = true;
                            e[i] += 1;
                        }
                    }
                }
                let mut interior = BitSet::new(n);
                for &v in trace.interior() {
                    interior.insert(v);
                }
                for (i, &(u, v)) in panel.iter().enumerate() {
                    if !interior.contains(u) && !interior.contains(v) {
                        a[i] += 1;
                    }
                }
                (f, e, a)
            },
        )
        .reduce(zero, |(f1, e1, a1), (f2, e2, a2)| {
            (
                f1 + f2,
                e1.iter().zip(&e2).map(|(x, y)| x + y).collect(),
                a1.iter().zip(&a2).map(|(x, y)| x + y).collect(),
            )
        });

    let stats: Vec<PairStats> = panel
        .iter()
        .enumerate()
        .map(|(i, &pair)| PairStats {
            pair,
            exposed: wilson_interval(exposed[i], trials, wilson_z),
            avoided: wilson_interval(avoided[i], trials, wilson_z),
        })
        .collect();
    let max_exposed = *stats
        .iter()
        .max_by(|a, b| a.exposed.estimate.total_cmp(&b.exposed.estimate))
        .expect("panel nonempty");
    let max_avoided = *stats
        .iter()
        .max_by(|a, b| a.avoided.estimate.total_cmp(&b.avoided.estimate))
        .expect("panel nonempty");

    Ok(EventProbReport {
        trials,
        failure: wilson_interval(failures, trials, wilson_z),
        panel: stats,
        max_exposed,
        max_avoided,
    })
}

const ORACLE_ROLE: u64 = 0;
const SHUFFLE_ROLE: u64 = 1;
const PANEL_STREAM: u64 = u64::MAX - 1;

fn sample_panel(n: usize, panel_size: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = stream_rng(seed, PANEL_STREAM);
    let mut seen = std::collections::HashSet::new();
    let mut panel = Vec::with_capacity(panel_size);
    let cap = panel_size.min(n * (n - 1));
    while panel.len() < cap {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && seen.insert((u, v)) {
            panel.push((u, v));
        }
    }
    panel
}
