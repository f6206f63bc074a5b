//! Two-stage pipeline packing edge-disjoint copies of arbitrarily
//! oriented Hamilton cycles.
//!
//! Stage 1 embeds a long subpath of each requested cycle into the
//! complete digraph minus previously used edges, exposing coins through
//! one shared oracle so each directed pair is revealed at most once.
//! Stage 2 draws a second sparse digraph, assigns each of its edges to
//! one eligible completion window, and closes every path into its cycle
//! inside the assigned edges.

use rand::Rng;
use rayon::prelude::*;

use crate::complete::{exact_sigma_path, randomized_sigma_path, CompletionInstance};
use crate::embed::{embed_path, EmbedParams, EmbeddingTrace};
use crate::graph::Digraph;
use crate::orient::{Orientation, OrientedCycle, OrientedPath, Sign};
use crate::randgen::{sample_dnp, ExposureOracle};
use crate::rng::{derive_seed, stream_rng};
use crate::Error;

#[derive(Debug, Clone)]
pub struct PackParams {
    pub n: usize,
    pub p: f64,
    pub eps: f64,
    /// Number of cycles to pack.
    pub t: usize,
    /// Stage-1 subpath length in vertices.
    pub path_len: usize,
    /// Stage-1 per-pair exposure probability; must not exceed `stage1_prob`
    /// or the revealed digraph can no longer be coupled below it.
    pub expose_prob: f64,
    /// p1 = (1 - eps/2) p.
    pub stage1_prob: f64,
    /// p2 with (1 - p1)(1 - p2) = 1 - p.
    pub stage2_prob: f64,
    pub alpha: f64,
    /// Degree-loss bookkeeping: stage-1 hosts satisfy
    /// semi-degree >= n - degree_slack with degree_slack = 2t.
    pub degree_slack: usize,
    /// Windows at most this size use the exact DP completion solver.
    pub solver_dp_max: usize,
    /// Step budget for the randomized completion solver.
    pub solver_budget: u64,
}

impl PackParams {
    /// Desk-scale defaults. The asymptotic prescriptions (alpha from
    /// (np / log^3 n)^(1/3), exposure alpha^2 log^2 n / n, window
    /// n / (alpha log n)) degenerate at n in the hundreds: alpha is
    /// clamped to at least 1.1, the exposure probability is capped at
    /// 0.8 p1 so a single revealed coin stays within the stage-1 budget,
    /// and the completion window is widened until late embedding rounds
    /// keep a workable candidate pool. Every field can be overridden.
    pub fn new(n: usize, p: f64, eps: f64) -> Result<Self, Error> {
        if n < 4 {
            return Err(Error::InvalidArgument("need n >= 4".into()));
        }
        if !(0.0 < p && p <= 1.0) {
            return Err(Error::InvalidArgument("p must lie in (0, 1]".into()));
        }
        if !(0.0 < eps && eps < 1.0) {
            return Err(Error::InvalidArgument("eps must lie in (0, 1)".into()));
        }
        let nf = n as f64;
        let ln_n = nf.ln();
        let t = ((1.0 - eps) * nf * p).floor() as usize;
        let alpha = (nf * p / ln_n.powi(3)).cbrt().max(1.1);
        let stage1_prob = (1.0 - eps / 2.0) * p;
        let stage2_prob = if stage1_prob >= 1.0 {
            1.0
        } else {
            (p - stage1_prob) / (1.0 - stage1_prob)
        };
        let expose_prob = (alpha * alpha * ln_n * ln_n / nf).min(0.9 * stage1_prob);
        let window = (nf / (alpha * ln_n)).ceil().max((12.0 / expose_prob).ceil()) as usize;
        let path_len = n.saturating_sub(window).max(2);
        let params = PackParams {
            n,
            p,
            eps,
            t,
            path_len,
            expose_prob,
            stage1_prob,
            stage2_prob,
            alpha,
            degree_slack: 2 * t,
            solver_dp_max: 22,
            solver_budget: 200_000,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.path_len < 2 || self.path_len >= self.n {
            return Err(Error::InvalidArgument(format!(
                "path length {} must lie in [2, n)",
                self.path_len
            )));
        }
        for (name, v) in [
            ("expose_prob", self.expose_prob),
            ("stage1_prob", self.stage1_prob),
            ("stage2_prob", self.stage2_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!("{name}={v} outside [0,1]")));
            }
        }
        let recombined = self.stage1_prob + self.stage2_prob - self.stage1_prob * self.stage2_prob;
        if (recombined - self.p).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "p1 + p2 - p1 p2 = {recombined} does not recombine to p = {}",
                self.p
            )));
        }
        Ok(())
    }

    /// The stage-1 per-pair exposure budget p1 / p_ex.
    pub fn exposure_budget(&self) -> f64 {
        self.stage1_prob / self.expose_prob
    }

    /// Completion window size |W_i| = n - path_len + 2.
    pub fn window_size(&self) -> usize {
        self.n - self.path_len + 2
    }

    /// The bound of stage-1 property (c): (1 + eps) t ((n - l)/n)^2.
    pub fn window_rounds_bound(&self) -> f64 {
        let gap = (self.n - self.path_len) as f64 / self.n as f64;
        (1.0 + self.eps) * self.t as f64 * gap * gap
    }
}

/// Per-pair counters accumulated over the stage-1 rounds.
///
/// With the shared oracle each directed pair's coin is flipped at most
/// once, so `reveal_rounds` (rounds that freshly revealed the pair) is
/// the quantity the coupling argument budgets: the pair's total
/// probability of entering the revealed digraph is
/// expose_prob * reveals <= p1. `query_rounds` additionally counts
/// rounds that re-read the memo, for diagnostics.
#[derive(Debug, Clone)]
pub struct ExposureLedger {
    n: usize,
    reveal_rounds: Vec<u16>,
    query_rounds: Vec<u16>,
    last_query_round: Vec<u16>,
    window_rounds: Vec<u16>,
    completed_rounds: usize,
}

impl ExposureLedger {
    pub fn new(n: usize) -> Self {
        ExposureLedger {
            n,
            reveal_rounds: vec![0; n * n],
            query_rounds: vec![0; n * n],
            last_query_round: vec![u16::MAX; n * n],
            window_rounds: vec![0; n * (n - 1) / 2],
            completed_rounds: 0,
        }
    }

    #[inline]
    fn pair_idx(&self, u: usize, v: usize) -> usize {
        u * self.n + v
    }

    #[inline]
    fn unordered_idx(&self, u: usize, v: usize) -> usize {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        // Triangular index over pairs a < b.
        a * self.n - a * (a + 1) / 2 + (b - a - 1)
    }

    fn note_query(&mut self, round: usize, u: usize, v: usize, fresh: bool) {
        let idx = self.pair_idx(u, v);
        if fresh {
            self.reveal_rounds[idx] += 1;
        }
        if self.last_query_round[idx] != round as u16 {
            self.last_query_round[idx] = round as u16;
            self.query_rounds[idx] += 1;
        }
    }

    fn note_window(&mut self, interior: &[usize]) {
        let mut inside = vec![false; self.n];
        for &v in interior {
            inside[v] = true;
        }
        for u in 0..self.n {
            if inside[u] {
                continue;
            }
            for (v, &v_inside) in inside.iter().enumerate().skip(u + 1) {
                if !v_inside {
                    let idx = self.unordered_idx(u, v);
                    self.window_rounds[idx] += 1;
                }
            }
        }
        self.completed_rounds += 1;
    }

    pub fn reveals(&self, u: usize, v: usize) -> u16 {
        self.reveal_rounds[self.pair_idx(u, v)]
    }

    pub fn queries(&self, u: usize, v: usize) -> u16 {
        self.query_rounds[self.pair_idx(u, v)]
    }

    /// Number of completed rounds whose completion window contains both
    /// endpoints.
    pub fn window_count(&self, u: usize, v: usize) -> u16 {
        self.window_rounds[self.unordered_idx(u, v)]
    }

    pub fn max_reveals(&self) -> u16 {
        self.reveal_rounds.iter().copied().max().unwrap_or(0)
    }

    pub fn max_queries(&self) -> u16 {
        self.query_rounds.iter().copied().max().unwrap_or(0)
    }

    pub fn max_window_count(&self) -> u16 {
        self.window_rounds.iter().copied().max().unwrap_or(0)
    }

    pub fn completed_rounds(&self) -> usize {
        self.completed_rounds
    }

    /// Pairs whose window count exceeds `bound`.
    pub fn window_bound_violations(&self, bound: f64) -> usize {
        self.window_rounds.iter().filter(|&&y| y as f64 > bound).count()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PackError {
    #[error("stage 1 embedding failed for cycle {cycle} in round {round}")]
    Stage1Embed { cycle: usize, round: usize },
    #[error("exposure budget breached at pair ({u},{v}): {count} reveals exceed budget {budget:.3}")]
    BudgetBreach { u: usize, v: usize, count: u16, budget: f64 },
    #[error("stage 2 completion failed for cycle {cycle} (window size {window})")]
    Completion { cycle: usize, window: usize },
    #[error(transparent)]
    Invalid(#[from] Error),
}

impl PackError {
    /// Stable machine-readable failure kind for run records.
    pub fn kind(&self) -> &'static str {
        match self {
            PackError::Stage1Embed { .. } => "stage1_embed",
            PackError::BudgetBreach { .. } => "budget_breach",
            PackError::Completion { .. } => "stage2_completion",
            PackError::Invalid(_) => "invalid",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Stage1Output {
    pub paths: Vec<OrientedPath>,
    pub ledger: ExposureLedger,
    /// Exposed-true pairs across all rounds (the revealed digraph).
    pub exposed_true: Vec<(usize, usize)>,
    /// Semi-degree of each round's host, before embedding.
    pub host_semi_degrees: Vec<usize>,
}

const ORACLE_STREAM: u64 = 0;
const D2_STREAM: u64 = 1;
const ASSIGN_STREAM: u64 = 2;
const EMBED_STREAM_BASE: u64 = 16;
const SOLVER_TAG_BASE: u64 = 1 << 20;

/// Stage 1: embed a `path_len`-vertex subpath of each input cycle into
/// the complete digraph minus all previously used edges, sharing one
/// exposure oracle across rounds.
///
/// The subpath of cycle i is the one over its first `path_len - 1`
/// pattern entries. Fails on the first embedding failure or budget
/// breach.
pub fn stage1_pack(
    patterns: &[Orientation],
    params: &PackParams,
    seed: u64,
) -> Result<Stage1Output, PackError> {
    params.validate()?;
    if patterns.len() != params.t {
        return Err(Error::InvalidArgument(format!(
            "expected {} cycle patterns, got {}",
            params.t,
            patterns.len()
        ))
        .into());
    }
    for (i, pat) in patterns.iter().enumerate() {
        if pat.len() != params.n {
            return Err(Error::Malformed(format!(
                "cycle pattern {i} has length {}, expected n={}",
                pat.len(),
                params.n
            ))
            .into());
        }
    }

    let budget = params.exposure_budget();
    let mut host = Digraph::complete(params.n);
    let mut oracle = ExposureOracle::new(params.expose_prob, seed, ORACLE_STREAM);
    let mut ledger = ExposureLedger::new(params.n);
    let mut paths = Vec::with_capacity(params.t);
    let mut host_semi_degrees = Vec::with_capacity(params.t);

    for (round, pattern) in patterns.iter().enumerate() {
        host_semi_degrees.push(host.semi_degree());
        let embed_params = EmbedParams::new(params.path_len, pattern.prefix(params.path_len - 1))?;
        let mut shuffle_rng = stream_rng(seed, EMBED_STREAM_BASE + round as u64);
        let trace = embed_path(&host, &embed_params, &mut oracle, &mut shuffle_rng)?;
        note_trace(&mut ledger, round, &trace);
        check_budget(&ledger, &trace, budget)?;
        let path = match trace.outcome {
            crate::embed::EmbedOutcome::Success(path) => path,
            crate::embed::EmbedOutcome::Failure { round: inner } => {
                return Err(PackError::Stage1Embed { cycle: round, round: inner });
            }
        };
        for (u, v) in path.edges() {
            host.remove_edge(u, v);
        }
        ledger.note_window(path_interior(&path));
        paths.push(path);
    }

    Ok(Stage1Output {
        paths,
        ledger,
        exposed_true: oracle.true_pairs(),
        host_semi_degrees,
    })
}

fn note_trace(ledger: &mut ExposureLedger, round: usize, trace: &EmbeddingTrace) {
    for ev in &trace.exposures {
        ledger.note_query(round, ev.pair.0 as usize, ev.pair.1 as usize, ev.fresh);
    }
}

fn check_budget(
    ledger: &ExposureLedger,
    trace: &EmbeddingTrace,
    budget: f64,
) -> Result<(), PackError> {
    for ev in &trace.exposures {
        let (u, v) = (ev.pair.0 as usize, ev.pair.1 as usize);
        let count = ledger.reveals(u, v);
        if count as f64 > budget {
            return Err(PackError::BudgetBreach { u, v, count, budget });
        }
    }
    Ok(())
}

fn path_interior(path: &OrientedPath) -> &[usize] {
    let vs = path.vertices();
    &vs[1..vs.len() - 1]
}

#[derive(Debug, Clone, Default)]
pub struct PackDiagnostics {
    pub warnings: Vec<String>,
    pub max_fresh_reveals: u16,
    pub max_query_rounds: u16,
    pub max_window_rounds: u16,
    /// (1 + eps) t ((n - l)/n)^2, the stage-1 property-(c) level.
    pub window_rounds_bound: f64,
    /// Pairs whose window count exceeds that level (recorded, not fatal).
    pub window_bound_violations: usize,
    /// Per-pair consumed probability stays at p: exposure stayed within
    /// the stage-1 budget and the split recombines to p.
    pub coupling_ok: bool,
    /// Stage-2 edges with no eligible window, discarded.
    pub discarded_stage2_edges: usize,
}

#[derive(Debug, Clone)]
pub struct PackingResult {
    pub cycles: Vec<OrientedCycle>,
    pub paths: Vec<OrientedPath>,
    pub ledger: ExposureLedger,
    /// Stage-2 edges assigned to each cycle (each a subset of that
    /// cycle's completion subdigraph G_i).
    pub assigned: Vec<Vec<(usize, usize)>>,
    pub diagnostics: PackDiagnostics,
}

/// Stage 2: draw the second random digraph, split its edges among the
/// eligible completion windows (uniformly over the Y_uv eligible
/// indices), and close every stage-1 path into its cycle inside its
/// assigned edges.
pub fn stage2_complete(
    stage1: &Stage1Output,
    patterns: &[Orientation],
    params: &PackParams,
    seed: u64,
) -> Result<PackingResult, PackError> {
    let n = params.n;
    let t = params.t;
    let ell = params.path_len;

    // Window membership per cycle: everything but the path interior.
    let mut in_window: Vec<Vec<bool>> = Vec::with_capacity(t);
    for path in &stage1.paths {
        let mut w = vec![true; n];
        for &v in path_interior(path) {
            w[v] = false;
        }
        in_window.push(w);
    }

    // Edges already consumed by the stage-1 paths.
    let mut used = Digraph::empty(n);
    for path in &stage1.paths {
        for (u, v) in path.edges() {
            used.add_edge(u, v);
        }
    }

    let d2 = sample_dnp(n, params.stage2_prob, derive_seed(seed, D2_STREAM));
    let mut assign_rng = stream_rng(seed, ASSIGN_STREAM);
    let mut assigned: Vec<Vec<(usize, usize)>> = vec![Vec::new(); t];
    let mut discarded = 0usize;
    for (u, v) in d2.edges() {
        let eligible: Vec<usize> = (0..t).filter(|&i| in_window[i][u] && in_window[i][v]).collect();
        debug_assert_eq!(
            eligible.len(),
            stage1.ledger.window_count(u, v) as usize,
            "eligible windows must match the ledger's window count"
        );
        if eligible.is_empty() {
            discarded += 1;
            continue;
        }
        let i = eligible[assign_rng.gen_range(0..eligible.len())];
        // F_i excludes edges already consumed by any stage-1 path.
        if !used.has_edge(u, v) {
            assigned[i].push((u, v));
        }
    }

    // Completions for different cycles are independent given the
    // assignment; solve them in parallel on per-cycle seeds.
    let solutions: Vec<Result<OrientedPath, PackError>> = (0..t)
        .into_par_iter()
        .map(|i| {
            let path = &stage1.paths[i];
            let window: Vec<usize> = (0..n).filter(|&v| in_window[i][v]).collect();
            let wsize = window.len();
            debug_assert_eq!(wsize, params.window_size());

            let mut f_i = Digraph::empty(n);
            for &(u, v) in &assigned[i] {
                f_i.add_edge(u, v);
            }
            // Completion pattern: the cycle's unused entries, traversed
            // from the path's start backwards around the cycle
            // (reversed, flipped).
            let comp_signs: Vec<Sign> = (0..(n - ell + 1))
                .map(|j| patterns[i].sign(n - 1 - j).flip())
                .collect();
            let inst = CompletionInstance::new(
                &f_i,
                &window,
                path.first(),
                path.last(),
                Orientation::new(comp_signs)?,
            )?;
            let solution = if wsize <= params.solver_dp_max {
                exact_sigma_path(&inst)?
            } else {
                randomized_sigma_path(
                    &inst,
                    params.solver_budget,
                    derive_seed(seed, SOLVER_TAG_BASE + i as u64),
                )
            };
            solution.ok_or(PackError::Completion { cycle: i, window: wsize })
        })
        .collect();

    let mut cycles = Vec::with_capacity(t);
    for (i, solution) in solutions.into_iter().enumerate() {
        let completion = solution?;
        let path = &stage1.paths[i];
        // Glue: path vertices, then the completion walked back from the
        // path's end to its start.
        let wsize = params.window_size();
        let mut cycle_vertices = path.vertices().to_vec();
        let comp = completion.vertices();
        debug_assert_eq!(comp[0], path.first());
        debug_assert_eq!(comp[wsize - 1], path.last());
        for j in (1..wsize - 1).rev() {
            cycle_vertices.push(comp[j]);
        }
        let cycle = OrientedCycle::new(cycle_vertices, patterns[i].clone())?;
        debug_assert!({
            let mut allowed = Digraph::empty(n);
            for &(u, v) in &assigned[i] {
                allowed.add_edge(u, v);
            }
            for (u, v) in path.edges() {
                allowed.add_edge(u, v);
            }
            cycle.is_in(&allowed)
        });
        cycles.push(cycle);
    }

    let bound = params.window_rounds_bound();
    let budget_respected = stage1.ledger.max_reveals() as f64 <= params.exposure_budget();
    let split_exact = (params.stage1_prob + params.stage2_prob
        - params.stage1_prob * params.stage2_prob
        - params.p)
        .abs()
        < 1e-9;
    let diagnostics = PackDiagnostics {
        warnings: Vec::new(),
        max_fresh_reveals: stage1.ledger.max_reveals(),
        max_query_rounds: stage1.ledger.max_queries(),
        max_window_rounds: stage1.ledger.max_window_count(),
        window_rounds_bound: bound,
        window_bound_violations: stage1.ledger.window_bound_violations(bound),
        coupling_ok: budget_respected && split_exact,
        discarded_stage2_edges: discarded,
    };

    Ok(PackingResult {
        cycles,
        paths: stage1.paths.clone(),
        ledger: stage1.ledger.clone(),
        assigned,
        diagnostics,
    })
}

/// End-to-end packing. With an empty pattern list this is an empty
/// success. Warns (in diagnostics) when p sits below the log^3 n / n
/// regime the two-stage argument is designed for.
pub fn pack_cycles(
    patterns: &[Orientation],
    params: &PackParams,
    seed: u64,
) -> Result<PackingResult, PackError> {
    if patterns.is_empty() {
        return Ok(PackingResult {
            cycles: Vec::new(),
            paths: Vec::new(),
            ledger: ExposureLedger::new(params.n),
            assigned: Vec::new(),
            diagnostics: PackDiagnostics {
                coupling_ok: true,
                window_rounds_bound: params.window_rounds_bound(),
                ..PackDiagnostics::default()
            },
        });
    }
    let stage1 = stage1_pack(patterns, params, seed)?;
    let mut result = stage2_complete(&stage1, patterns, params, seed)?;
    let regime_floor = (params.n as f64).ln().powi(3) / params.n as f64;
    if params.p < regime_floor {
        result.diagnostics.warnings.push(format!(
            "p = {} is below log^3(n)/n = {regime_floor:.4}; the packing guarantees are asymptotic and this point lies outside their regime",
            params.p
        ));
    }
    Ok(result)
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub ok: bool,
    pub issues: Vec<String>,
}

/// Check a packing result against its requested patterns: pairwise
/// edge-disjointness, Hamiltonicity (every cycle spans all n vertices),
/// per-cycle pattern isomorphism up to rotation and reflection, and
/// containment of each cycle in its own path plus assigned edges.
pub fn verify_packing(result: &PackingResult, patterns: &[Orientation], n: usize) -> VerifyReport {
    let mut issues = Vec::new();
    if result.cycles.len() != patterns.len() {
        issues.push(format!(
            "expected {} cycles, result has {}",
            patterns.len(),
            result.cycles.len()
        ));
    }
    let mut seen = std::collections::HashSet::new();
    for (i, cycle) in result.cycles.iter().enumerate() {
        if cycle.len() != n {
            issues.push(format!("cycle {i} spans {} of {n} vertices", cycle.len()));
        }
        if cycle.vertices().iter().any(|&v| v >= n) {
            issues.push(format!("cycle {i} has out-of-range vertices"));
        }
        if i < patterns.len() && !patterns[i].dihedral_equivalent(cycle.pattern()) {
            issues.push(format!("cycle {i} pattern is not a rotation/reflection of its input"));
        }
        for edge in cycle.edges() {
            if !seen.insert(edge) {
                issues.push(format!("edge ({},{}) used by two cycles", edge.0, edge.1));
            }
        }
        if i < result.paths.len() && i < result.assigned.len() {
            let path_edges: std::collections::HashSet<(usize, usize)> =
                result.paths[i].edges().into_iter().collect();
            let assigned: std::collections::HashSet<(usize, usize)> =
                result.assigned[i].iter().copied().collect();
            for (u, v) in cycle.edges() {
                if !path_edges.contains(&(u, v)) && !assigned.contains(&(u, v)) {
                    issues.push(format!(
                        "cycle {i} edge ({u},{v}) is outside its path and assigned edges"
                    ));
                }
            }
        }
    }
    VerifyReport { ok: issues.is_empty(), issues }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn random_patterns(t: usize, n: usize, seed: u64) -> Vec<Orientation> {
        let mut rng = stream_rng(seed, 0);
        (0..t).map(|_| Orientation::random(n, &mut rng)).collect()
    }

    #[test]
    fn params_defaults_recombine() {
        let p = PackParams::new(128, 0.25, 0.5).unwrap();
        assert_eq!(p.t, 16);
        assert!((p.stage1_prob - 0.1875).abs() < 1e-12);
        assert!((p.stage1_prob + p.stage2_prob - p.stage1_prob * p.stage2_prob - 0.25).abs() < 1e-12);
        assert!(p.expose_prob <= 0.9 * p.stage1_prob + 1e-12);
        assert!(p.path_len >= 2 && p.path_len < 128);
        assert!(p.exposure_budget() >= 1.0);
    }

    /// The tail bound instantiated with the stage-1 exposure counters
    /// (N = t steps, per-step probability (1 + eps/4)/(n p_ex), offset
    /// (eps/4) t/(n p_ex)) is at least as strong as its simplified form
    /// exp(-eps^2 t / (64 n p_ex)) at the headline parameters.
    #[test]
    fn stage1_tail_instantiation_dominates_simplified_form() {
        let params = PackParams::new(128, 0.25, 0.5).unwrap();
        let eps = params.eps;
        let scale = params.t as f64 / (params.n as f64 * params.expose_prob);
        let q = (1.0 + eps / 4.0) / (params.n as f64 * params.expose_prob);
        let m = (eps / 4.0) * scale;
        let bound = crate::stats::indicator_tail_bound(params.t, q, m).unwrap();
        let simplified = (-eps * eps * scale / 64.0).exp();
        assert!(bound <= simplified, "bound {bound} vs simplified {simplified}");
        assert!(bound > 0.0 && bound <= 1.0);
    }

    #[test]
    fn params_reject_bad_inputs() {
        assert!(PackParams::new(128, 0.0, 0.5).is_err());
        assert!(PackParams::new(128, 1.5, 0.5).is_err());
        assert!(PackParams::new(128, 0.25, 0.0).is_err());
        assert!(PackParams::new(2, 0.25, 0.5).is_err());
    }

    #[test]
    fn empty_request_is_empty_success() {
        let params = PackParams::new(32, 0.5, 0.5).unwrap();
        let result = pack_cycles(&[], &params, 1).unwrap();
        assert!(result.cycles.is_empty());
        assert!(verify_packing(&result, &[], 32).ok);
    }

    #[test]
    fn single_cycle_stage1_reduces_to_embedding() {
        let mut params = PackParams::new(48, 0.6, 0.5).unwrap();
        params.t = 1;
        let patterns = random_patterns(1, 48, 9);
        let out = stage1_pack(&patterns, &params, 11).unwrap();
        assert_eq!(out.paths.len(), 1);
        assert_eq!(out.paths[0].vertices().len(), params.path_len);
        // Host was the complete digraph.
        assert_eq!(out.host_semi_degrees[0], 47);
        assert!(out.ledger.max_reveals() <= 1);
    }

    #[test]
    fn stage1_paths_are_edge_disjoint() {
        let mut params = PackParams::new(64, 0.5, 0.5).unwrap();
        params.t = 8;
        let patterns = random_patterns(8, 64, 2);
        let out = stage1_pack(&patterns, &params, 3).unwrap();
        let mut seen = std::collections::HashSet::new();
        for path in &out.paths {
            for e in path.edges() {
                assert!(seen.insert(e), "edge {e:?} reused");
            }
        }
        // Ledger window counts cover completed rounds only.
        assert_eq!(out.ledger.completed_rounds(), 8);
    }

    #[test]
    fn stage2_with_full_second_stage_completes() {
        // p2 = 1 when p = 1: every completion window is complete minus
        // used edges, so the DP must close every cycle.
        let mut params = PackParams::new(24, 1.0, 0.5).unwrap();
        params.t = 3;
        params.path_len = 18;
        params.expose_prob = 0.5;
        let patterns = random_patterns(3, 24, 4);
        let stage1 = stage1_pack(&patterns, &params, 5).unwrap();
        let result = stage2_complete(&stage1, &patterns, &params, 5).unwrap();
        assert_eq!(result.cycles.len(), 3);
        let report = verify_packing(&result, &patterns, 24);
        assert!(report.ok, "issues: {:?}", report.issues);
    }

    #[test]
    fn assigned_edges_stay_inside_windows() {
        let mut params = PackParams::new(24, 1.0, 0.5).unwrap();
        params.t = 3;
        params.path_len = 16;
        params.expose_prob = 0.5;
        let patterns = random_patterns(3, 24, 7);
        let stage1 = stage1_pack(&patterns, &params, 8).unwrap();
        let result = stage2_complete(&stage1, &patterns, &params, 8).unwrap();
        for (i, edges) in result.assigned.iter().enumerate() {
            let interior: std::collections::HashSet<usize> =
                path_interior(&result.paths[i]).iter().copied().collect();
            for &(u, v) in edges {
                assert!(!interior.contains(&u) && !interior.contains(&v));
            }
        }
    }

    #[test]
    fn verify_rejects_shared_edge_and_corruptions() {
        let mut params = PackParams::new(24, 1.0, 0.5).unwrap();
        params.t = 2;
        params.path_len = 16;
        params.expose_prob = 0.5;
        let patterns = random_patterns(2, 24, 20);
        let result = pack_cycles(&patterns, &params, 21).unwrap();
        assert!(verify_packing(&result, &patterns, 24).ok);

        // A rotated input pattern is still the same oriented cycle.
        let rotated: Vec<Orientation> = patterns
            .iter()
            .map(|p| {
                let k = p.len();
                let signs: Vec<_> = (0..k).map(|i| p.sign((i + 3) % k)).collect();
                Orientation::new(signs).unwrap()
            })
            .collect();
        assert!(verify_packing(&result, &rotated, 24).ok);

        // Duplicate a cycle: edge-disjointness must fail.
        let mut dup = result.clone();
        dup.cycles[1] = dup.cycles[0].clone();
        dup.paths[1] = dup.paths[0].clone();
        dup.assigned[1] = dup.assigned[0].clone();
        let dup_patterns = vec![patterns[0].clone(), patterns[0].clone()];
        assert!(!verify_packing(&dup, &dup_patterns, 24).ok);
    }

    #[test]
    fn verify_rejects_single_sign_corruption_fuzz() {
        let mut params = PackParams::new(26, 1.0, 0.5).unwrap();
        params.t = 2;
        params.path_len = 18;
        params.expose_prob = 0.5;
        let patterns = random_patterns(2, 26, 30);
        let result = pack_cycles(&patterns, &params, 31).unwrap();
        assert!(verify_packing(&result, &patterns, 26).ok);
        let mut rng = stream_rng(99, 0);
        for case in 0..100 {
            let mut corrupt = result.clone();
            let which = rng.gen_range(0..corrupt.cycles.len());
            let pos = rng.gen_range(0..26);
            let cycle = &corrupt.cycles[which];
            let mut signs = cycle.pattern().signs().to_vec();
            signs[pos] = signs[pos].flip();
            corrupt.cycles[which] =
                OrientedCycle::new(cycle.vertices().to_vec(), Orientation::new(signs).unwrap())
                    .unwrap();
            let report = verify_packing(&corrupt, &patterns, 26);
            assert!(!report.ok, "fuzz case {case} not caught");
        }
    }
}
