//! Finding a pattern path between prescribed endpoints that spans a
//! prescribed vertex window: an exact subset DP for small windows and a
//! budgeted randomized search beyond DP reach.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bits::BitSet;
use crate::graph::Digraph;
use crate::orient::{Orientation, OrientedPath, Sign};
use crate::rng::stream_rng;
use crate::Error;

/// Windows up to this size are exactly solvable; beyond it the DP would
/// need more than 2^24 states.
pub const DP_MAX_WINDOW: usize = 24;

/// A spanning-path search problem: find a path from `a` to `b` visiting
/// every window vertex exactly once, with edge `j` oriented by the
/// pattern's `j`-th sign.
#[derive(Debug, Clone)]
pub struct CompletionInstance {
    /// Host restricted to the window, on compact ids `0..w`.
    host: Digraph,
    /// Original vertex ids; compact id `i` is `window[i]`.
    window: Vec<usize>,
    start: usize,
    end: usize,
    pattern: Orientation,
}

impl CompletionInstance {
    /// Restrict `host` to `window` and set up the search from `a` to `b`.
    pub fn new(
        host: &Digraph,
        window: &[usize],
        a: usize,
        b: usize,
        pattern: Orientation,
    ) -> Result<Self, Error> {
        let mut sorted = window.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != window.len() {
            return Err(Error::Malformed("window vertices must be distinct".into()));
        }
        if sorted.len() < 2 {
            return Err(Error::Malformed("window needs at least two vertices".into()));
        }
        if a == b {
            return Err(Error::InvalidArgument("endpoints must be distinct".into()));
        }
        if pattern.len() != sorted.len() - 1 {
            return Err(Error::Malformed(format!(
                "pattern length {} does not match window size {}",
                pattern.len(),
                sorted.len()
            )));
        }
        let pos = |v: usize| sorted.binary_search(&v).ok();
        let (Some(start), Some(end)) = (pos(a), pos(b)) else {
            return Err(Error::InvalidArgument("endpoints must lie in the window".into()));
        };
        if sorted.iter().any(|&v| v >= host.vertex_count()) {
            return Err(Error::Malformed("window vertex out of host range".into()));
        }
        let w = sorted.len();
        let mut compact = Digraph::empty(w);
        for i in 0..w {
            for j in 0..w {
                if i != j && host.has_edge(sorted[i], sorted[j]) {
                    compact.add_edge(i, j);
                }
            }
        }
        Ok(CompletionInstance {
            host: compact,
            window: sorted,
            start,
            end,
            pattern,
        })
    }

    /// Build directly from a digraph whose vertices are the window.
    pub fn from_compact(host: Digraph, a: usize, b: usize, pattern: Orientation) -> Result<Self, Error> {
        let window: Vec<usize> = (0..host.vertex_count()).collect();
        CompletionInstance::new(&host, &window, a, b, pattern)
    }

    pub fn window(&self) -> &[usize] {
        &self.window
    }

    pub fn window_size(&self) -> usize {
        self.window.len()
    }

    pub fn pattern(&self) -> &Orientation {
        &self.pattern
    }

    pub fn host(&self) -> &Digraph {
        &self.host
    }

    pub fn endpoints(&self) -> (usize, usize) {
        (self.window[self.start], self.window[self.end])
    }

    fn to_original(&self, compact_path: &[usize]) -> OrientedPath {
        let vertices = compact_path.iter().map(|&i| self.window[i]).collect();
        OrientedPath::new(vertices, self.pattern.clone()).expect("solver produced a malformed path")
    }

    /// Candidates for the next vertex: pattern-compatible neighbors of
    /// `last` not yet visited, with the end vertex reserved for the
    /// final position.
    fn candidates(&self, last: usize, visited: &BitSet, depth: usize) -> Vec<usize> {
        let w = self.window.len();
        let sign = self.pattern.sign(depth - 1);
        let row = match sign {
            Sign::Plus => self.host.out_neighbors(last),
            Sign::Minus => self.host.in_neighbors(last),
        };
        row.iter()
            .filter(|&y| !visited.contains(y))
            .filter(|&y| y != self.end || depth == w - 1)
            .collect()
    }
}

/// Exact decision by dynamic programming over (visited set, endpoint).
/// The pattern index is determined by the set size, so the state space
/// is 2^w sets, each holding a bitmask of feasible endpoints.
///
/// Returns a spanning path or `None`, exactly; windows larger than
/// [`DP_MAX_WINDOW`] are refused.
pub fn exact_sigma_path(inst: &CompletionInstance) -> Result<Option<OrientedPath>, Error> {
    let w = inst.window.len();
    if w > DP_MAX_WINDOW {
        return Err(Error::TooLarge(format!(
            "window size {w} exceeds DP limit {DP_MAX_WINDOW}"
        )));
    }
    let full: u32 = if w == 32 { u32::MAX } else { (1u32 << w) - 1 };
    let out_masks: Vec<u32> = (0..w).map(|v| row_mask(&inst.host, v, Sign::Plus)).collect();
    let in_masks: Vec<u32> = (0..w).map(|v| row_mask(&inst.host, v, Sign::Minus)).collect();

    let mut reach: Vec<u32> = vec![0; 1 << w];
    reach[1 << inst.start] = 1 << inst.start;
    let end_bit = 1u32 << inst.end;

    for mask in (1u32 << inst.start)..=full {
        let lasts = reach[mask as usize];
        if lasts == 0 || mask & (1 << inst.start) == 0 {
            continue;
        }
        let depth = mask.count_ones() as usize;
        if depth == w {
            continue;
        }
        let sign = inst.pattern.sign(depth - 1);
        // The end vertex may only be taken at the final position.
        let allowed = if depth == w - 1 { !mask } else { !mask & !end_bit };
        let mut rest = lasts;
        while rest != 0 {
            let last = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let nexts = match sign {
                Sign::Plus => out_masks[last],
                Sign::Minus => in_masks[last],
            } & allowed
                & full;
            let mut cand = nexts;
            while cand != 0 {
                let y = cand.trailing_zeros() as usize;
                cand &= cand - 1;
                reach[(mask | (1 << y)) as usize] |= 1 << y;
            }
        }
    }

    if reach[full as usize] & end_bit == 0 {
        return Ok(None);
    }

    // Walk the DP backwards to recover one witness path.
    let mut path = vec![inst.end];
    let mut mask = full;
    let mut current = inst.end;
    while mask.count_ones() > 1 {
        let depth = mask.count_ones() as usize - 1;
        let sign = inst.pattern.sign(depth - 1);
        let prev_mask = mask & !(1 << current);
        let mut found = None;
        let mut rest = reach[prev_mask as usize];
        while rest != 0 {
            let prev = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let ok = match sign {
                Sign::Plus => inst.host.has_edge(prev, current),
                Sign::Minus => inst.host.has_edge(current, prev),
            };
            if ok {
                found = Some(prev);
                break;
            }
        }
        let prev = found.expect("DP table inconsistent during reconstruction");
        path.push(prev);
        current = prev;
        mask = prev_mask;
    }
    path.reverse();
    debug_assert_eq!(path[0], inst.start);
    Ok(Some(inst.to_original(&path)))
}

fn row_mask(g: &Digraph, v: usize, sign: Sign) -> u32 {
    let row = match sign {
        Sign::Plus => g.out_neighbors(v),
        Sign::Minus => g.in_neighbors(v),
    };
    row.iter().fold(0u32, |acc, y| acc | (1 << y))
}

/// Randomized depth-first search with backtracking and restarts.
///
/// Candidate orderings prefer vertices whose remaining pattern-compatible
/// degree is smallest (fail-first), with random tie-breaking. Sound but
/// incomplete: a returned path always validates, while `None` means
/// either no path exists or the step budget ran out. If the search tree
/// is exhausted within budget the `None` is definitive.
pub fn randomized_sigma_path(
    inst: &CompletionInstance,
    budget: u64,
    seed: u64,
) -> Option<OrientedPath> {
    let mut rng = stream_rng(seed, 0);
    let mut steps = 0u64;
    let mut restart_quantum = (16 * inst.window.len() as u64).max(64);

    while steps < budget {
        let allowance = restart_quantum.min(budget - steps);
        let (result, used, exhausted) = descend(inst, allowance, &mut rng);
        steps += used;
        if let Some(path) = result {
            return Some(inst.to_original(&path));
        }
        if exhausted {
            return None;
        }
        restart_quantum = restart_quantum.saturating_mul(2);
    }
    None
}

/// One restart: DFS until success, tree exhaustion, or allowance spent.
/// Returns (path, steps used, exhausted-without-success).
fn descend(
    inst: &CompletionInstance,
    allowance: u64,
    rng: &mut impl Rng,
) -> (Option<Vec<usize>>, u64, bool) {
    let w = inst.window.len();
    let mut steps = 0u64;
    let mut path = vec![inst.start];
    let mut visited = BitSet::new(w);
    visited.insert(inst.start);
    // Per-depth candidate stacks; popping yields the preferred order.
    let mut stacks: Vec<Vec<usize>> = vec![ordered_candidates(inst, inst.start, &visited, 1, rng)];

    loop {
        if path.len() == w {
            return (Some(path), steps, false);
        }
        let Some(stack) = stacks.last_mut() else {
            return (None, steps, true);
        };
        match stack.pop() {
            Some(next) => {
                steps += 1;
                if steps >= allowance {
                    return (None, steps, false);
                }
                path.push(next);
                visited.insert(next);
                if path.len() < w {
                    let order = ordered_candidates(inst, next, &visited, path.len(), rng);
                    stacks.push(order);
                } else {
                    stacks.push(Vec::new());
                }
            }
            None => {
                stacks.pop();
                let dead = path.pop().expect("stack/path desync");
                if path.is_empty() {
                    return (None, steps, true);
                }
                visited.remove(dead);
            }
        }
    }
}

/// Candidates at `depth`, worst (highest remaining degree) first so that
/// popping from the stack tries fail-first vertices before the rest.
fn ordered_candidates(
    inst: &CompletionInstance,
    last: usize,
    visited: &BitSet,
    depth: usize,
    rng: &mut impl Rng,
) -> Vec<usize> {
    let w = inst.window.len();
    let mut cands = inst.candidates(last, visited, depth);
    cands.shuffle(rng);
    if depth < w - 1 {
        let next_sign = inst.pattern.sign(depth);
        let degree = |y: usize| {
            let row = match next_sign {
                Sign::Plus => inst.host.out_neighbors(y),
                Sign::Minus => inst.host.in_neighbors(y),
            };
            row.difference_count(visited)
        };
        // Descending degree: the stack pops the minimum-degree candidate
        // first; the shuffle above breaks ties randomly.
        cands.sort_by_key(|&y| std::cmp::Reverse(degree(y)));
    }
    cands
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randgen::sample_dnp;

    fn instance(host: Digraph, a: usize, b: usize, pattern: &str) -> CompletionInstance {
        CompletionInstance::from_compact(host, a, b, Orientation::parse(pattern).unwrap()).unwrap()
    }

    #[test]
    fn complete_host_always_solvable() {
        for w in 2..=8usize {
            let host = Digraph::complete(w);
            let mut rng = stream_rng(7, w as u64);
            let pattern = Orientation::random(w - 1, &mut rng);
            let inst =
                CompletionInstance::from_compact(host.clone(), 0, w - 1, pattern.clone()).unwrap();
            let path = exact_sigma_path(&inst).unwrap().expect("complete host");
            assert_eq!(path.vertices().len(), w);
            assert_eq!(path.first(), 0);
            assert_eq!(path.last(), w - 1);
            assert!(path.is_in(&host));
        }
    }

    #[test]
    fn two_vertex_window_needs_the_edge() {
        let mut host = Digraph::empty(2);
        host.add_edge(1, 0);
        let inst = instance(host.clone(), 0, 1, "+");
        assert!(exact_sigma_path(&inst).unwrap().is_none());
        let inst = instance(host, 0, 1, "-");
        let p = exact_sigma_path(&inst).unwrap().unwrap();
        assert_eq!(p.vertices(), &[0, 1]);
    }

    #[test]
    fn refuses_oversized_window() {
        let host = Digraph::complete(DP_MAX_WINDOW + 1);
        let pattern = Orientation::consistent(DP_MAX_WINDOW);
        let inst = CompletionInstance::from_compact(host, 0, 1, pattern).unwrap();
        assert!(matches!(exact_sigma_path(&inst), Err(Error::TooLarge(_))));
    }

    /// Oracle: try every ordering of the interior vertices.
    fn brute_exists(inst: &CompletionInstance) -> bool {
        let w = inst.window_size();
        let interior: Vec<usize> =
            (0..w).filter(|&v| v != inst.start && v != inst.end).collect();
        let mut order = interior.clone();
        exists_perm(inst, &mut order, 0)
    }

    fn exists_perm(inst: &CompletionInstance, order: &mut Vec<usize>, at: usize) -> bool {
        if at == order.len() {
            let mut seq = vec![inst.start];
            seq.extend(order.iter().copied());
            seq.push(inst.end);
            return (0..seq.len() - 1).all(|j| {
                let (u, v) = inst.pattern.sign(j).directed(seq[j], seq[j + 1]);
                inst.host.has_edge(u, v)
            });
        }
        for i in at..order.len() {
            order.swap(at, i);
            if exists_perm(inst, order, at + 1) {
                order.swap(at, i);
                return true;
            }
            order.swap(at, i);
        }
        false
    }

    #[test]
    fn dp_agrees_with_permutation_oracle() {
        let mut hits = 0;
        for seed in 0..200u64 {
            let w = 7;
            let host = sample_dnp(w, 0.5, 1000 + seed);
            let mut rng = stream_rng(2000, seed);
            let pattern = Orientation::random(w - 1, &mut rng);
            let inst = CompletionInstance::from_compact(host.clone(), 0, w - 1, pattern).unwrap();
            let dp = exact_sigma_path(&inst).unwrap();
            let brute = brute_exists(&inst);
            assert_eq!(dp.is_some(), brute, "seed {seed}");
            if let Some(path) = dp {
                hits += 1;
                assert!(path.is_in(&host));
                assert_eq!(path.first(), 0);
                assert_eq!(path.last(), w - 1);
                let mut vs = path.vertices().to_vec();
                vs.sort_unstable();
                assert_eq!(vs, (0..w).collect::<Vec<_>>());
            }
        }
        assert!(hits > 0 && hits < 200, "oracle comparison should see both outcomes");
    }

    #[test]
    fn randomized_solver_is_sound_and_agrees_on_unsat() {
        let mut found = 0;
        for seed in 0..120u64 {
            let w = 10;
            let host = sample_dnp(w, 0.35, 5000 + seed);
            let mut rng = stream_rng(6000, seed);
            let pattern = Orientation::random(w - 1, &mut rng);
            let inst = CompletionInstance::from_compact(host.clone(), 0, w - 1, pattern).unwrap();
            let exact = exact_sigma_path(&inst).unwrap();
            let rand_path = randomized_sigma_path(&inst, 200_000, seed);
            if let Some(p) = &rand_path {
                found += 1;
                assert!(p.is_in(&host), "unsound path at seed {seed}");
                assert!(exact.is_some(), "false positive at seed {seed}");
            }
            if exact.is_none() {
                assert!(rand_path.is_none(), "claimed path where none exists, seed {seed}");
            }
        }
        assert!(found > 0);
    }

    #[test]
    fn randomized_solver_handles_complete_host() {
        let host = Digraph::complete(40);
        let mut rng = stream_rng(1, 1);
        let pattern = Orientation::random(39, &mut rng);
        let inst = CompletionInstance::from_compact(host.clone(), 3, 17, pattern).unwrap();
        let p = randomized_sigma_path(&inst, 1_000_000, 9).expect("complete host");
        assert!(p.is_in(&host));
        assert_eq!((p.first(), p.last()), (3, 17));
    }
}
