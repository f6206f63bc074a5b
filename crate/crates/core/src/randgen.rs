//! Random digraph models and the lazy edge-exposure oracle.

use std::collections::HashMap;

use rand::Rng;

use crate::graph::Digraph;
use crate::rng::{stream_rng, StreamRng};
use crate::Error;

/// Sample D(n, p): each of the n(n-1) ordered pairs is an edge
/// independently with probability `p`. Deterministic given the seed.
pub fn sample_dnp(n: usize, p: f64, seed: u64) -> Digraph {
    assert!((0.0..=1.0).contains(&p), "p must lie in [0,1]");
    let mut rng = stream_rng(seed, 0);
    let mut g = Digraph::empty(n);
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// Sample D(D, p): keep each edge of `d` independently with probability `p`.
pub fn sample_subdigraph(d: &Digraph, p: f64, seed: u64) -> Digraph {
    assert!((0.0..=1.0).contains(&p), "p must lie in [0,1]");
    let mut rng = stream_rng(seed, 0);
    let mut g = Digraph::empty(d.vertex_count());
    for (u, v) in d.edges() {
        if rng.gen_bool(p) {
            g.add_edge(u, v);
        }
    }
    g
}

/// Partition the edges of `d` into `k` digraphs, assigning each edge to a
/// uniformly chosen part independently.
pub fn split_k(d: &Digraph, k: usize, seed: u64) -> Vec<Digraph> {
    assert!(k >= 1, "k must be at least 1");
    let mut rng = stream_rng(seed, 0);
    let mut parts = vec![Digraph::empty(d.vertex_count()); k];
    for (u, v) in d.edges() {
        let i = rng.gen_range(0..k);
        parts[i].add_edge(u, v);
    }
    parts
}

/// A near-regular restriction host: the complete digraph minus `d` random
/// permutation digraphs (fixed points skipped), so every vertex keeps
/// out- and in-degree at least `n - 1 - d`.
pub fn near_regular_host(n: usize, d: usize, seed: u64) -> Digraph {
    let mut rng = stream_rng(seed, 0);
    let mut g = Digraph::complete(n);
    for _ in 0..d {
        let perm = random_permutation(n, &mut rng);
        for (v, &w) in perm.iter().enumerate() {
            if v != w {
                g.remove_edge(v, w);
            }
        }
    }
    g
}

fn random_permutation<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// Outcome of exposing one directed pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exposure {
    /// The pair's coin: true means the pair is an edge of the lazily
    /// revealed random digraph.
    pub edge: bool,
    /// True when this call actually flipped the coin; false when the
    /// memoized outcome was returned.
    pub fresh: bool,
}

/// Lazily reveals a random digraph D(n, p_ex), one directed pair at a
/// time. Each pair is sampled at most once; repeat queries return the
/// memoized outcome, so the set of exposed-true pairs is distributed as
/// the edges of D(n, p_ex) restricted to the queried pairs.
pub struct ExposureOracle {
    expose_prob: f64,
    outcomes: HashMap<(u32, u32), bool>,
    rng: StreamRng,
}

impl ExposureOracle {
    pub fn new(expose_prob: f64, seed: u64, stream: u64) -> Self {
        assert!(
            (0.0..=1.0).contains(&expose_prob),
            "exposure probability must lie in [0,1]"
        );
        ExposureOracle {
            expose_prob,
            outcomes: HashMap::new(),
            rng: stream_rng(seed, stream),
        }
    }

    #[inline]
    pub fn expose_prob(&self) -> f64 {
        self.expose_prob
    }

    /// Toss (or recall) the coin for directed pair (u, v).
    pub fn expose(&mut self, u: usize, v: usize) -> Result<Exposure, Error> {
        if u == v {
            return Err(Error::InvalidArgument(format!(
                "cannot expose the diagonal pair ({u},{u})"
            )));
        }
        let key = (u as u32, v as u32);
        if let Some(&edge) = self.outcomes.get(&key) {
            return Ok(Exposure { edge, fresh: false });
        }
        let edge = self.rng.gen_bool(self.expose_prob);
        self.outcomes.insert(key, edge);
        Ok(Exposure { edge, fresh: true })
    }

    /// Number of distinct pairs sampled so far.
    pub fn queried(&self) -> usize {
        self.outcomes.len()
    }

    /// Exposed-true pairs, sorted for deterministic iteration.
    pub fn true_pairs(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .outcomes
            .iter()
            .filter(|(_, &edge)| edge)
            .map(|(&(u, v), _)| (u as usize, v as usize))
            .collect();
        out.sort_unstable();
        out
    }

    /// The revealed digraph as an edge membership test.
    pub fn known_true(&self, u: usize, v: usize) -> bool {
        self.outcomes.get(&(u as u32, v as u32)) == Some(&true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extreme_probabilities() {
        let g = sample_dnp(10, 1.0, 1);
        assert_eq!(g.edge_count(), 90);
        let g = sample_dnp(10, 0.0, 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn subdigraph_extremes() {
        let d = sample_dnp(20, 0.4, 5);
        assert_eq!(sample_subdigraph(&d, 1.0, 9), d);
        assert_eq!(sample_subdigraph(&d, 0.0, 9).edge_count(), 0);
    }

    #[test]
    fn determinism() {
        assert_eq!(sample_dnp(30, 0.3, 42), sample_dnp(30, 0.3, 42));
        assert_ne!(sample_dnp(30, 0.3, 42), sample_dnp(30, 0.3, 43));
    }

    #[test]
    fn dnp_edge_count_tail() {
        // Binomial(9900, 0.5) lies in [4500, 5400] except with
        // probability far below 1e-3 per draw.
        let mut in_range = 0;
        for seed in 0..1000u64 {
            let m = sample_dnp(100, 0.5, seed).edge_count();
            if (4500..=5400).contains(&m) {
                in_range += 1;
            }
        }
        assert!(in_range >= 990, "only {in_range}/1000 in range");
    }

    #[test]
    fn split_partitions_edges() {
        let d = sample_dnp(25, 0.35, 11);
        let parts = split_k(&d, 4, 99);
        let mut union = Digraph::empty(25);
        let mut total = 0;
        for part in &parts {
            for (u, v) in part.edges() {
                assert!(d.has_edge(u, v));
                assert!(union.add_edge(u, v), "edge ({u},{v}) in two parts");
                total += 1;
            }
        }
        assert_eq!(total, d.edge_count());
        assert_eq!(union, d);
    }

    #[test]
    fn split_k_one_is_identity() {
        let d = sample_dnp(15, 0.5, 3);
        let parts = split_k(&d, 1, 0);
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0], d);
    }

    #[test]
    fn near_regular_host_degree_bound() {
        let g = near_regular_host(60, 4, 17);
        assert!(g.semi_degree() >= 60 - 1 - 4);
        assert!(g.check_invariants());
    }

    #[test]
    fn oracle_memoizes() {
        let mut o = ExposureOracle::new(0.5, 123, 0);
        let first = o.expose(2, 7).unwrap();
        assert!(first.fresh);
        for _ in 0..5 {
            let again = o.expose(2, 7).unwrap();
            assert_eq!(again.edge, first.edge);
            assert!(!again.fresh);
        }
        assert_eq!(o.queried(), 1);
        assert!(o.expose(3, 3).is_err());
    }

    #[test]
    fn oracle_extremes_and_rate() {
        let mut o = ExposureOracle::new(1.0, 1, 0);
        assert!(o.expose(0, 1).unwrap().edge);

        let mut o = ExposureOracle::new(0.01, 7, 0);
        let mut hits = 0usize;
        let mut fresh = 0usize;
        for i in 0..100_000usize {
            let u = i % 1000;
            let v = 1000 + i / 1000;
            let e = o.expose(u, v).unwrap();
            fresh += e.fresh as usize;
            hits += e.edge as usize;
        }
        assert_eq!(fresh, 100_000);
        assert_eq!(o.queried(), 100_000);
        let rate = hits as f64 / 100_000.0;
        assert!((0.008..=0.012).contains(&rate), "rate {rate}");
    }
}
