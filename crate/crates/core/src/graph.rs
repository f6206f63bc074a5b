//! Dense digraph with bitset adjacency rows in both directions.

use crate::bits::BitSet;
use crate::Error;

/// A simple directed graph on vertices `0..n`.
///
/// Out- and in-neighborhoods are stored redundantly as bitset rows so
/// neighborhood queries in either direction cost O(n/64) words.
/// No self-loops; at most one edge per ordered pair.
#[derive(Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    m: usize,
    out_adj: Vec<BitSet>,
    in_adj: Vec<BitSet>,
}

impl Digraph {
    /// Empty digraph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Digraph {
            n,
            m: 0,
            out_adj: vec![BitSet::new(n); n],
            in_adj: vec![BitSet::new(n); n],
        }
    }

    /// Complete digraph: all n(n-1) ordered pairs.
    pub fn complete(n: usize) -> Self {
        let mut out_adj = Vec::with_capacity(n);
        let mut in_adj = Vec::with_capacity(n);
        for v in 0..n {
            let mut row = BitSet::full(n);
            row.remove(v);
            out_adj.push(row.clone());
            in_adj.push(row);
        }
        Digraph {
            n,
            m: n * (n.saturating_sub(1)),
            out_adj,
            in_adj,
        }
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.out_adj[u].contains(v)
    }

    /// Insert edge u->v. Returns false if it was already present.
    pub fn add_edge(&mut self, u: usize, v: usize) -> bool {
        assert!(u < self.n && v < self.n && u != v, "bad edge ({u},{v})");
        if self.out_adj[u].contains(v) {
            return false;
        }
        self.out_adj[u].insert(v);
        self.in_adj[v].insert(u);
        self.m += 1;
        true
    }

    /// Remove edge u->v. Returns false if it was absent.
    pub fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        if u == v || !self.out_adj[u].contains(v) {
            return false;
        }
        self.out_adj[u].remove(v);
        self.in_adj[v].remove(u);
        self.m -= 1;
        true
    }

    #[inline]
    pub fn out_neighbors(&self, v: usize) -> &BitSet {
        &self.out_adj[v]
    }

    #[inline]
    pub fn in_neighbors(&self, v: usize) -> &BitSet {
        &self.in_adj[v]
    }

    #[inline]
    pub fn out_degree(&self, v: usize) -> usize {
        self.out_adj[v].count()
    }

    #[inline]
    pub fn in_degree(&self, v: usize) -> usize {
        self.in_adj[v].count()
    }

    /// Minimum over all vertices of min(out-degree, in-degree).
    pub fn semi_degree(&self) -> usize {
        assert!(self.n >= 1, "semi-degree of an empty vertex set");
        (0..self.n)
            .map(|v| self.out_degree(v).min(self.in_degree(v)))
            .min()
            .unwrap()
    }

    /// All edges as (u, v) pairs, sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m);
        for u in 0..self.n {
            for v in self.out_adj[u].iter() {
                out.push((u, v));
            }
        }
        out
    }

    /// Text format: first line `n m`, then one `u v` line per edge,
    /// edges sorted. Parsing rejects duplicates, self-loops, and
    /// out-of-range vertices.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(16 + 8 * self.m);
        s.push_str(&format!("{} {}\n", self.n, self.m));
        for (u, v) in self.edges() {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, Error> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let mut it = header.split_whitespace();
        let n: usize = parse_field(it.next(), 1, "vertex count")?;
        let m: usize = parse_field(it.next(), 1, "edge count")?;
        if it.next().is_some() {
            return Err(Error::Parse {
                line: 1,
                msg: "expected exactly `n m`".into(),
            });
        }
        let mut g = Digraph::empty(n);
        let mut seen = 0usize;
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let u: usize = parse_field(it.next(), lineno, "tail vertex")?;
            let v: usize = parse_field(it.next(), lineno, "head vertex")?;
            if it.next().is_some() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "expected exactly `u v`".into(),
                });
            }
            if u >= n || v >= n {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("vertex out of range: {u} {v} with n={n}"),
                });
            }
            if u == v {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("self-loop at vertex {u}"),
                });
            }
            if !g.add_edge(u, v) {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("duplicate edge {u} {v}"),
                });
            }
            seen += 1;
        }
        if seen != m {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header declares {m} edges, found {seen}"),
            });
        }
        Ok(g)
    }

    /// Internal consistency: no self-loops, out/in rows agree.
    pub fn check_invariants(&self) -> bool {
        for v in 0..self.n {
            if self.out_adj[v].contains(v) || self.in_adj[v].contains(v) {
                return false;
            }
            for u in self.out_adj[v].iter() {
                if !self.in_adj[u].contains(v) {
                    return false;
                }
            }
        }
        let m: usize = (0..self.n).map(|v| self.out_degree(v)).sum();
        m == self.m
    }
}

fn parse_field(tok: Option<&str>, line: usize, what: &str) -> Result<usize, Error> {
    let tok = tok.ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing {what}"),
    })?;
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad {what}: {tok:?}"),
    })
}

impl std::fmt::Debug for Digraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Digraph(n={}, m={})", self.n, self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn semi_degree_examples() {
        assert_eq!(Digraph::complete(3).semi_degree(), 2);
        assert_eq!(Digraph::empty(3).semi_degree(), 0);
        let mut g = Digraph::empty(2);
        g.add_edge(0, 1);
        assert_eq!(g.semi_degree(), 0);
    }

    #[test]
    fn text_round_trip() {
        let mut g = Digraph::empty(4);
        g.add_edge(0, 1);
        g.add_edge(3, 0);
        g.add_edge(1, 0);
        let text = g.to_text();
        let h = Digraph::from_text(&text).unwrap();
        assert_eq!(g, h);
        assert_eq!(h.to_text(), text);
    }

    #[test]
    fn parse_rejects_duplicates_with_line_info() {
        let err = Digraph::from_text("3 2\n0 1\n0 1\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_self_loop_and_range() {
        assert!(Digraph::from_text("3 1\n1 1\n").is_err());
        assert!(Digraph::from_text("3 1\n0 3\n").is_err());
        assert!(Digraph::from_text("3 2\n0 1\n").is_err());
    }

    #[test]
    fn complete_counts() {
        let g = Digraph::complete(10);
        assert_eq!(g.edge_count(), 90);
        assert_eq!(g.semi_degree(), 9);
        assert!(g.check_invariants());
    }
}
