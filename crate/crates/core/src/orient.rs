//! Orientation patterns and oriented paths/cycles over a host digraph.
//!
//! A pattern assigns each step of a path or cycle a sign: `+` means the
//! edge points along the traversal, `-` means it points against it.

use std::fmt;

use rand::Rng;

use crate::graph::Digraph;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// The directed pair realizing a step `from -> to` under this sign.
    #[inline]
    pub fn directed(self, from: usize, to: usize) -> (usize, usize) {
        match self {
            Sign::Plus => (from, to),
            Sign::Minus => (to, from),
        }
    }
}

/// A sign pattern, one entry per edge of a path or cycle.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Orientation {
    signs: Vec<Sign>,
}

impl Orientation {
    pub fn new(signs: Vec<Sign>) -> Result<Self, Error> {
        if signs.is_empty() {
            return Err(Error::Malformed("orientation must be nonempty".into()));
        }
        Ok(Orientation { signs })
    }

    /// All `+`: a consistently oriented path/cycle.
    pub fn consistent(len: usize) -> Self {
        Orientation {
            signs: vec![Sign::Plus; len.max(1)],
        }
    }

    /// Alternating `+-+-...`; for cycles of even length this is the
    /// anti-directed pattern.
    pub fn alternating(len: usize) -> Self {
        Orientation {
            signs: (0..len.max(1))
                .map(|i| if i % 2 == 0 { Sign::Plus } else { Sign::Minus })
                .collect(),
        }
    }

    pub fn random<R: Rng>(len: usize, rng: &mut R) -> Self {
        Orientation {
            signs: (0..len.max(1))
                .map(|_| if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus })
                .collect(),
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        let signs = s
            .trim()
            .chars()
            .map(|c| match c {
                '+' => Ok(Sign::Plus),
                '-' => Ok(Sign::Minus),
                other => Err(Error::Malformed(format!(
                    "orientation characters must be + or -, got {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Orientation::new(signs)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.signs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    #[inline]
    pub fn sign(&self, i: usize) -> Sign {
        self.signs[i]
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    /// First `len` entries as a path pattern.
    pub fn prefix(&self, len: usize) -> Orientation {
        assert!(len >= 1 && len <= self.signs.len());
        Orientation {
            signs: self.signs[..len].to_vec(),
        }
    }

    /// True if some rotation of `other` equals `self`, or some
    /// reversed-and-flipped rotation does. Two listings of one oriented
    /// cycle always compare equal under this relation.
    pub fn dihedral_equivalent(&self, other: &Orientation) -> bool {
        let k = self.signs.len();
        if other.signs.len() != k {
            return false;
        }
        for r in 0..k {
            if (0..k).all(|i| other.signs[i] == self.signs[(i + r) % k]) {
                return true;
            }
        }
        for c in 0..k {
            if (0..k).all(|i| {
                let j = (c as isize - i as isize - 1).rem_euclid(k as isize) as usize;
                other.signs[i] == self.signs[j].flip()
            }) {
                return true;
            }
        }
        false
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.signs {
            f.write_str(match s {
                Sign::Plus => "+",
                Sign::Minus => "-",
            })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Orientation({self})")
    }
}

/// A sequence of distinct vertices together with a pattern over its
/// `len - 1` edges. Membership in a digraph is checked separately.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedPath {
    vertices: Vec<usize>,
    pattern: Orientation,
}

impl OrientedPath {
    pub fn new(vertices: Vec<usize>, pattern: Orientation) -> Result<Self, Error> {
        if vertices.len() < 2 {
            return Err(Error::Malformed("path needs at least two vertices".into()));
        }
        if pattern.len() != vertices.len() - 1 {
            return Err(Error::Malformed(format!(
                "pattern length {} does not match {} path edges",
                pattern.len(),
                vertices.len() - 1
            )));
        }
        if !all_distinct(&vertices) {
            return Err(Error::Malformed("path vertices must be distinct".into()));
        }
        Ok(OrientedPath { vertices, pattern })
    }

    #[inline]
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    #[inline]
    pub fn pattern(&self) -> &Orientation {
        &self.pattern
    }

    pub fn first(&self) -> usize {
        self.vertices[0]
    }

    pub fn last(&self) -> usize {
        *self.vertices.last().unwrap()
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Directed edges realized by the pattern.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.edge_count())
            .map(|i| self.pattern.sign(i).directed(self.vertices[i], self.vertices[i + 1]))
            .collect()
    }

    /// True iff every required edge is present in `d`.
    pub fn is_in(&self, d: &Digraph) -> bool {
        self.edges().iter().all(|&(u, v)| d.has_edge(u, v))
    }
}

/// A cyclic sequence of distinct vertices; pattern entry `i` governs the
/// edge between positions `i` and `i+1 mod k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedCycle {
    vertices: Vec<usize>,
    pattern: Orientation,
}

impl OrientedCycle {
    pub fn new(vertices: Vec<usize>, pattern: Orientation) -> Result<Self, Error> {
        if vertices.len() < 2 {
            return Err(Error::Malformed("cycle needs at least two vertices".into()));
        }
        if pattern.len() != vertices.len() {
            return Err(Error::Malformed(format!(
                "pattern length {} does not match {} cycle edges",
                pattern.len(),
                vertices.len()
            )));
        }
        if !all_distinct(&vertices) {
            return Err(Error::Malformed("cycle vertices must be distinct".into()));
        }
        Ok(OrientedCycle { vertices, pattern })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    #[inline]
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    #[inline]
    pub fn pattern(&self) -> &Orientation {
        &self.pattern
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let k = self.vertices.len();
        (0..k)
            .map(|i| {
                self.pattern
                    .sign(i)
                    .directed(self.vertices[i], self.vertices[(i + 1) % k])
            })
            .collect()
    }

    pub fn is_in(&self, d: &Digraph) -> bool {
        self.edges().iter().all(|&(u, v)| d.has_edge(u, v))
    }

    /// Number of permutations of the vertex positions mapping the
    /// oriented cycle to itself. Only rotations and reflections can
    /// preserve the underlying cycle, so this counts sign-compatible
    /// members of the dihedral group.
    pub fn automorphism_count(&self) -> usize {
        assert!(self.vertices.len() >= 3, "automorphisms need k >= 3");
        pattern_symmetry_count(self.pattern.signs())
    }
}

/// Rotations r with sigma(i) = sigma(i+r) plus reflections c with
/// sigma(c-i-1) = -sigma(i); see `OrientedCycle::automorphism_count`.
pub fn pattern_symmetry_count(signs: &[Sign]) -> usize {
    let k = signs.len();
    let rotations = (0..k)
        .filter(|&r| (0..k).all(|i| signs[i] == signs[(i + r) % k]))
        .count();
    let reflections = (0..k)
        .filter(|&c| {
            (0..k).all(|i| {
                let j = (c as isize - i as isize - 1).rem_euclid(k as isize) as usize;
                signs[j] == signs[i].flip()
            })
        })
        .count();
    rotations + reflections
}

/// True iff the vertex sequence is distinct and every edge required by
/// the pattern lies in `d`. Length mismatches, repeated vertices, and
/// out-of-range ids are malformed input rather than `false`.
pub fn validate_oriented_path(
    d: &Digraph,
    vertices: &[usize],
    pattern: &Orientation,
) -> Result<bool, Error> {
    if let Some(&v) = vertices.iter().find(|&&v| v >= d.vertex_count()) {
        return Err(Error::Malformed(format!(
            "vertex {v} out of range for n={}",
            d.vertex_count()
        )));
    }
    let path = OrientedPath::new(vertices.to_vec(), pattern.clone())?;
    Ok(path.is_in(d))
}

/// The path induced by the edges of `cycle` not lying in `path`, which
/// must be a contiguous, sign-compatible subpath of the cycle. The
/// complement shares its endpoints with `path` and partitions the
/// cycle's edges with it.
pub fn complement_path(cycle: &OrientedCycle, path: &OrientedPath) -> Result<OrientedPath, Error> {
    let k = cycle.len();
    let m = path.edge_count();
    if m >= k {
        return Err(Error::InvalidArgument(
            "subpath has at least as many edges as the cycle".into(),
        ));
    }
    let start = cycle
        .vertices
        .iter()
        .position(|&v| v == path.vertices[0])
        .ok_or_else(|| Error::InvalidArgument("subpath start not on cycle".into()))?;

    let forward = (0..=m).all(|j| path.vertices[j] == cycle.vertices[(start + j) % k])
        && (0..m).all(|j| path.pattern.sign(j) == cycle.pattern.sign((start + j) % k));
    let backward = (0..=m).all(|j| {
        let pos = (start as isize - j as isize).rem_euclid(k as isize) as usize;
        path.vertices[j] == cycle.vertices[pos]
    }) && (0..m).all(|j| {
        let pos = (start as isize - j as isize - 1).rem_euclid(k as isize) as usize;
        path.pattern.sign(j) == cycle.pattern.sign(pos).flip()
    });

    // Complement edges are the unused cycle positions, traversed in the
    // cycle's own direction from the subpath's far endpoint back to its
    // start (forward case) or from its start onward (backward case).
    let from = if forward {
        (start + m) % k
    } else if backward {
        start
    } else {
        return Err(Error::InvalidArgument(
            "not a contiguous sign-compatible subpath of the cycle".into(),
        ));
    };

    let steps = k - m;
    let vertices: Vec<usize> = (0..=steps).map(|j| cycle.vertices[(from + j) % k]).collect();
    let signs: Vec<Sign> = (0..steps).map(|j| cycle.pattern.sign((from + j) % k)).collect();
    OrientedPath::new(vertices, Orientation::new(signs)?)
}

fn all_distinct(vertices: &[usize]) -> bool {
    let mut sorted = vertices.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).all(|w| w[0] != w[1])
}
