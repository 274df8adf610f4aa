//! Simple undirected graphs, vertex permutations, and the random models used
//! to build planted alignment instances.
//!
//! All randomness flows through [`RngSeed`], which selects a ChaCha8 stream:
//! the 64-bit `base_seed` is expanded to a 256-bit key with
//! `SeedableRng::seed_from_u64` and `stream_id` picks the ChaCha stream. Both
//! steps are platform independent, so equal seeds give equal graphs everywhere.

use std::fmt;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Seed for one independent random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngSeed {
    pub base_seed: u64,
    pub stream_id: u64,
}

impl RngSeed {
    pub fn new(base_seed: u64, stream_id: u64) -> Self {
        Self {
            base_seed,
            stream_id,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Simple undirected unweighted graph.
///
/// Adjacency is held twice: as a row-major bitset for constant-time
/// membership tests and as sorted neighbor lists for sparse products.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    neighbors: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// Graph on `n` vertices with no edges.
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let words = n.div_ceil(64);
        Ok(Self {
            n,
            words,
            bits: vec![0; n * words],
            neighbors: vec![Vec::new(); n],
            edge_count: 0,
        })
    }

    pub fn complete(n: usize) -> Result<Self> {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Self::from_edges(n, edges)
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::from_edges(n, (1..n).map(|i| (i - 1, i)))
    }

    /// Builds a graph from unordered edges. Duplicates and reversed pairs
    /// collapse to a single edge; self-loops are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for (i, j) in edges {
            g.insert(i, j)?;
        }
        g.finish();
        Ok(g)
    }

    fn insert(&mut self, i: usize, j: usize) -> Result<()> {
        for v in [i, j] {
            if v >= self.n {
                return Err(Error::VertexOutOfRange { vertex: v, n: self.n });
            }
        }
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        if !self.has_edge(i, j) {
            self.set_bit(i, j);
            self.set_bit(j, i);
            self.neighbors[i].push(j);
            self.neighbors[j].push(i);
            self.edge_count += 1;
        }
        Ok(())
    }

    fn set_bit(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    fn finish(&mut self) {
        for list in &mut self.neighbors {
            list.sort_unstable();
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    /// Sorted neighbors of `v`.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    /// Edges `(i, j)` with `i < j` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors[i]
                .iter()
                .copied()
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    /// Edge-list text: an `n <count>` header followed by one `i j` line per
    /// edge, sorted lexicographically.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for (i, j) in self.edges() {
            let _ = writeln!(out, "{i} {j}");
        }
        out
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

/// Bijection on `0..n`; `map[i]` is the image of `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n {
                return Err(Error::NotAPermutation(format!("value {v} out of range for length {n}")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::NotAPermutation(format!("value {v} repeated")));
            }
        }
        Ok(Self { map })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            inv[j] = i;
        }
        Self { map: inv }
    }

    /// `self ∘ other`, i.e. `i ↦ self(other(i))`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            map: other.map.iter().map(|&j| self.map[j]).collect(),
        }
    }

    /// Number of fixed points shared with `other`: `|{i : self(i) = other(i)}|`.
    pub fn agreement(&self, other: &Self) -> usize {
        self.map
            .iter()
            .zip(&other.map)
            .filter(|(a, b)| a == b)
            .count()
    }

    /// 0/1 vectorization with index `i·n + self(i)`.
    pub fn to_indicator(&self) -> Vec<f64> {
        let n = self.map.len();
        let mut y = vec![0.0; n * n];
        for (i, &j) in self.map.iter().enumerate() {
            y[i * n + j] = 1.0;
        }
        y
    }
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Probability { name, value })
    }
}

/// Erdős–Rényi graph: each pair `i < j`, visited in lexicographic order,
/// is an edge with probability `p`.
pub fn generate_er(n: usize, p: f64, seed: RngSeed) -> Result<Graph> {
    check_probability("p", p)?;
    let mut g = Graph::empty(n)?;
    let mut rng = seed.rng();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                g.insert(i, j)?;
            }
        }
    }
    g.finish();
    Ok(g)
}

/// Flips the edge indicator of every pair `i < j` independently with
/// probability `lambda`. The flip mask is symmetric with a zero diagonal, so
/// the result is again a simple graph.
pub fn apply_noise(g: &Graph, lambda: f64, seed: RngSeed) -> Result<Graph> {
    check_probability("lambda", lambda)?;
    let n = g.n();
    let mut out = Graph::empty(n)?;
    let mut rng = seed.rng();
    for i in 0..n {
        for j in i + 1..n {
            let flip = rng.gen::<f64>() < lambda;
            if g.has_edge(i, j) != flip {
                out.insert(i, j)?;
            }
        }
    }
    out.finish();
    Ok(out)
}

/// Relabels vertices: the result has an edge `(perm(i), perm(j))` exactly
/// when `g` has `(i, j)`.
pub fn permute(g: &Graph, perm: &Permutation) -> Result<Graph> {
    if perm.len() != g.n() {
        return Err(Error::SizeMismatch {
            expected: g.n(),
            actual: perm.len(),
        });
    }
    Graph::from_edges(g.n(), g.edges().map(|(i, j)| (perm.apply(i), perm.apply(j))))
}

/// Uniform permutation by Fisher–Yates shuffle.
pub fn random_permutation(n: usize, seed: RngSeed) -> Result<Permutation> {
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut map: Vec<usize> = (0..n).collect();
    map.shuffle(&mut seed.rng());
    Ok(Permutation { map })
}

/// Parses the edge-list text format: a first `n <count>` line, then `i j`
/// lines of 0-indexed vertex ids. Blank lines and `#` comments are skipped.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut graph: Option<Graph> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse_err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        match &mut graph {
            None => {
                let n = match fields.as_slice() {
                    ["n", count] => count
                        .parse::<usize>()
                        .map_err(|e| parse_err(format!("bad vertex count {count:?}: {e}")))?,
                    _ => return Err(parse_err(format!("expected `n <count>` header, found {line:?}"))),
                };
                graph = Some(Graph::empty(n).map_err(|e| parse_err(e.to_string()))?);
            }
            Some(g) => {
                let (a, b) = match fields.as_slice() {
                    [a, b] => (a, b),
                    _ => return Err(parse_err(format!("expected `i j`, found {line:?}"))),
                };
                let i = a
                    .parse::<usize>()
                    .map_err(|e| parse_err(format!("bad vertex id {a:?}: {e}")))?;
                let j = b
                    .parse::<usize>()
                    .map_err(|e| parse_err(format!("bad vertex id {b:?}: {e}")))?;
                g.insert(i, j).map_err(|e| parse_err(e.to_string()))?;
            }
        }
    }
    let mut g = graph.ok_or(Error::Parse {
        line: 0,
        message: "missing `n <count>` header".into(),
    })?;
    g.finish();
    Ok(g)
}

/// Number of edges `(i, j)` of `g1` whose image `(perm(i), perm(j))` is an
/// edge of `g2`.
pub fn matched_edges(g1: &Graph, g2: &Graph, perm: &Permutation) -> Result<usize> {
    if g1.n() != g2.n() {
        return Err(Error::SizeMismatch {
            expected: g1.n(),
            actual: g2.n(),
        });
    }
    if perm.len() != g1.n() {
        return Err(Error::SizeMismatch {
            expected: g1.n(),
            actual: perm.len(),
        });
    }
    Ok(g1
        .edges()
        .filter(|&(i, j)| g2.has_edge(perm.apply(i), perm.apply(j)))
        .count())
}
