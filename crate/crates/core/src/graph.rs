//! Undirected multigraphs and infection states.
//!
//! Graphs are stored over a fixed vertex set `0..n` with explicit multi-edge
//! and self-loop counts, because the regular configuration model produces
//! both. Degree here always means *infection-relevant* degree: the number of
//! incident non-loop edge instances, counted with multiplicity. A self-loop
//! never contributes to a vertex's degree or to its infected-neighbour count
//! (a vertex is not its own neighbour for infection purposes), but it is a
//! real edge instance for serialization and loop statistics.
//!
//! The on-disk format is a plain edge list:
//!
//! ```text
//! nsis-graph v1 n=<N>
//! # optional comments
//! u v
//! ```
//!
//! with one line per edge *instance* (`u u` is a self-loop) and `#` starting a
//! comment. Canonical output lists edges sorted by `(min endpoint, max
//! endpoint)` with LF line endings, so serialize ∘ parse ∘ serialize is
//! byte-identical.

use std::fmt;

use crate::error::{Error, Result};

/// Index of a vertex: a dense non-negative integer below the graph order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<usize> for VertexId {
    fn from(v: usize) -> Self {
        VertexId(v)
    }
}

/// Undirected multigraph on vertices `0..n` with multi-edges and self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    n: usize,
    /// Per-vertex neighbour list `(neighbour, multiplicity)`, sorted by
    /// neighbour id, loops excluded. Symmetric: `v ∈ adj[u] ⟺ u ∈ adj[v]`
    /// with equal multiplicity.
    adj: Vec<Vec<(u32, u32)>>,
    /// Self-loop count per vertex (each loop is one edge instance).
    loops: Vec<u32>,
}

impl MultiGraph {
    /// Empty (edgeless) graph on `n ≥ 1` vertices.
    pub fn edgeless(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input("graph order n must be >= 1".into()));
        }
        Ok(MultiGraph { n, adj: vec![Vec::new(); n], loops: vec![0; n] })
    }

    /// Builds a multigraph from edge instances. Repeated pairs accumulate
    /// multiplicity; `(v, v)` adds a self-loop. Fails on out-of-range endpoints.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = MultiGraph::edgeless(n)?;
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Adds one edge instance between `u` and `v` (a self-loop if `u == v`).
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::Input(format!(
                "edge ({u}, {v}) has an endpoint outside 0..{}",
                self.n
            )));
        }
        if u == v {
            self.loops[u] += 1;
        } else {
            Self::bump(&mut self.adj[u], v as u32);
            Self::bump(&mut self.adj[v], u as u32);
        }
        debug_assert!(self.adj[u].windows(2).all(|w| w[0].0 < w[1].0));
        Ok(())
    }

    fn bump(list: &mut Vec<(u32, u32)>, nbr: u32) {
        match list.binary_search_by_key(&nbr, |&(w, _)| w) {
            Ok(i) => list[i].1 += 1,
            Err(i) => list.insert(i, (nbr, 1)),
        }
    }

    /// Path `0 – 1 – ⋯ – (n−1)`.
    pub fn path(n: usize) -> Result<Self> {
        Self::from_edges(n, (1..n).map(|v| (v - 1, v)))
    }

    /// Cycle on `n ≥ 3` vertices.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Input(format!("cycle needs n >= 3, got {n}")));
        }
        Self::from_edges(n, (0..n).map(|v| (v, (v + 1) % n)))
    }

    /// Star with centre `0` and leaves `1..n`.
    pub fn star(n: usize) -> Result<Self> {
        Self::from_edges(n, (1..n).map(|v| (0, v)))
    }

    /// Number of vertices.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Infection-relevant degree of `x`: incident non-loop edge instances,
    /// counted with multiplicity.
    pub fn neighbor_degree(&self, x: VertexId) -> Result<usize> {
        self.check_vertex(x)?;
        Ok(self.degree_raw(x.0))
    }

    #[inline]
    pub(crate) fn degree_raw(&self, x: usize) -> usize {
        self.adj[x].iter().map(|&(_, m)| m as usize).sum()
    }

    /// Maximum infection-relevant degree over all vertices (`0` when edgeless).
    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|x| self.degree_raw(x)).max().unwrap_or(0)
    }

    /// Self-loop count at `x`.
    pub fn loops_at(&self, x: VertexId) -> Result<usize> {
        self.check_vertex(x)?;
        Ok(self.loops[x.0] as usize)
    }

    /// Total number of self-loop edge instances in the graph.
    pub fn self_loop_count(&self) -> usize {
        self.loops.iter().map(|&c| c as usize).sum()
    }

    /// Total number of edge instances (loops included).
    pub fn edge_instance_count(&self) -> usize {
        let non_loop: usize =
            self.adj.iter().flat_map(|l| l.iter().map(|&(_, m)| m as usize)).sum::<usize>() / 2;
        non_loop + self.self_loop_count()
    }

    /// Neighbour list of `x` as `(neighbour, multiplicity)`, sorted, loops excluded.
    pub fn neighbors(&self, x: VertexId) -> Result<&[(u32, u32)]> {
        self.check_vertex(x)?;
        Ok(&self.adj[x.0])
    }

    /// Number of infected neighbours of `x` under `sigma`, counted with edge
    /// multiplicity. Self-loops contribute nothing even when `x` is infected.
    pub fn infected_neighbors(&self, sigma: &Configuration, x: VertexId) -> Result<usize> {
        self.check_vertex(x)?;
        if sigma.len() != self.n {
            return Err(Error::Input(format!(
                "configuration has {} sites but the graph has {} vertices",
                sigma.len(),
                self.n
            )));
        }
        Ok(self.infected_neighbors_raw(sigma, x.0))
    }

    #[inline]
    pub(crate) fn infected_neighbors_raw(&self, sigma: &Configuration, x: usize) -> usize {
        self.adj[x]
            .iter()
            .map(|&(w, m)| if sigma.get(w as usize) { m as usize } else { 0 })
            .sum()
    }

    /// Edge instances in canonical order: sorted by `(min endpoint, max
    /// endpoint)`, one item per instance, self-loops as `(v, v)`.
    pub fn edge_instances(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            let loops = std::iter::repeat_n((u, u), self.loops[u] as usize);
            let plain = self.adj[u]
                .iter()
                .filter(move |&&(w, _)| (w as usize) > u)
                .flat_map(move |&(w, m)| std::iter::repeat_n((u, w as usize), m as usize));
            loops.chain(plain)
        })
    }

    fn check_vertex(&self, x: VertexId) -> Result<()> {
        if x.0 >= self.n {
            return Err(Error::Input(format!("vertex {x} out of range 0..{}", self.n)));
        }
        Ok(())
    }
}

/// Infection state over `0..n`: one bit per vertex, `1` = infected.
///
/// Bits live in 64-bit blocks; the infected count is cached and re-verified
/// against a popcount after every mutation in debug builds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    blocks: Vec<u64>,
    len: usize,
    ones: usize,
}

impl Configuration {
    /// All-susceptible state on `n` sites.
    pub fn all_susceptible(n: usize) -> Self {
        Configuration { blocks: vec![0; n.div_ceil(64)], len: n, ones: 0 }
    }

    /// All-infected state on `n` sites.
    pub fn all_infected(n: usize) -> Self {
        let mut c = Self::all_susceptible(n);
        for x in 0..n {
            c.set(x, true);
        }
        c
    }

    /// State with the given bits (`true` = infected).
    pub fn from_bits(bits: &[bool]) -> Self {
        let mut c = Self::all_susceptible(bits.len());
        for (x, &b) in bits.iter().enumerate() {
            if b {
                c.set(x, true);
            }
        }
        c
    }

    /// Uniformly random state: each site infected independently with
    /// probability 1/2.
    pub fn random<R: rand::Rng>(n: usize, rng: &mut R) -> Self {
        let mut c = Self::all_susceptible(n);
        for x in 0..n {
            if rng.gen::<bool>() {
                c.set(x, true);
            }
        }
        c
    }

    /// Number of sites.
    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Whether site `x` is infected.
    #[inline]
    pub fn get(&self, x: usize) -> bool {
        debug_assert!(x < self.len);
        self.blocks[x >> 6] >> (x & 63) & 1 == 1
    }

    /// Sets site `x` to `infected`, keeping the cached count in sync.
    #[inline]
    pub fn set(&mut self, x: usize, infected: bool) {
        debug_assert!(x < self.len);
        let (blk, bit) = (x >> 6, 1u64 << (x & 63));
        let was = self.blocks[blk] & bit != 0;
        if infected && !was {
            self.blocks[blk] |= bit;
            self.ones += 1;
        } else if !infected && was {
            self.blocks[blk] &= !bit;
            self.ones -= 1;
        }
        debug_assert_eq!(
            self.ones,
            self.blocks.iter().map(|b| b.count_ones() as usize).sum::<usize>(),
            "cached infected count out of sync"
        );
    }

    /// Flips site `x`.
    #[inline]
    pub fn flip(&mut self, x: usize) {
        self.set(x, !self.get(x));
    }

    /// Number of infected sites (cached; O(1)).
    #[inline]
    pub fn infected_count(&self) -> usize {
        self.ones
    }

    /// Number of sites at which `self` and `other` differ. Panics on length
    /// mismatch; the checked public entry point is [`crate::coupling::hamming`].
    #[inline]
    pub(crate) fn hamming_raw(&self, other: &Configuration) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(&a, &b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// The configuration's bits as an integer, site `x` at bit `x`.
    /// Only valid for `n ≤ 63`, which covers every exact-kernel size.
    pub fn as_index(&self) -> usize {
        assert!(self.len < 64, "state index only defined for n < 64");
        self.blocks.first().copied().unwrap_or(0) as usize
    }

    /// Inverse of [`as_index`](Self::as_index) for `n` sites.
    pub fn from_index(n: usize, index: usize) -> Self {
        assert!(n < 64 && (index as u64) < (1u64 << n), "index {index} out of range for n={n}");
        let mut c = Self::all_susceptible(n);
        for x in 0..n {
            if index >> x & 1 == 1 {
                c.set(x, true);
            }
        }
        c
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in 0..self.len {
            write!(f, "{}", if self.get(x) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Parses the `nsis-graph v1` edge-list format. Lenient about CR before LF
/// and about blank lines; strict about everything else. Errors carry 1-based
/// line numbers.
pub fn parse_graph(text: &str) -> Result<MultiGraph> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty input, expected header".into() })?;
    let n = parse_header(header).map_err(|msg| Error::Parse { line: 1, msg })?;
    let mut g = MultiGraph::edgeless(n).map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;

    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (u, v) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(u), Some(v), None) => (u, v),
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected exactly two vertex indices, got {line:?}"),
                })
            }
        };
        let parse_vertex = |tok: &str| -> std::result::Result<usize, String> {
            tok.parse::<usize>().map_err(|_| format!("invalid vertex index {tok:?}"))
        };
        let u = parse_vertex(u).map_err(|msg| Error::Parse { line: line_no, msg })?;
        let v = parse_vertex(v).map_err(|msg| Error::Parse { line: line_no, msg })?;
        if u >= n || v >= n {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("vertex index {} out of range for n={n}", u.max(v)),
            });
        }
        g.add_edge(u, v).expect("endpoints already range-checked");
    }
    Ok(g)
}

fn parse_header(header: &str) -> std::result::Result<usize, String> {
    let mut tokens = header.split_whitespace();
    match (tokens.next(), tokens.next(), tokens.next(), tokens.next()) {
        (Some("nsis-graph"), Some("v1"), Some(n_field), None) => {
            let n_str = n_field
                .strip_prefix("n=")
                .ok_or_else(|| format!("expected n=<N>, got {n_field:?}"))?;
            let n: usize =
                n_str.parse().map_err(|_| format!("invalid vertex count {n_str:?}"))?;
            if n == 0 {
                return Err("graph order n must be >= 1".into());
            }
            Ok(n)
        }
        _ => Err(format!("malformed header {header:?}, expected \"nsis-graph v1 n=<N>\"")),
    }
}

/// Serializes to the canonical `nsis-graph v1` form: header, then one line per
/// edge instance sorted by `(min endpoint, max endpoint)`, LF endings.
pub fn serialize_graph(g: &MultiGraph) -> String {
    let mut out = format!("nsis-graph v1 n={}\n", g.n());
    for (u, v) in g.edge_instances() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}
