//! Seeded random-graph generators.
//!
//! Three families, each a pure function of its parameters and a `u64` seed:
//!
//! * **Erdős–Rényi `G(n, p)`** — every unordered pair independently an edge.
//!   Dense regime uses one Bernoulli draw per pair; below `p < ln n / n` a
//!   geometric skip walk samples the same distribution in `O(n + edges)`.
//! * **Random `d`-regular configuration-model multigraph** — `d` stubs per
//!   vertex, a uniformly random perfect matching of the stub array (shuffle,
//!   then pair consecutive entries). Self-loops and parallel edges are kept;
//!   a loop consumes two stubs, so it adds 2 to stub degree but 0 to the
//!   infection-relevant [`neighbor_degree`](crate::graph::MultiGraph::neighbor_degree).
//!   The number of self-loops `S` has mean `n·C(d,2)/(nd−1) ≈ (d−1)/2`.
//! * **Branching-process (Galton–Watson) trees** — grown breadth-first with
//!   i.i.d. offspring counts until exactly `n_target` vertices exist; excess
//!   children of the vertex being expanded are discarded and any unexpanded
//!   frontier vertices become leaves. Extinct attempts restart on a fresh
//!   seed sub-stream, up to a restart cap.

use rand::distributions::Distribution as _;
use rand::Rng as _;
use rand_distr::{Binomial, Poisson};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::MultiGraph;
use crate::seeding;

/// Offspring distribution of the branching-process generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum OffspringLaw {
    /// Binomial(m, p) children per vertex.
    Binomial { m: u64, p: f64 },
    /// Poisson(theta) children per vertex.
    Poisson { theta: f64 },
}

impl OffspringLaw {
    /// Boundary validation used at configuration time: `0 < p < 1` for the
    /// binomial (degenerate laws are still *samplable*, e.g. `p = 1` in
    /// structural tests, but rejected as experiment input), `theta > 0`.
    pub fn validate(&self) -> Result<()> {
        match *self {
            OffspringLaw::Binomial { m, p } => {
                if m == 0 {
                    return Err(Error::Input("binomial offspring needs m >= 1".into()));
                }
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::Input(format!(
                        "binomial offspring probability must lie in (0, 1), got {p}"
                    )));
                }
                Ok(())
            }
            OffspringLaw::Poisson { theta } => {
                if !(theta > 0.0 && theta.is_finite()) {
                    return Err(Error::Input(format!(
                        "poisson offspring mean must be positive and finite, got {theta}"
                    )));
                }
                Ok(())
            }
        }
    }

    fn sample<R: rand::Rng>(&self, rng: &mut R) -> Result<usize> {
        match *self {
            OffspringLaw::Binomial { m, p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Input(format!("binomial p = {p} outside [0, 1]")));
                }
                let d = Binomial::new(m, p)
                    .map_err(|e| Error::Input(format!("binomial offspring law: {e}")))?;
                Ok(d.sample(rng) as usize)
            }
            OffspringLaw::Poisson { theta } => {
                let d = Poisson::new(theta)
                    .map_err(|e| Error::Input(format!("poisson offspring law: {e}")))?;
                Ok(d.sample(rng) as usize)
            }
        }
    }
}

/// Erdős–Rényi `G(n, p)`: a simple graph, each of the `C(n, 2)` pairs an edge
/// independently with probability `p`. Deterministic per seed.
pub fn gen_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<MultiGraph> {
    if n == 0 {
        return Err(Error::Input("graph order n must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Input(format!("edge probability must lie in [0, 1], got {p}")));
    }
    let mut rng = seeding::master_rng(seed);
    // Same distribution either way; the skip walk only pays for edges that
    // exist, which matters once p drops below ~ln n / n.
    if p >= (n as f64).ln() / n as f64 {
        er_per_pair(n, p, &mut rng)
    } else {
        er_geometric_skip(n, p, &mut rng)
    }
}

fn er_per_pair<R: rand::Rng>(n: usize, p: f64, rng: &mut R) -> Result<MultiGraph> {
    let mut g = MultiGraph::edgeless(n)?;
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < p {
                g.add_edge(u, v)?;
            }
        }
    }
    Ok(g)
}

/// Skip-sampling over the lexicographically ordered pair list: the gap to the
/// next edge is geometric with success probability `p`, drawn as
/// `floor(ln U / ln(1−p))`.
fn er_geometric_skip<R: rand::Rng>(n: usize, p: f64, rng: &mut R) -> Result<MultiGraph> {
    let mut g = MultiGraph::edgeless(n)?;
    if p <= 0.0 {
        return Ok(g);
    }
    let ln_q = (1.0 - p).ln();
    let (mut u, mut v) = (0usize, 0usize); // v = most recent candidate in row u
    let advance = |u: &mut usize, v: &mut usize, by: u64| -> bool {
        let mut by = by;
        loop {
            let row_left = (n - 1 - *v) as u64;
            if by <= row_left {
                *v += by as usize;
                return true;
            }
            by -= row_left;
            *u += 1;
            if *u >= n - 1 {
                return false;
            }
            *v = *u;
        }
    };
    // Position starts one slot before the first pair (0, 1).
    let first_gap = 1 + (rng.gen::<f64>().ln() / ln_q) as u64;
    let mut alive = n >= 2 && advance(&mut u, &mut v, first_gap);
    while alive {
        g.add_edge(u, v)?;
        let gap = 1 + (rng.gen::<f64>().ln() / ln_q) as u64;
        alive = advance(&mut u, &mut v, gap);
    }
    Ok(g)
}

/// Random `d`-regular multigraph from the configuration model: `d` stubs per
/// vertex, uniformly shuffled and paired consecutively. Requires `n·d` even.
pub fn gen_regular_multigraph(n: usize, d: usize, seed: u64) -> Result<MultiGraph> {
    if n == 0 {
        return Err(Error::Input("graph order n must be >= 1".into()));
    }
    if !(n * d).is_multiple_of(2) {
        return Err(Error::Input(format!(
            "configuration model needs an even stub count, got n*d = {}",
            n * d
        )));
    }
    let mut rng = seeding::master_rng(seed);
    let mut stubs: Vec<u32> = (0..n).flat_map(|v| std::iter::repeat_n(v as u32, d)).collect();
    // Fisher–Yates; a uniform permutation paired consecutively induces a
    // uniform perfect matching of the stub set.
    for i in (1..stubs.len()).rev() {
        stubs.swap(i, rng.gen_range(0..=i));
    }
    let mut g = MultiGraph::edgeless(n)?;
    for pair in stubs.chunks_exact(2) {
        g.add_edge(pair[0] as usize, pair[1] as usize)?;
    }
    debug_assert!((0..n).all(|v| {
        g.degree_raw(v) + 2 * g.loops_at(crate::graph::VertexId(v)).unwrap() == d
    }));
    Ok(g)
}

/// Count of self-loop edge instances (the statistic `S` of the configuration
/// model).
pub fn count_self_loops(g: &MultiGraph) -> usize {
    g.self_loop_count()
}

/// How a branching-process tree was grown.
#[derive(Debug, Clone, Serialize)]
pub struct GwMeta {
    /// Vertices per generation, root generation first; sums to the tree size.
    pub generation_sizes: Vec<usize>,
    /// Extinct attempts discarded before the returned tree.
    pub restarts: u64,
    /// Whether growth was cut by the size target (children discarded or
    /// frontier vertices left unexpanded).
    pub truncated: bool,
}

const GW_RESTART_CAP: u64 = 1_000_000;

/// Grows a branching-process tree breadth-first to exactly `n_target`
/// vertices. Attempt `k` draws from seed sub-stream `k`; extinct attempts
/// restart until the cap of 10⁶ is exhausted.
pub fn gen_galton_watson(
    law: &OffspringLaw,
    n_target: usize,
    seed: u64,
) -> Result<(MultiGraph, GwMeta)> {
    if n_target == 0 {
        return Err(Error::Input("tree size target must be >= 1".into()));
    }
    let mut restarts = 0u64;
    loop {
        let mut rng = seeding::stream_rng(seed, restarts);
        if let Some((g, mut meta)) = grow_attempt(law, n_target, &mut rng)? {
            meta.restarts = restarts;
            return Ok((g, meta));
        }
        restarts += 1;
        if restarts >= GW_RESTART_CAP {
            return Err(Error::Generation(format!(
                "branching process went extinct {GW_RESTART_CAP} times before reaching \
                 {n_target} vertices; the offspring law is too subcritical"
            )));
        }
    }
}

/// One growth attempt; `None` means the process died before `n_target`.
fn grow_attempt<R: rand::Rng>(
    law: &OffspringLaw,
    n_target: usize,
    rng: &mut R,
) -> Result<Option<(MultiGraph, GwMeta)>> {
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(n_target.saturating_sub(1));
    let mut generation_of: Vec<u32> = Vec::with_capacity(n_target);
    generation_of.push(0);
    let mut created = 1usize;
    let mut expand = 0usize;
    let mut truncated = false;

    while created < n_target && expand < created {
        let wanted = law.sample(rng)?;
        let room = n_target - created;
        let take = wanted.min(room);
        if take < wanted {
            truncated = true; // excess children of this vertex are discarded
        }
        for _ in 0..take {
            edges.push((expand, created));
            generation_of.push(generation_of[expand] + 1);
            created += 1;
        }
        expand += 1;
    }
    if created < n_target {
        return Ok(None); // extinction before the target
    }
    if expand < created {
        truncated = true; // unexpanded frontier vertices become leaves
    }
    let mut generation_sizes = Vec::new();
    for &gen in &generation_of {
        let gen = gen as usize;
        if generation_sizes.len() <= gen {
            generation_sizes.resize(gen + 1, 0);
        }
        generation_sizes[gen] += 1;
    }
    let g = MultiGraph::from_edges(n_target, edges)?;
    Ok(Some((g, GwMeta { generation_sizes, restarts: 0, truncated })))
}

/// Report of the degree-based applicability condition `λ·Δ_max < n^{−α}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DegreeConditionReport {
    pub n: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub max_degree: usize,
    /// `λ·Δ_max`.
    pub lhs: f64,
    /// `n^{−α}`.
    pub rhs: f64,
    pub satisfied: bool,
}

/// Checks `λ·Δ_max < n^{−α}` on a concrete graph.
pub fn check_degree_condition(g: &MultiGraph, lambda: f64, alpha: f64) -> DegreeConditionReport {
    let max_degree = g.max_degree();
    let lhs = lambda * max_degree as f64;
    let rhs = (g.n() as f64).powf(-alpha);
    DegreeConditionReport {
        n: g.n(),
        alpha,
        lambda,
        max_degree,
        lhs,
        rhs,
        satisfied: lhs < rhs,
    }
}
