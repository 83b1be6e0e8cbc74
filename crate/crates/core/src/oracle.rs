//! Exact finite-state analysis of the noisy SIS chain.
//!
//! For `n` vertices the chain lives on `2^n` configurations, so every
//! quantity the Monte Carlo side estimates can be computed to floating-point
//! accuracy from dense transition matrices:
//!
//! * [`build_kernel`] — the single-chain transition matrix, indexed by the
//!   bit encoding of [`Configuration`] (vertex `v` is bit `v`).
//! * [`stationary`] — the stationary distribution, by direct linear solve for
//!   moderate sizes and by power iteration beyond, always verified against
//!   the residual `‖πK − π‖₁`.
//! * [`distance_profile`] / [`exact_tmix`] — worst-case total-variation
//!   distance `d(t)`, its pairwise variant `d̄(t)`, and the exact mixing time
//!   via repeated squaring and bisection (valid because `d` is
//!   nonincreasing).
//! * [`build_coupled_kernel`] / [`exact_coupling_tail`] — the transition
//!   matrix of a coupled pair of chains (pair `(σ, η)` ↦ index
//!   `(σ_idx << n) | η_idx`), and the exact worst-pair coalescence tail
//!   `sup P(τ > t)`, which dominates `d(t)`.
//! * [`exact_contraction_check`] — per adjacent pair (configurations
//!   differing at a single vertex), the exact one-step expected Hamming
//!   distance under the independent-flip coupling, against the closed-form
//!   bracket `1 − β/n ≤ E[ρ₁] ≤ 1 − γ/n`.
//! * [`exact_second_moment_check`] — the exact `E[ρ_t²]` for every starting
//!   pair against the drift bound `ρ₀²(1 − 2γ/n)^t + n/(2γ)`.
//!
//! Matrices are dense row-major `Vec<f64>`; a kernel on `n` vertices costs
//! `4^n` floats and the coupled kernel `16^n`, which is what the default
//! size caps protect against.

use rayon::prelude::*;
use serde::Serialize;

use crate::coupling::CouplingKind;
use crate::dynamics::{beta_const, check_regime, gamma_const, Chain, Params, RegimeReport};
use crate::error::{Error, Result};
use crate::graph::{Configuration, MultiGraph};

/// Largest `n` accepted by [`build_kernel`] (a `2^14 × 2^14` matrix is 2 GiB).
pub const EXACT_SINGLE_CAP: usize = 14;
/// Largest `n` accepted by [`build_coupled_kernel`] (`4^7 × 4^7` is 2 GiB).
pub const EXACT_COUPLED_CAP: usize = 7;
/// Hard ceiling for the cap-override constructors: beyond this the dense
/// representation cannot be allocated on any realistic machine.
const ABSOLUTE_SINGLE_CAP: usize = 20;
const ABSOLUTE_COUPLED_CAP: usize = 10;

/// Stationary solves switch from a direct LU solve to power iteration above
/// this dimension.
const LU_MAX_DIM: usize = 4096;
/// Acceptable `‖πK − π‖₁` for a stationary distribution.
pub const STATIONARY_RESIDUAL_TOL: f64 = 1e-12;

/// Dense transition matrix of the single chain on `2^n` configurations.
#[derive(Debug, Clone)]
pub struct Kernel {
    n: usize,
    dim: usize,
    rows: Vec<f64>,
}

impl Kernel {
    /// Number of vertices of the underlying graph.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of states, `2^n`.
    pub fn n_states(&self) -> usize {
        self.dim
    }

    /// Transition probabilities out of configuration index `s`.
    pub fn row(&self, s: usize) -> &[f64] {
        &self.rows[s * self.dim..(s + 1) * self.dim]
    }

    pub fn entry(&self, from: usize, to: usize) -> f64 {
        self.rows[from * self.dim + to]
    }
}

/// Builds the one-step transition matrix under the default size cap
/// [`EXACT_SINGLE_CAP`].
pub fn build_kernel(g: &MultiGraph, params: &Params) -> Result<Kernel> {
    build_kernel_with_cap(g, params, EXACT_SINGLE_CAP)
}

/// [`build_kernel`] with an explicit size cap, for callers that accept the
/// memory cost (or want a tighter limit).
pub fn build_kernel_with_cap(g: &MultiGraph, params: &Params, cap: usize) -> Result<Kernel> {
    let n = g.n();
    if n > cap.min(ABSOLUTE_SINGLE_CAP) {
        return Err(Error::Resource(format!(
            "exact kernel needs 4^n floats: n = {n} exceeds the cap {}",
            cap.min(ABSOLUTE_SINGLE_CAP)
        )));
    }
    let chain = Chain::new(g, *params)?;
    let dim = 1usize << n;
    let inv_n = 1.0 / n as f64;
    let mut rows = vec![0.0; dim * dim];
    for s in 0..dim {
        let sigma = Configuration::from_index(n, s);
        let row = &mut rows[s * dim..(s + 1) * dim];
        for x in 0..n {
            let p = chain.flip_prob(&sigma, x);
            row[s ^ (1 << x)] += p * inv_n;
            row[s] += (1.0 - p) * inv_n;
        }
    }
    Ok(Kernel { n, dim, rows })
}

/// A probability distribution over state indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates and normalizes: entries must be finite, nonnegative up to
    /// `−1e−12` (tiny negatives are clamped), and sum to 1 within `1e−9`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Input("a distribution needs at least one state".into()));
        }
        let mut probs = probs;
        for p in &mut probs {
            if !p.is_finite() || *p < -1e-12 {
                return Err(Error::Input(format!("invalid probability mass {p}")));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Input(format!("masses sum to {sum}, expected 1")));
        }
        for p in &mut probs {
            *p /= sum;
        }
        Ok(Distribution { probs })
    }

    pub fn point_mass(state: usize, n_states: usize) -> Self {
        let mut probs = vec![0.0; n_states];
        probs[state] = 1.0;
        Distribution { probs }
    }

    pub fn uniform(n_states: usize) -> Self {
        Distribution { probs: vec![1.0 / n_states as f64; n_states] }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, state: usize) -> f64 {
        self.probs[state]
    }
}

/// Total-variation distance `½ Σ |p_i − q_i|`.
pub fn tv(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Input(format!(
            "total variation undefined between {} and {} states",
            p.len(),
            q.len()
        )));
    }
    Ok(tv_slices(p.probs(), q.probs()))
}

fn tv_slices(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// `π ← πK` (left multiplication by a row vector).
fn left_mul(k: &Kernel, v: &[f64]) -> Vec<f64> {
    let dim = k.dim;
    let mut out = vec![0.0; dim];
    for (i, &vi) in v.iter().enumerate() {
        if vi != 0.0 {
            let row = &k.rows[i * dim..(i + 1) * dim];
            for (o, &kij) in out.iter_mut().zip(row) {
                *o += vi * kij;
            }
        }
    }
    out
}

fn stationary_residual(k: &Kernel, pi: &[f64]) -> f64 {
    let next = left_mul(k, pi);
    next.iter().zip(pi).map(|(a, b)| (a - b).abs()).sum()
}

/// Direct solve of `πK = π, Σπ = 1`: LU-factor `Kᵀ − I` with its last
/// equation replaced by the normalization row.
fn stationary_lu(k: &Kernel) -> Result<Vec<f64>> {
    let dim = k.dim;
    let a = nalgebra::DMatrix::from_fn(dim, dim, |r, c| {
        if r == dim - 1 {
            1.0
        } else {
            k.entry(c, r) - if r == c { 1.0 } else { 0.0 }
        }
    });
    let mut b = nalgebra::DVector::zeros(dim);
    b[dim - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numerical("stationary system is singular".into()))?;
    Ok(x.iter().copied().collect())
}

const POWER_MAX_ITERS: usize = 200_000;
const POWER_DELTA_TOL: f64 = 1e-13;

/// Power iteration `π ← πK` from uniform, for dimensions where a dense LU is
/// too expensive.
fn stationary_power(k: &Kernel) -> Result<Vec<f64>> {
    let mut v = vec![1.0 / k.dim as f64; k.dim];
    for _ in 0..POWER_MAX_ITERS {
        let next = left_mul(k, &v);
        let delta: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
        v = next;
        if delta <= POWER_DELTA_TOL {
            return Ok(v);
        }
    }
    Err(Error::Numerical(format!(
        "power iteration did not reach delta <= {POWER_DELTA_TOL} within {POWER_MAX_ITERS} sweeps"
    )))
}

/// Stationary distribution of `k`, verified to satisfy
/// `‖πK − π‖₁ ≤` [`STATIONARY_RESIDUAL_TOL`].
pub fn stationary(k: &Kernel) -> Result<Distribution> {
    let raw = if k.dim <= LU_MAX_DIM { stationary_lu(k)? } else { stationary_power(k)? };
    let mut pi = raw;
    for p in &mut pi {
        if !p.is_finite() || *p < -1e-9 {
            return Err(Error::Numerical(format!("stationary solve produced mass {p}")));
        }
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let sum: f64 = pi.iter().sum();
    if sum.is_nan() || sum <= 0.0 {
        return Err(Error::Numerical("stationary solve produced zero total mass".into()));
    }
    for p in &mut pi {
        *p /= sum;
    }
    let residual = stationary_residual(k, &pi);
    if residual > STATIONARY_RESIDUAL_TOL {
        return Err(Error::Numerical(format!(
            "stationary residual {residual:.3e} exceeds {STATIONARY_RESIDUAL_TOL:.0e}"
        )));
    }
    Distribution::from_probs(pi)
}

/// Dense row-major product `AB` for square matrices.
fn mat_mul(a: &[f64], b: &[f64], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim * dim];
    out.par_chunks_mut(dim).enumerate().for_each(|(i, row)| {
        let a_row = &a[i * dim..(i + 1) * dim];
        for (kk, &aik) in a_row.iter().enumerate() {
            if aik != 0.0 {
                let b_row = &b[kk * dim..(kk + 1) * dim];
                for (o, &bkj) in row.iter_mut().zip(b_row) {
                    *o += aik * bkj;
                }
            }
        }
    });
    out
}

/// Dense matrix-vector product `Av`.
fn mat_vec(a: &[f64], v: &[f64], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    out.par_iter_mut().enumerate().for_each(|(i, o)| {
        let row = &a[i * dim..(i + 1) * dim];
        *o = row.iter().zip(v).map(|(x, y)| x * y).sum();
    });
    out
}

/// `max_s ‖M(s,·) − π‖_TV` over the rows of a `t`-step matrix.
fn worst_row_distance(m: &[f64], pi: &[f64], dim: usize) -> f64 {
    (0..dim)
        .into_par_iter()
        .map(|s| tv_slices(&m[s * dim..(s + 1) * dim], pi))
        .reduce(|| 0.0, f64::max)
}

/// `max_{s,e} ‖M(s,·) − M(e,·)‖_TV` over row pairs.
fn worst_row_pair_distance(m: &[f64], dim: usize) -> f64 {
    (0..dim)
        .into_par_iter()
        .map(|s| {
            let row_s = &m[s * dim..(s + 1) * dim];
            let mut best: f64 = 0.0;
            for e in (s + 1)..dim {
                best = best.max(tv_slices(row_s, &m[e * dim..(e + 1) * dim]));
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// One row of a worst-case distance profile.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfilePoint {
    pub t: u64,
    /// `d(t) = max_σ ‖K^t(σ,·) − π‖_TV`.
    pub d: f64,
    /// `d̄(t) = max_{σ,η} ‖K^t(σ,·) − K^t(η,·)‖_TV`.
    pub d_bar: f64,
}

/// Exact `d(t)` and `d̄(t)` for `t = 0, …, t_max`.
///
/// Costs one `2^n × 2^n` matrix product per step plus an `O(4^n)` pass for
/// `d` and an `O(8^n)` pass for `d̄`, so keep `t_max` moderate at larger `n`.
pub fn distance_profile(k: &Kernel, t_max: u64) -> Result<Vec<ProfilePoint>> {
    let pi = stationary(k)?;
    let dim = k.dim;
    let mut m: Vec<f64> = (0..dim * dim)
        .map(|idx| if idx / dim == idx % dim { 1.0 } else { 0.0 })
        .collect();
    let mut points = Vec::with_capacity(t_max as usize + 1);
    for t in 0..=t_max {
        points.push(ProfilePoint {
            t,
            d: worst_row_distance(&m, pi.probs(), dim),
            d_bar: worst_row_pair_distance(&m, dim),
        });
        if t < t_max {
            m = mat_mul(&m, &k.rows, dim);
        }
    }
    Ok(points)
}

/// Result of an exact mixing-time computation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExactTmix {
    /// Smallest `t` with `d(t) ≤ ε`.
    pub t: u64,
    /// The distance actually achieved at `t`.
    pub d_at_t: f64,
    pub epsilon: f64,
}

/// Exponent guard for the doubling phase; any healthy chain on a capped
/// state space mixes astronomically sooner.
const TMIX_EXP_CAP: u32 = 40;

/// Composes `K^t` from cached squarings `K^{2^j}` along the binary expansion
/// of `t ≥ 1`.
fn compose_power(cache: &[Vec<f64>], t: u64, dim: usize) -> Vec<f64> {
    debug_assert!(t >= 1);
    let mut acc: Option<Vec<f64>> = None;
    for (j, mat) in cache.iter().enumerate() {
        if t & (1u64 << j) != 0 {
            acc = Some(match acc {
                None => mat.clone(),
                Some(prev) => mat_mul(&prev, mat, dim),
            });
        }
    }
    acc.expect("t >= 1 has at least one set bit")
}

/// Exact mixing time `t_mix(ε) = min { t : d(t) ≤ ε }`.
///
/// Doubles through `K, K², K⁴, …` until the distance drops below `ε`, then
/// bisects; monotonicity of `d` makes the bisection exact.
pub fn exact_tmix(k: &Kernel, eps: f64) -> Result<ExactTmix> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Input(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    let pi = stationary(k)?;
    let dim = k.dim;
    let d0 = 1.0 - pi.probs().iter().copied().fold(f64::INFINITY, f64::min);
    if d0 <= eps {
        return Ok(ExactTmix { t: 0, d_at_t: d0, epsilon: eps });
    }

    // Doubling phase: cache[j] = K^(2^j).
    let mut cache: Vec<Vec<f64>> = vec![k.rows.clone()];
    let mut hi_exp = 0u32;
    let mut d_hi;
    loop {
        d_hi = worst_row_distance(&cache[hi_exp as usize], pi.probs(), dim);
        if d_hi <= eps {
            break;
        }
        if hi_exp >= TMIX_EXP_CAP {
            return Err(Error::Numerical(format!(
                "distance still {d_hi} above epsilon = {eps} after 2^{TMIX_EXP_CAP} steps"
            )));
        }
        let squared = mat_mul(&cache[hi_exp as usize], &cache[hi_exp as usize], dim);
        cache.push(squared);
        hi_exp += 1;
    }

    let mut hi = 1u64 << hi_exp;
    let mut lo = hi / 2; // d(lo) > eps: established by the previous doubling step
    let mut d_at_hi = d_hi;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let m = compose_power(&cache, mid, dim);
        let d = worst_row_distance(&m, pi.probs(), dim);
        if d <= eps {
            hi = mid;
            d_at_hi = d;
        } else {
            lo = mid;
        }
    }
    Ok(ExactTmix { t: hi, d_at_t: d_at_hi, epsilon: eps })
}

/// Dense transition matrix of the coupled pair chain on `4^n` states.
///
/// Pair `(σ, η)` is indexed as `(σ_idx << n) | η_idx`. The diagonal
/// `σ = η` is closed: coalesced pairs move jointly.
#[derive(Debug, Clone)]
pub struct CoupledKernel {
    n: usize,
    dim: usize,
    kind: CouplingKind,
    rows: Vec<f64>,
}

impl CoupledKernel {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of pair states, `4^n`.
    pub fn n_pairs(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> CouplingKind {
        self.kind
    }

    /// Index of the pair `(σ_idx, η_idx)`.
    pub fn pair_index(&self, sigma_idx: usize, eta_idx: usize) -> usize {
        (sigma_idx << self.n) | eta_idx
    }

    /// Hamming distance between the two halves of a pair index.
    pub fn rho(&self, pair: usize) -> u32 {
        let mask = (1usize << self.n) - 1;
        (((pair >> self.n) & mask) ^ (pair & mask)).count_ones()
    }

    pub fn row(&self, pair: usize) -> &[f64] {
        &self.rows[pair * self.dim..(pair + 1) * self.dim]
    }

    pub fn entry(&self, from: usize, to: usize) -> f64 {
        self.rows[from * self.dim + to]
    }
}

/// Joint law of one coupled flip: probabilities of (σ flips, η flips) being
/// (both, σ only, η only, neither).
fn joint_flip_probs(kind: CouplingKind, p_sigma: f64, p_eta: f64) -> [f64; 4] {
    match kind {
        CouplingKind::Independent => [
            p_sigma * p_eta,
            p_sigma * (1.0 - p_eta),
            (1.0 - p_sigma) * p_eta,
            (1.0 - p_sigma) * (1.0 - p_eta),
        ],
        CouplingKind::CommonUniform => {
            let both = p_sigma.min(p_eta);
            [
                both,
                p_sigma - both,
                p_eta - both,
                1.0 - p_sigma.max(p_eta),
            ]
        }
    }
}

/// Builds the coupled-pair transition matrix under the default cap
/// [`EXACT_COUPLED_CAP`].
pub fn build_coupled_kernel(
    g: &MultiGraph,
    params: &Params,
    kind: CouplingKind,
) -> Result<CoupledKernel> {
    build_coupled_kernel_with_cap(g, params, kind, EXACT_COUPLED_CAP)
}

/// [`build_coupled_kernel`] with an explicit size cap.
pub fn build_coupled_kernel_with_cap(
    g: &MultiGraph,
    params: &Params,
    kind: CouplingKind,
    cap: usize,
) -> Result<CoupledKernel> {
    let n = g.n();
    if n > cap.min(ABSOLUTE_COUPLED_CAP) {
        return Err(Error::Resource(format!(
            "coupled kernel needs 16^n floats: n = {n} exceeds the cap {}",
            cap.min(ABSOLUTE_COUPLED_CAP)
        )));
    }
    let chain = Chain::new(g, *params)?;
    let states = 1usize << n;
    let dim = states * states;
    let inv_n = 1.0 / n as f64;
    let mut rows = vec![0.0; dim * dim];
    for s in 0..states {
        let sigma = Configuration::from_index(n, s);
        for e in 0..states {
            let eta = Configuration::from_index(n, e);
            let pair = (s << n) | e;
            let row = &mut rows[pair * dim..(pair + 1) * dim];
            for x in 0..n {
                let p_sigma = chain.flip_prob(&sigma, x);
                if s == e {
                    // Coalesced: one coin moves both chains.
                    let flipped = ((s ^ (1 << x)) << n) | (e ^ (1 << x));
                    row[flipped] += p_sigma * inv_n;
                    row[pair] += (1.0 - p_sigma) * inv_n;
                } else {
                    let p_eta = chain.flip_prob(&eta, x);
                    let [both, only_s, only_e, neither] =
                        joint_flip_probs(kind, p_sigma, p_eta);
                    row[((s ^ (1 << x)) << n) | (e ^ (1 << x))] += both * inv_n;
                    row[((s ^ (1 << x)) << n) | e] += only_s * inv_n;
                    row[(s << n) | (e ^ (1 << x))] += only_e * inv_n;
                    row[pair] += neither * inv_n;
                }
            }
        }
    }
    Ok(CoupledKernel { n, dim, kind, rows })
}

/// One point of an exact coalescence tail.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailPoint {
    pub t: u64,
    /// `sup over starting pairs of P(τ > t)`.
    pub sup_tail: f64,
}

/// Exact worst-pair coalescence tail on the requested grid.
///
/// Uses that the diagonal is closed: with `v₀ = 1` off the diagonal and
/// `v_{t+1} = K_pair v_t`, the entry `v_t(σ, η)` is exactly `P(τ > t)` from
/// that pair, so the supremum is a max over the vector.
pub fn exact_coupling_tail(ck: &CoupledKernel, t_grid: &[u64]) -> Result<Vec<TailPoint>> {
    if t_grid.is_empty() {
        return Err(Error::Input("tail grid must be non-empty".into()));
    }
    let t_max = *t_grid.iter().max().expect("non-empty grid");
    let dim = ck.dim;
    let mut v: Vec<f64> = (0..dim).map(|m| if ck.rho(m) > 0 { 1.0 } else { 0.0 }).collect();
    let mut sup_at: Vec<f64> = Vec::with_capacity(t_max as usize + 1);
    for t in 0..=t_max {
        sup_at.push(v.iter().copied().fold(0.0, f64::max));
        if t < t_max {
            v = mat_vec(&ck.rows, &v, dim);
        }
    }
    Ok(t_grid.iter().map(|&t| TailPoint { t, sup_tail: sup_at[t as usize] }).collect())
}

/// Exact one-step contraction audit over all adjacent pairs.
#[derive(Debug, Clone, Serialize)]
pub struct ContractionCheck {
    pub n: usize,
    pub gamma: f64,
    pub beta: f64,
    /// `1 − γ/n`: the contraction bound every adjacent pair must respect.
    pub upper_bound: f64,
    /// `1 − β/n`: no adjacent pair can contract faster than this.
    pub lower_bound: f64,
    pub max_expected_rho1: f64,
    pub max_pair: String,
    pub min_expected_rho1: f64,
    pub min_pair: String,
    pub max_ok: bool,
    pub min_ok: bool,
    pub tolerance: f64,
    pub regime: RegimeReport,
}

/// Tolerance for the exact contraction and second-moment comparisons: pure
/// float roundoff on quantities of order 1.
pub const EXACT_CHECK_TOL: f64 = 1e-12;

/// Exactly computes `E[ρ₁]` from every adjacent pair `(σ, σ with x flipped)`
/// under the independent-flip coupling and compares against
/// `[1 − β/n, 1 − γ/n]`.
///
/// At each vertex `y` the flips disagree with probability
/// `p_σ(y)(1 − p_η(y)) + (1 − p_σ(y)) p_η(y)`; at the disagreeing vertex
/// that resolves the difference, anywhere else it splits, so
/// `E[ρ₁] = 1 + (Σ_{y≠x} split_y − resolve_x)/n`. Enumeration over all
/// `2^{n−1} · n` pairs, no matrix is materialized.
pub fn exact_contraction_check(g: &MultiGraph, params: &Params) -> Result<ContractionCheck> {
    let n = g.n();
    if n < 2 {
        return Err(Error::Precondition(
            "contraction audit needs n >= 2 (gamma involves n - 1)".into(),
        ));
    }
    if n > EXACT_SINGLE_CAP {
        return Err(Error::Resource(format!(
            "contraction audit enumerates 2^n configurations: n = {n} exceeds {EXACT_SINGLE_CAP}"
        )));
    }
    let chain = Chain::new(g, *params)?;
    let regime = check_regime(params, n, g.max_degree(), None)?;
    let gamma = gamma_const(params, n);
    let beta = beta_const(g, params);
    let states = 1usize << n;
    let inv_n = 1.0 / n as f64;

    struct Extremum {
        value: f64,
        state: usize,
        vertex: usize,
    }
    let mut max = Extremum { value: f64::NEG_INFINITY, state: 0, vertex: 0 };
    let mut min = Extremum { value: f64::INFINITY, state: 0, vertex: 0 };
    for s in 0..states {
        let sigma = Configuration::from_index(n, s);
        for x in 0..n {
            // Each unordered pair once: take the copy where x is susceptible.
            if sigma.get(x) {
                continue;
            }
            let mut eta = sigma.clone();
            eta.flip(x);
            let mut drift = 0.0;
            for y in 0..n {
                let p_s = chain.flip_prob(&sigma, y);
                let p_e = chain.flip_prob(&eta, y);
                let differ = p_s * (1.0 - p_e) + (1.0 - p_s) * p_e;
                if y == x {
                    drift -= differ; // resolves the disagreement
                } else {
                    drift += differ; // splits an agreeing vertex
                }
            }
            let expected = 1.0 + drift * inv_n;
            if expected > max.value {
                max = Extremum { value: expected, state: s, vertex: x };
            }
            if expected < min.value {
                min = Extremum { value: expected, state: s, vertex: x };
            }
        }
    }

    let describe = |e: &Extremum| {
        format!("base={} vertex={}", Configuration::from_index(n, e.state), e.vertex)
    };
    let upper_bound = 1.0 - gamma / n as f64;
    let lower_bound = 1.0 - beta / n as f64;
    Ok(ContractionCheck {
        n,
        gamma,
        beta,
        upper_bound,
        lower_bound,
        max_expected_rho1: max.value,
        max_pair: describe(&max),
        min_expected_rho1: min.value,
        min_pair: describe(&min),
        max_ok: max.value <= upper_bound + EXACT_CHECK_TOL,
        min_ok: min.value >= lower_bound - EXACT_CHECK_TOL,
        tolerance: EXACT_CHECK_TOL,
        regime,
    })
}

/// Exact audit of the pair second-moment drift bound.
#[derive(Debug, Clone, Serialize)]
pub struct SecondMomentCheck {
    pub n: usize,
    pub gamma: f64,
    pub t_max: u64,
    /// The additive term `n/(2γ)` the bound settles to.
    pub asymptote: f64,
    /// `max over t ≤ t_max and starting pairs of E[ρ_t²] − bound(t)`;
    /// negative means the bound holds strictly everywhere.
    pub worst_excess: f64,
    pub worst_t: u64,
    pub worst_pair_rho0: u32,
    pub ok: bool,
    /// `E[ρ_t²]` from the all-susceptible / all-infected pair, `t = 0, …`.
    pub extremal_curve: Vec<f64>,
    pub tolerance: f64,
}

/// Tolerance for the second-moment audit: roundoff accumulated across
/// `t_max` dense matrix-vector products on values of order `n²`.
pub const SECOND_MOMENT_TOL: f64 = 1e-9;

/// Exactly evolves `E[ρ_t²]` for every starting pair under the
/// independent-flip coupling and compares against
/// `ρ₀² (1 − 2γ/n)^t + n/(2γ)` for all `t ≤ t_max`.
pub fn exact_second_moment_check(
    g: &MultiGraph,
    params: &Params,
    t_max: u64,
) -> Result<SecondMomentCheck> {
    let n = g.n();
    if n < 2 {
        return Err(Error::Precondition(
            "second-moment audit needs n >= 2 (gamma involves n - 1)".into(),
        ));
    }
    let gamma = gamma_const(params, n);
    if gamma <= 0.0 {
        return Err(Error::Domain(format!(
            "gamma = {gamma} <= 0: the drift bound degenerates for these parameters"
        )));
    }
    let ck = build_coupled_kernel(g, params, CouplingKind::Independent)?;
    let dim = ck.n_pairs();
    let rho_sq: Vec<f64> = (0..dim).map(|m| {
        let r = ck.rho(m) as f64;
        r * r
    }).collect();
    let asymptote = n as f64 / (2.0 * gamma);
    let ratio = 1.0 - 2.0 * gamma / n as f64;
    let extremal = ck.pair_index(0, (1usize << n) - 1);

    let mut v = rho_sq.clone();
    let mut extremal_curve = Vec::with_capacity(t_max as usize + 1);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_t = 0u64;
    let mut worst_pair_rho0 = 0u32;
    let mut decay = 1.0; // (1 − 2γ/n)^t
    for t in 0..=t_max {
        extremal_curve.push(v[extremal]);
        for (m, &second_moment) in v.iter().enumerate() {
            let excess = second_moment - (rho_sq[m] * decay + asymptote);
            if excess > worst_excess {
                worst_excess = excess;
                worst_t = t;
                worst_pair_rho0 = ck.rho(m);
            }
        }
        if t < t_max {
            v = mat_vec(&ck.rows, &v, dim);
            decay *= ratio;
        }
    }
    Ok(SecondMomentCheck {
        n,
        gamma,
        t_max,
        asymptote,
        worst_excess,
        worst_t,
        worst_pair_rho0,
        ok: worst_excess <= SECOND_MOMENT_TOL,
        extremal_curve,
        tolerance: SECOND_MOMENT_TOL,
    })
}
