//! Couplings of two noisy SIS chains and what they say about mixing.
//!
//! Both chains see the *same* uniformly chosen vertex each step; they differ
//! in how the flip randomness is shared:
//!
//! * [`CouplingKind::Independent`] — until the chains meet, the two flips at
//!   the chosen vertex use independent uniforms (this is the coupling behind
//!   the contraction constant `γ`: an adjacent pair — equal everywhere except
//!   one vertex — contracts its expected Hamming distance to at most
//!   `1 − γ/n`, and at least `1 − β/n`). After the chains meet they move
//!   identically forever.
//! * [`CouplingKind::CommonUniform`] — one uniform drives both flips
//!   (infect iff `U < p(·, x)`, recover iff `U < κ`). Typically coalesces
//!   faster, but it is *not* the coupling the contraction analysis assumes,
//!   so the exact contraction checks reject it.
//!
//! Either way each marginal is exactly the single chain, one coupled step
//! changes the Hamming distance by at most 1, and the coalescence time `τ`
//! dominates total-variation mixing: `d(t) ≤ sup over initial pairs of
//! P(τ > t)`, which [`tmix_upper_estimate`] turns into a Monte Carlo mixing
//! estimate.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{Chain, Params};
use crate::error::{Error, Result};
use crate::graph::{Configuration, MultiGraph};
use crate::seeding;

/// How flip randomness is shared between the two chains at the chosen vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingKind {
    /// Independent flip coins until coalescence, identical motion after.
    Independent,
    /// A single uniform thresholded against both chains' flip probabilities.
    CommonUniform,
}

impl CouplingKind {
    pub fn name(&self) -> &'static str {
        match self {
            CouplingKind::Independent => "independent",
            CouplingKind::CommonUniform => "common-uniform",
        }
    }
}

/// Hamming distance between two configurations of equal length.
pub fn hamming(a: &Configuration, b: &Configuration) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::Input(format!(
            "hamming distance undefined for lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.hamming_raw(b))
}

/// Joint state of the two coupled chains.
#[derive(Debug, Clone)]
pub struct CoupledState {
    sigma: Configuration,
    eta: Configuration,
    /// Current Hamming distance, maintained incrementally so coalescence
    /// detection is O(1) per step.
    rho: usize,
}

impl CoupledState {
    pub fn new(sigma: Configuration, eta: Configuration) -> Result<Self> {
        let rho = hamming(&sigma, &eta)?;
        Ok(CoupledState { sigma, eta, rho })
    }

    /// The extremal pair: all-susceptible vs all-infected.
    pub fn extremal(n: usize) -> Self {
        CoupledState {
            sigma: Configuration::all_susceptible(n),
            eta: Configuration::all_infected(n),
            rho: n,
        }
    }

    #[inline]
    pub fn sigma(&self) -> &Configuration {
        &self.sigma
    }

    #[inline]
    pub fn eta(&self) -> &Configuration {
        &self.eta
    }

    /// Hamming distance between the two chains.
    #[inline]
    pub fn rho(&self) -> usize {
        self.rho
    }

    /// Whether the chains have met (and therefore move together forever).
    #[inline]
    pub fn coalesced(&self) -> bool {
        self.rho == 0
    }
}

/// A validated coupled chain: graph + parameters + coupling kind.
pub struct CoupledChain<'g> {
    chain: Chain<'g>,
    kind: CouplingKind,
}

impl<'g> CoupledChain<'g> {
    pub fn new(graph: &'g MultiGraph, params: Params, kind: CouplingKind) -> Result<Self> {
        Ok(CoupledChain { chain: Chain::new(graph, params)?, kind })
    }

    #[inline]
    pub fn kind(&self) -> CouplingKind {
        self.kind
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.chain.n()
    }

    /// Advances the pair by one step in place.
    ///
    /// Draw order is fixed: the shared vertex choice first, then the flip
    /// coin(s) — two independent coins for [`CouplingKind::Independent`]
    /// before coalescence (σ's first), one shared coin otherwise.
    pub fn step<R: rand::Rng>(&self, state: &mut CoupledState, rng: &mut R) {
        let rho_before = state.rho;
        let x = rng.gen_range(0..self.n());
        let p_sigma = self.chain.flip_prob(&state.sigma, x);
        if state.coalesced() {
            // Identity coupling after meeting: one coin moves both chains.
            let u: f64 = rng.gen();
            if u < p_sigma {
                state.sigma.flip(x);
                state.eta.flip(x);
            }
        } else {
            let p_eta = self.chain.flip_prob(&state.eta, x);
            let (flip_sigma, flip_eta) = match self.kind {
                CouplingKind::Independent => {
                    let u_sigma: f64 = rng.gen();
                    let u_eta: f64 = rng.gen();
                    (u_sigma < p_sigma, u_eta < p_eta)
                }
                CouplingKind::CommonUniform => {
                    let u: f64 = rng.gen();
                    (u < p_sigma, u < p_eta)
                }
            };
            let disagreed = state.sigma.get(x) != state.eta.get(x);
            if flip_sigma {
                state.sigma.flip(x);
            }
            if flip_eta {
                state.eta.flip(x);
            }
            let disagree_now = state.sigma.get(x) != state.eta.get(x);
            match (disagreed, disagree_now) {
                (false, true) => state.rho += 1,
                (true, false) => state.rho -= 1,
                _ => {}
            }
        }
        debug_assert_eq!(state.rho, state.sigma.hamming_raw(&state.eta));
        debug_assert!(state.rho.abs_diff(rho_before) <= 1, "one step moved rho by more than 1");
    }

    /// Runs until the chains meet or `t_max` steps have elapsed. Returns the
    /// coalescence time `τ` (`None` on timeout). `τ = 0` iff the chains start
    /// equal.
    pub fn run_to_coalescence<R: rand::Rng>(
        &self,
        state: &mut CoupledState,
        rng: &mut R,
        t_max: u64,
    ) -> Option<u64> {
        if state.coalesced() {
            return Some(0);
        }
        for t in 1..=t_max {
            self.step(state, rng);
            if state.coalesced() {
                return Some(t);
            }
        }
        None
    }
}

/// Outcome of one coalescence run.
#[derive(Debug, Clone, Serialize)]
pub struct CoalescenceRecord {
    /// `Some(τ)` when the chains met at step `τ`, `None` when the step budget
    /// ran out first.
    pub tau: Option<u64>,
    pub t_max: u64,
    pub seed: u64,
    /// Initial pair, described by its Hamming distance and a label.
    pub initial_rho: usize,
    pub pair: String,
}

/// Runs one coupled trajectory from `(sigma0, eta0)` until coalescence or
/// `t_max`. Deterministic per seed.
pub fn coalescence_time(
    g: &MultiGraph,
    params: &Params,
    sigma0: &Configuration,
    eta0: &Configuration,
    kind: CouplingKind,
    seed: u64,
    t_max: u64,
) -> Result<CoalescenceRecord> {
    let coupled = CoupledChain::new(g, *params, kind)?;
    let mut state = CoupledState::new(sigma0.clone(), eta0.clone())?;
    if state.sigma().len() != g.n() {
        return Err(Error::Input(format!(
            "initial configurations have {} sites but the graph has {} vertices",
            state.sigma().len(),
            g.n()
        )));
    }
    let initial_rho = state.rho();
    let mut rng = seeding::master_rng(seed);
    let tau = coupled.run_to_coalescence(&mut state, &mut rng, t_max);
    Ok(CoalescenceRecord {
        tau,
        t_max,
        seed,
        initial_rho,
        pair: format!("custom(rho0={initial_rho})"),
    })
}

/// Which initial pairs a survival experiment starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairChoice {
    /// The all-susceptible / all-infected pair.
    Extremal,
    /// Maximize over `k` uniformly drawn initial pairs, each with its own
    /// bank of replicas.
    Random { k: usize },
}

/// One point of a Monte Carlo survival curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SurvivalPoint {
    pub t: u64,
    /// Estimate of `P(τ > t)` (for `Random` pairs: the max over pairs).
    pub survival: f64,
    /// Binomial standard error `sqrt(p̂(1−p̂)/replicas)` of that estimate.
    pub stderr: f64,
}

/// Estimates the coalescence survival curve `t ↦ P(τ > t)` on `t_grid`.
///
/// Replica `i` of pair-bank `j` uses seed sub-stream `j·replicas + i`, so the
/// result is a pure function of `seed` regardless of thread scheduling.
pub fn tail_curve(
    g: &MultiGraph,
    params: &Params,
    kind: CouplingKind,
    pair: PairChoice,
    t_grid: &[u64],
    replicas: usize,
    seed: u64,
) -> Result<Vec<SurvivalPoint>> {
    if t_grid.is_empty() {
        return Err(Error::Input("survival grid must be non-empty".into()));
    }
    if replicas == 0 {
        return Err(Error::Input("replicas must be >= 1".into()));
    }
    let coupled = CoupledChain::new(g, *params, kind)?;
    let t_max = *t_grid.iter().max().expect("non-empty grid");
    let n = g.n();

    let banks: Vec<(Configuration, Configuration)> = match pair {
        PairChoice::Extremal => {
            vec![(Configuration::all_susceptible(n), Configuration::all_infected(n))]
        }
        PairChoice::Random { k } => {
            if k == 0 {
                return Err(Error::Input("random pair choice needs k >= 1".into()));
            }
            // Pair draws come from a stream far outside the replica range.
            let mut pair_rng = seeding::stream_rng(seed, u64::MAX);
            (0..k)
                .map(|_| (Configuration::random(n, &mut pair_rng), Configuration::random(n, &mut pair_rng)))
                .collect()
        }
    };

    // τ per replica per bank; surviving past t_max is recorded as u64::MAX.
    let taus_per_bank: Vec<Vec<u64>> = banks
        .iter()
        .enumerate()
        .map(|(j, (sigma0, eta0))| {
            (0..replicas)
                .into_par_iter()
                .map(|i| {
                    let stream = (j * replicas + i) as u64;
                    let mut rng = seeding::stream_rng(seed, stream);
                    let mut state = CoupledState::new(sigma0.clone(), eta0.clone())
                        .expect("equal lengths by construction");
                    coupled
                        .run_to_coalescence(&mut state, &mut rng, t_max)
                        .unwrap_or(u64::MAX)
                })
                .collect()
        })
        .collect();

    let rf = replicas as f64;
    Ok(t_grid
        .iter()
        .map(|&t| {
            // Max over banks of the empirical survival at t.
            let (survival, stderr) = taus_per_bank
                .iter()
                .map(|taus| {
                    let alive = taus.iter().filter(|&&tau| tau > t).count();
                    let p_hat = alive as f64 / rf;
                    (p_hat, (p_hat * (1.0 - p_hat) / rf).sqrt())
                })
                .max_by(|a, b| a.0.total_cmp(&b.0))
                .expect("at least one bank");
            SurvivalPoint { t, survival, stderr }
        })
        .collect())
}

/// A Monte Carlo mixing-time estimate from coalescence tails.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TmixEstimate {
    /// Smallest `t` with `P̂(τ > t) + 3·stderr ≤ ε`.
    pub t_hat: u64,
    /// Smallest `t` with `P̂(τ > t) − 3·stderr ≤ ε`; lower edge of the
    /// confidence band `[t_lo, t_hat]`.
    pub t_lo: u64,
    pub survival_at_t_hat: f64,
    pub stderr_at_t_hat: f64,
    pub replicas: usize,
    pub epsilon: f64,
}

/// Estimates `t_mix(ε)` by running `replicas` extremal-pair coalescence
/// trajectories and searching the empirical survival curve: the candidate
/// grid doubles until the criterion `P̂(τ > t) + 3·stderr ≤ ε` holds, then
/// bisects down to the smallest such `t`.
///
/// Fails with a timeout when the criterion is not reached by `step_budget`.
pub fn tmix_upper_estimate(
    g: &MultiGraph,
    params: &Params,
    kind: CouplingKind,
    eps: f64,
    replicas: usize,
    seed: u64,
    step_budget: u64,
) -> Result<TmixEstimate> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Input(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    if replicas == 0 {
        return Err(Error::Input("replicas must be >= 1".into()));
    }
    let coupled = CoupledChain::new(g, *params, kind)?;
    let n = g.n();
    let taus: Vec<u64> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeding::stream_rng(seed, i as u64);
            let mut state = CoupledState::extremal(n);
            coupled
                .run_to_coalescence(&mut state, &mut rng, step_budget)
                .unwrap_or(u64::MAX)
        })
        .collect();

    let rf = replicas as f64;
    let survival = |t: u64| -> (f64, f64) {
        let alive = taus.iter().filter(|&&tau| tau > t).count();
        let p_hat = alive as f64 / rf;
        (p_hat, (p_hat * (1.0 - p_hat) / rf).sqrt())
    };
    let meets = |t: u64, sign: f64| -> bool {
        let (p, se) = survival(t);
        p + sign * 3.0 * se <= eps
    };

    let smallest_meeting = |sign: f64| -> Option<u64> {
        if meets(0, sign) {
            return Some(0);
        }
        // Double until the criterion holds, then bisect the bracket.
        let mut hi = 1u64;
        while !meets(hi, sign) {
            if hi >= step_budget {
                return None;
            }
            hi = (hi * 2).min(step_budget);
        }
        let mut lo = hi / 2; // criterion known false here (or hi == 1, lo == 0)
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if meets(mid, sign) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    };

    let t_hat = smallest_meeting(1.0).ok_or_else(|| {
        let (p, _) = survival(step_budget);
        Error::Timeout(format!(
            "survival {p:.4} + 3·stderr still above epsilon = {eps} at the step budget \
             {step_budget}"
        ))
    })?;
    let t_lo = smallest_meeting(-1.0).expect("criterion with -3se is weaker than with +3se");
    let (p_hat, se) = survival(t_hat);
    Ok(TmixEstimate {
        t_hat,
        t_lo,
        survival_at_t_hat: p_hat,
        stderr_at_t_hat: se,
        replicas,
        epsilon: eps,
    })
}

/// One cell of the adjacent-pair contraction estimate: the pair differed only
/// at `vertex`, on the given base pattern.
#[derive(Debug, Clone, Serialize)]
pub struct ContractionCell {
    pub vertex: usize,
    pub base: String,
    /// Monte Carlo estimate of `E[ρ after one step]` from this adjacent pair.
    pub mean_rho1: f64,
    pub stderr: f64,
}

/// Result of [`contraction_estimate`]: the worst (largest) cell and the full
/// table.
#[derive(Debug, Clone, Serialize)]
pub struct ContractionEstimate {
    pub max_mean_rho1: f64,
    pub max_stderr: f64,
    pub max_vertex: usize,
    pub max_base: String,
    pub cells: Vec<ContractionCell>,
}

/// How many random base patterns accompany the two deterministic worst-case
/// patterns per vertex.
const CONTRACTION_RANDOM_BASES: usize = 6;

/// Monte Carlo estimate of the worst one-step expected Hamming distance over
/// adjacent pairs (states differing at exactly one vertex).
///
/// For every vertex `x` the bases are: all-susceptible off `x`, all-infected
/// off `x`, and a few random patterns; the pair is the base with `x`
/// susceptible vs the base with `x` infected. `replicas` one-step experiments
/// per cell; the reported maximum is over cell means.
pub fn contraction_estimate(
    g: &MultiGraph,
    params: &Params,
    kind: CouplingKind,
    replicas: usize,
    seed: u64,
) -> Result<ContractionEstimate> {
    if replicas == 0 {
        return Err(Error::Input("replicas must be >= 1".into()));
    }
    let coupled = CoupledChain::new(g, *params, kind)?;
    let n = g.n();
    let mut base_rng = seeding::stream_rng(seed, u64::MAX);
    let mut cells_spec: Vec<(usize, String, Configuration)> = Vec::new();
    for x in 0..n {
        cells_spec.push((x, "all-susceptible".into(), Configuration::all_susceptible(n)));
        cells_spec.push((x, "all-infected".into(), Configuration::all_infected(n)));
        for b in 0..CONTRACTION_RANDOM_BASES.min(1 << (n.min(20) - 1)) {
            cells_spec.push((x, format!("random-{b}"), Configuration::random(n, &mut base_rng)));
        }
    }

    let cells: Vec<ContractionCell> = cells_spec
        .into_par_iter()
        .enumerate()
        .map(|(cell_idx, (x, base, mut pattern))| {
            // The adjacent pair: σ has x susceptible, η has x infected.
            pattern.set(x, false);
            let sigma0 = pattern.clone();
            let mut eta0 = pattern;
            eta0.set(x, true);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for i in 0..replicas {
                let stream = (cell_idx * replicas + i) as u64;
                let mut rng = seeding::stream_rng(seed, stream);
                let mut state = CoupledState::new(sigma0.clone(), eta0.clone())
                    .expect("equal lengths by construction");
                coupled.step(&mut state, &mut rng);
                let rho = state.rho() as f64;
                sum += rho;
                sum_sq += rho * rho;
            }
            let rf = replicas as f64;
            let mean = sum / rf;
            let var = (sum_sq / rf - mean * mean).max(0.0);
            ContractionCell { vertex: x, base, mean_rho1: mean, stderr: (var / rf).sqrt() }
        })
        .collect();

    let (max_mean_rho1, max_stderr, max_vertex, max_base) = {
        let worst = cells
            .iter()
            .max_by(|a, b| a.mean_rho1.total_cmp(&b.mean_rho1))
            .expect("at least one vertex");
        (worst.mean_rho1, worst.stderr, worst.vertex, worst.base.clone())
    };
    Ok(ContractionEstimate { max_mean_rho1, max_stderr, max_vertex, max_base, cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, lambda: f64, kappa: f64) -> Params {
        Params::new(a, lambda, kappa).unwrap()
    }

    #[test]
    fn hamming_examples() {
        let a = Configuration::from_bits(&[true, false, true]);
        let b = Configuration::from_bits(&[false, false, true]);
        assert_eq!(hamming(&a, &b).unwrap(), 1);
        assert_eq!(hamming(&a, &a).unwrap(), 0);
        let c = Configuration::all_susceptible(4);
        assert!(hamming(&a, &c).is_err(), "length mismatch is an input error");
        assert_eq!(
            hamming(&Configuration::all_susceptible(9), &Configuration::all_infected(9)).unwrap(),
            9
        );
    }

    #[test]
    fn coalesced_pairs_stay_identical_forever() {
        let g = MultiGraph::path(5).unwrap();
        let p = params(0.5, 0.05, 0.2);
        for kind in [CouplingKind::Independent, CouplingKind::CommonUniform] {
            let coupled = CoupledChain::new(&g, p, kind).unwrap();
            let sigma = Configuration::from_bits(&[true, false, true, true, false]);
            let mut state = CoupledState::new(sigma.clone(), sigma).unwrap();
            let mut rng = seeding::master_rng(3);
            for _ in 0..500 {
                coupled.step(&mut state, &mut rng);
                assert_eq!(state.sigma(), state.eta());
                assert!(state.coalesced());
            }
        }
    }

    #[test]
    fn equal_start_has_tau_zero_and_timeout_reports_none() {
        let g = MultiGraph::path(3).unwrap();
        let p = params(0.5, 0.05, 0.2);
        let sigma = Configuration::all_susceptible(3);
        let rec = coalescence_time(&g, &p, &sigma, &sigma, CouplingKind::Independent, 1, 100)
            .unwrap();
        assert_eq!(rec.tau, Some(0));

        let eta = Configuration::all_infected(3);
        let rec =
            coalescence_time(&g, &p, &sigma, &eta, CouplingKind::CommonUniform, 1, 0).unwrap();
        assert_eq!(rec.tau, None, "t_max = 0 with distinct starts must time out");
        assert_eq!(rec.initial_rho, 3);
    }

    #[test]
    fn single_site_common_uniform_meets_with_probability_a_minus_kappa() {
        // One vertex, κ < a: after one step the pair has met iff the shared
        // uniform fell in [κ, a), so P(meet at step 1) = a − κ = 0.5.
        // Mean τ is geometric: 1/(a−κ) = 2. 10⁵ replicas, 3σ.
        let g = MultiGraph::edgeless(1).unwrap();
        let p = params(0.6, 0.0, 0.1);
        let mut met_first = 0usize;
        let mut tau_sum = 0u64;
        let reps = 100_000u64;
        for i in 0..reps {
            let s = Configuration::all_susceptible(1);
            let e = Configuration::all_infected(1);
            let rec =
                coalescence_time(&g, &p, &s, &e, CouplingKind::CommonUniform, sub(7, i), 10_000)
                    .unwrap();
            let tau = rec.tau.expect("coalesces fast at these rates");
            met_first += (tau == 1) as usize;
            tau_sum += tau;
        }
        let rf = reps as f64;
        let freq = met_first as f64 / rf;
        let sigma1 = (0.5f64 * 0.5 / rf).sqrt();
        assert!((freq - 0.5).abs() < 3.0 * sigma1, "freq = {freq}");
        // Var of Geometric(1/2) is (1−p)/p² = 2.
        let mean = tau_sum as f64 / rf;
        let sigma2 = (2.0f64 / rf).sqrt();
        assert!((mean - 2.0).abs() < 3.0 * sigma2, "mean = {mean}");
    }

    fn sub(seed: u64, i: u64) -> u64 {
        seeding::sub_seed(seed, i)
    }

    #[test]
    fn single_site_independent_meets_with_the_product_probability() {
        // One vertex, pair (0, 1): independent coins meet iff both flip or
        // neither resolves... concretely P(meet) = a(1−κ) + (1−a)κ = 0.58.
        let g = MultiGraph::edgeless(1).unwrap();
        let p = params(0.6, 0.0, 0.1);
        let reps = 100_000u64;
        let mut met_first = 0usize;
        for i in 0..reps {
            let s = Configuration::all_susceptible(1);
            let e = Configuration::all_infected(1);
            let rec =
                coalescence_time(&g, &p, &s, &e, CouplingKind::Independent, sub(13, i), 10_000)
                    .unwrap();
            met_first += (rec.tau.unwrap() == 1) as usize;
        }
        let expect = 0.6 * 0.9 + 0.4 * 0.1;
        let rf = reps as f64;
        let freq = met_first as f64 / rf;
        let sigma = (expect * (1.0 - expect) / rf).sqrt();
        assert!((freq - expect).abs() < 3.0 * sigma, "freq = {freq}, expect = {expect}");
    }

    #[test]
    fn survival_is_one_at_time_zero_and_never_increases() {
        let g = MultiGraph::cycle(5).unwrap();
        let p = params(0.7, 0.02, 0.1);
        let grid: Vec<u64> = (0..=60).collect();
        let curve = tail_curve(
            &g,
            &p,
            CouplingKind::Independent,
            PairChoice::Extremal,
            &grid,
            2_000,
            42,
        )
        .unwrap();
        assert_eq!(curve[0].survival, 1.0);
        assert_eq!(curve[0].stderr, 0.0);
        for w in curve.windows(2) {
            assert!(w[1].survival <= w[0].survival, "survival increased at t = {}", w[1].t);
        }
    }

    #[test]
    fn random_pair_banks_are_deterministic_and_bounded_by_extremal_start() {
        let g = MultiGraph::path(4).unwrap();
        let p = params(0.6, 0.03, 0.2);
        let grid = [0u64, 5, 10, 20, 40];
        let a = tail_curve(
            &g,
            &p,
            CouplingKind::CommonUniform,
            PairChoice::Random { k: 3 },
            &grid,
            500,
            9,
        )
        .unwrap();
        let b = tail_curve(
            &g,
            &p,
            CouplingKind::CommonUniform,
            PairChoice::Random { k: 3 },
            &grid,
            500,
            9,
        )
        .unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.survival.to_bits(), y.survival.to_bits(), "not deterministic");
        }
        // Random pairs agree on some sites already, so their survival at 0 is
        // ≤ 1 but their curve is still a survival curve.
        assert!(a[0].survival <= 1.0);
    }

    #[test]
    fn tmix_estimate_epsilon_one_is_zero() {
        let g = MultiGraph::edgeless(3).unwrap();
        let p = params(0.6, 0.0, 0.2);
        let est = tmix_upper_estimate(&g, &p, CouplingKind::Independent, 1.0, 200, 5, 10_000)
            .unwrap();
        assert_eq!(est.t_hat, 0);
    }

    #[test]
    fn tmix_estimate_single_site_geometric_tail() {
        // One vertex, common uniform, a − κ = 1/2: P(τ > t) = 2^{−t}, so the
        // exact t_mix(1/4) is 2; the +3σ safety margin can push the estimate
        // to 3 when the empirical tail sits near 1/4.
        let g = MultiGraph::edgeless(1).unwrap();
        let p = params(0.6, 0.0, 0.1);
        let est = tmix_upper_estimate(
            &g,
            &p,
            CouplingKind::CommonUniform,
            0.25,
            100_000,
            21,
            10_000,
        )
        .unwrap();
        assert!(est.t_hat == 2 || est.t_hat == 3, "t_hat = {}", est.t_hat);
        assert!(est.t_lo <= est.t_hat);
    }

    #[test]
    fn tmix_estimate_times_out_on_tiny_budget() {
        let g = MultiGraph::edgeless(6).unwrap();
        let p = params(0.6, 0.0, 0.2);
        let err = tmix_upper_estimate(&g, &p, CouplingKind::Independent, 0.01, 100, 5, 2)
            .unwrap_err();
        assert!(matches!(err, Error::Timeout(_)), "{err}");
    }

    #[test]
    fn contraction_estimate_single_site_matches_the_meet_probability() {
        // n = 1: the only adjacent pair is (0, 1); after one step
        // E[ρ₁] = 1 − (a(1−κ) + (1−a)κ) = 0.42 under independent coins.
        let g = MultiGraph::edgeless(1).unwrap();
        let p = params(0.6, 0.0, 0.1);
        let est =
            contraction_estimate(&g, &p, CouplingKind::Independent, 200_000, 3).unwrap();
        let expect = 1.0 - (0.6 * 0.9 + 0.4 * 0.1);
        assert!(
            (est.max_mean_rho1 - expect).abs() < 3.0 * est.max_stderr.max(1e-4),
            "estimate = {}, expect = {expect}",
            est.max_mean_rho1
        );
    }
}
