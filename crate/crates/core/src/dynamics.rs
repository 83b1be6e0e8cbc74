//! The noisy SIS chain and its drift constants.
//!
//! One step of the chain on a graph with `n` vertices: pick a vertex `x`
//! uniformly at random, then flip a single Bernoulli coin — a susceptible `x`
//! becomes infected with probability `p(σ, x) = a + λ·n_I(σ, x)` (where
//! `n_I` counts infected neighbours with edge multiplicity), an infected `x`
//! recovers with probability `κ`. At most one coordinate changes per step.
//! Rates stay inside `[0, 1)` as long as `p* = a + λ·Δ_max < 1`, which is
//! validated once when a [`Chain`] is constructed.
//!
//! Two parameter regimes drive everything quantitative. With
//!
//! * `γ = (1−κ)a + (1−a)κ − 2(n−1)κ(1−κ)` and
//! * `β = κ + p*(1−2κ)`,
//!
//! the *strong-noise* regime `κ < 1/(4(n−1))`, `a > 1−κ > 1/2` makes `γ > 0`,
//! and a one-step coupling of two chains that differ at a single vertex
//! contracts their expected Hamming distance by the factor `1 − γ/n` (and
//! never faster than `1 − β/n`). Iterating gives the mixing-time sandwich
//! implemented in [`theorem_bounds`]:
//!
//! ```text
//! (n / 2β) (ln n + ln(γ ε / 4))  ≤  t_mix(ε)  ≤  (n / γ) (ln n + ln(1/ε)).
//! ```
//!
//! All logarithms are natural. The lower bound can be negative (vacuous) at
//! small `n`; it is returned as-is and flagged.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Configuration, MultiGraph};
use crate::seeding;

/// Model parameters: external infection pressure `a`, per-neighbour infection
/// increment `lambda`, recovery probability `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    a: f64,
    lambda: f64,
    kappa: f64,
}

impl Params {
    /// Validates `0 < a < 1`, `lambda ≥ 0`, `0 < kappa < 1`.
    pub fn new(a: f64, lambda: f64, kappa: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::Input(format!("a must lie in (0, 1), got {a}")));
        }
        if lambda.is_nan() || lambda < 0.0 {
            return Err(Error::Input(format!("lambda must be >= 0, got {lambda}")));
        }
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::Input(format!("kappa must lie in (0, 1), got {kappa}")));
        }
        Ok(Params { a, lambda, kappa })
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Largest one-step infection probability on `g`: `p* = a + λ·Δ_max`.
pub fn p_star(g: &MultiGraph, params: &Params) -> f64 {
    params.a + params.lambda * g.max_degree() as f64
}

/// Infection probability of susceptible `x` under `sigma`:
/// `p(σ, x) = a + λ·n_I(σ, x)`.
pub fn infection_prob(
    g: &MultiGraph,
    params: &Params,
    sigma: &Configuration,
    x: crate::graph::VertexId,
) -> Result<f64> {
    Ok(params.a + params.lambda * g.infected_neighbors(sigma, x)? as f64)
}

/// Contraction constant `γ(a, κ, n) = (1−κ)a + (1−a)κ − 2(n−1)κ(1−κ)`.
///
/// Raw-float version so boundary values (e.g. `κ = 0`) stay testable; prefer
/// [`gamma_const`] for validated parameters.
#[inline]
pub fn gamma_formula(a: f64, kappa: f64, n: usize) -> f64 {
    (1.0 - kappa) * a + (1.0 - a) * kappa - 2.0 * (n as f64 - 1.0) * kappa * (1.0 - kappa)
}

/// Expansion constant `β(κ, p*) = κ + p*(1−2κ)`. Raw-float companion of
/// [`beta_const`].
#[inline]
pub fn beta_formula(kappa: f64, p_star: f64) -> f64 {
    kappa + p_star * (1.0 - 2.0 * kappa)
}

/// `γ` for validated parameters on `n ≥ 1` vertices.
pub fn gamma_const(params: &Params, n: usize) -> f64 {
    gamma_formula(params.a, params.kappa, n)
}

/// `β` for validated parameters on a concrete graph (through `p*`).
pub fn beta_const(g: &MultiGraph, params: &Params) -> f64 {
    beta_formula(params.kappa, p_star(g, params))
}

/// Outcome of checking the two parameter regimes at order `n`.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeReport {
    pub n: usize,
    pub p_star: f64,
    /// `p* < 1`: rates are genuine probabilities.
    pub p_star_ok: bool,
    /// Strong-noise regime: `0 < κ < 1/(4(n−1))` and `a > 1−κ > 1/2`.
    pub regime_upper: bool,
    /// Sharper regime behind the mixing lower bound:
    /// `0 < κ < 1/(4(n−1)²)`, `a > 1−n^{−α} > 1−κ > 1/2`, `α > 1`.
    /// Always `false` when no `α` was supplied.
    pub regime_lower: bool,
    pub alpha: Option<f64>,
    pub gamma: f64,
    pub beta: f64,
    /// Smallest `α` for which the sharper regime is non-empty:
    /// `log(4(n−1)²) / log n`. Below it no `κ` fits between `n^{−α}` and
    /// `1/(4(n−1)²)`, so the validator reports the threshold instead of
    /// silently failing.
    pub feasible_alpha_min: f64,
}

/// Evaluates both regimes literally. `max_degree` feeds `p*` and `β`;
/// requires `n ≥ 2` for the `(n−1)` denominators.
pub fn check_regime(
    params: &Params,
    n: usize,
    max_degree: usize,
    alpha: Option<f64>,
) -> Result<RegimeReport> {
    if n < 2 {
        return Err(Error::Input(format!("regime checks need n >= 2, got {n}")));
    }
    let (a, kappa) = (params.a, params.kappa);
    let nf = n as f64;
    let ps = params.a + params.lambda * max_degree as f64;
    let regime_upper = kappa > 0.0
        && kappa < 1.0 / (4.0 * (nf - 1.0))
        && a > 1.0 - kappa
        && 1.0 - kappa > 0.5;
    let regime_lower = match alpha {
        Some(al) => {
            let n_pow = nf.powf(-al);
            al > 1.0
                && kappa > 0.0
                && kappa < 1.0 / (4.0 * (nf - 1.0) * (nf - 1.0))
                && a > 1.0 - n_pow
                && 1.0 - n_pow > 1.0 - kappa
                && 1.0 - kappa > 0.5
        }
        None => false,
    };
    Ok(RegimeReport {
        n,
        p_star: ps,
        p_star_ok: ps < 1.0,
        regime_upper,
        regime_lower,
        alpha,
        gamma: gamma_const(params, n),
        beta: beta_formula(kappa, ps),
        feasible_alpha_min: (4.0 * (nf - 1.0) * (nf - 1.0)).ln() / nf.ln(),
    })
}

/// Closed-form mixing upper bound `(n/γ)(ln n + ln(1/ε))`; needs `γ > 0`.
#[inline]
pub fn mixing_upper_formula(n: usize, gamma: f64, eps: f64) -> f64 {
    (n as f64 / gamma) * ((n as f64).ln() + (1.0 / eps).ln())
}

/// Closed-form mixing lower bound `(n/(2β))(ln n + ln(γε/4))`; may be
/// negative (vacuous) at small `n`.
#[inline]
pub fn mixing_lower_formula(n: usize, beta: f64, gamma: f64, eps: f64) -> f64 {
    (n as f64 / (2.0 * beta)) * ((n as f64).ln() + (gamma * eps / 4.0).ln())
}

/// The mixing-time sandwich evaluated on a concrete instance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TheoremBounds {
    pub gamma: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub upper: f64,
    pub lower: f64,
    /// `lower ≤ 0`: the lower bound carries no information at this size.
    pub lower_vacuous: bool,
}

/// Evaluates both closed-form bounds for `t_mix(ε)` on `g`.
///
/// Errors with a domain error when `γ ≤ 0` (the upper bound needs the
/// contraction to point the right way) or when `ε ∉ (0, 1]`.
pub fn theorem_bounds(g: &MultiGraph, params: &Params, eps: f64) -> Result<TheoremBounds> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Input(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    let n = g.n();
    let gamma = gamma_const(params, n);
    if gamma <= 0.0 {
        return Err(Error::Domain(format!(
            "gamma = {gamma} <= 0: the contraction bound degenerates for these parameters"
        )));
    }
    let beta = beta_const(g, params);
    let lower = mixing_lower_formula(n, beta, gamma, eps);
    Ok(TheoremBounds {
        gamma,
        beta,
        epsilon: eps,
        upper: mixing_upper_formula(n, gamma, eps),
        lower,
        lower_vacuous: lower <= 0.0,
    })
}

/// A validated chain: graph + parameters with `p* < 1` checked once, not per
/// step.
pub struct Chain<'g> {
    graph: &'g MultiGraph,
    params: Params,
    p_star: f64,
}

impl<'g> Chain<'g> {
    pub fn new(graph: &'g MultiGraph, params: Params) -> Result<Self> {
        let ps = p_star(graph, &params);
        if ps.is_nan() || ps >= 1.0 {
            return Err(Error::Domain(format!(
                "p* = a + lambda * max_degree = {ps} must be < 1"
            )));
        }
        Ok(Chain { graph, params, p_star: ps })
    }

    #[inline]
    pub fn graph(&self) -> &MultiGraph {
        self.graph
    }

    #[inline]
    pub fn params(&self) -> &Params {
        &self.params
    }

    #[inline]
    pub fn p_star(&self) -> f64 {
        self.p_star
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Flip probability of vertex `x` in state `sigma`: the infection rate if
    /// `x` is susceptible, `κ` if it is infected. Always in `[0, 1)` thanks to
    /// the `p* < 1` construction check.
    #[inline]
    pub(crate) fn flip_prob(&self, sigma: &Configuration, x: usize) -> f64 {
        let p = if sigma.get(x) {
            self.params.kappa
        } else {
            self.params.a
                + self.params.lambda * self.graph.infected_neighbors_raw(sigma, x) as f64
        };
        debug_assert!((0.0..1.0).contains(&p), "flip probability {p} left [0, 1)");
        p
    }

    /// Advances `sigma` by one step in place. Consumes exactly two uniform
    /// draws, in this fixed order: the vertex choice, then the flip coin.
    #[inline]
    pub fn step<R: rand::Rng>(&self, sigma: &mut Configuration, rng: &mut R) {
        let before = sigma.infected_count();
        let x = rng.gen_range(0..self.n());
        let u: f64 = rng.gen();
        if u < self.flip_prob(sigma, x) {
            sigma.flip(x);
        }
        debug_assert!(
            sigma.infected_count().abs_diff(before) <= 1,
            "a step changed more than one site"
        );
    }
}

/// A sampled trajectory of infected counts.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    /// `infected_counts[i]` is the infected count at time `i * stride`,
    /// starting with the initial state at `t = 0`.
    pub infected_counts: Vec<usize>,
    pub stride: u64,
    pub steps: u64,
    pub seed: u64,
    /// Infection state after the full `steps` steps.
    #[serde(skip)]
    pub final_state: Configuration,
}

/// Runs the chain for `steps` steps from `sigma0`, recording the infected
/// count at `t = 0, stride, 2·stride, …`. Deterministic per seed.
pub fn run_chain(
    g: &MultiGraph,
    params: &Params,
    sigma0: &Configuration,
    steps: u64,
    stride: u64,
    seed: u64,
) -> Result<Trajectory> {
    if stride == 0 {
        return Err(Error::Input("stride must be >= 1".into()));
    }
    if sigma0.len() != g.n() {
        return Err(Error::Input(format!(
            "initial configuration has {} sites but the graph has {} vertices",
            sigma0.len(),
            g.n()
        )));
    }
    let chain = Chain::new(g, *params)?;
    let mut rng = seeding::master_rng(seed);
    let mut sigma = sigma0.clone();
    let mut counts = Vec::with_capacity((steps / stride + 1) as usize);
    counts.push(sigma.infected_count());
    for t in 1..=steps {
        chain.step(&mut sigma, &mut rng);
        if t % stride == 0 {
            counts.push(sigma.infected_count());
        }
    }
    Ok(Trajectory { infected_counts: counts, stride, steps, seed, final_state: sigma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexId;

    fn params(a: f64, lambda: f64, kappa: f64) -> Params {
        Params::new(a, lambda, kappa).unwrap()
    }

    #[test]
    fn params_validation_rejects_out_of_range_values() {
        assert!(Params::new(0.0, 0.0, 0.5).is_err());
        assert!(Params::new(1.0, 0.0, 0.5).is_err());
        assert!(Params::new(0.5, -0.1, 0.5).is_err());
        assert!(Params::new(0.5, 0.0, 0.0).is_err());
        assert!(Params::new(0.5, 0.0, 1.0).is_err());
        assert!(Params::new(0.5, f64::NAN, 0.5).is_err());
        assert!(Params::new(0.5, 0.3, 0.5).is_ok());
    }

    #[test]
    fn infection_prob_adds_lambda_per_infected_neighbor() {
        // Path 0–1–2, both neighbours of 1 infected: p = 0.5 + 2·0.1 = 0.7.
        let g = MultiGraph::path(3).unwrap();
        let p = params(0.5, 0.1, 0.2);
        let sigma = Configuration::from_bits(&[true, false, true]);
        let got = infection_prob(&g, &p, &sigma, VertexId(1)).unwrap();
        assert!((got - 0.7).abs() < 1e-15);

        // All susceptible: the external pressure alone.
        let none = Configuration::all_susceptible(3);
        assert_eq!(infection_prob(&g, &p, &none, VertexId(1)).unwrap(), 0.5);
    }

    #[test]
    fn infection_prob_tops_out_at_p_star_on_regular_graphs() {
        // Cycle (2-regular), all infected: p = a + 2λ = p*.
        let g = MultiGraph::cycle(5).unwrap();
        let p = params(0.3, 0.05, 0.2);
        let all = Configuration::all_infected(5);
        for x in 0..5 {
            let got = infection_prob(&g, &p, &all, VertexId(x)).unwrap();
            assert!((got - p_star(&g, &p)).abs() < 1e-15);
        }
        assert!((p_star(&g, &p) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn p_star_ignores_self_loops() {
        let g = MultiGraph::from_edges(2, [(0, 1), (0, 0), (0, 0)]).unwrap();
        let p = params(0.5, 0.1, 0.2);
        assert!((p_star(&g, &p) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn gamma_frozen_value() {
        // (0.99)(0.995) + (0.005)(0.01) − 2·1·(0.01)(0.99) = 0.96530.
        let got = gamma_formula(0.995, 0.01, 2);
        assert!((got - 0.9653).abs() < 1e-12, "gamma = {got}");
    }

    #[test]
    fn gamma_boundary_cases() {
        // κ = 0 collapses to a; n = 1 drops the pair-interference term.
        assert_eq!(gamma_formula(0.7, 0.0, 5), 0.7);
        let got = gamma_formula(0.6, 0.2, 1);
        assert!((got - (0.8 * 0.6 + 0.4 * 0.2)).abs() < 1e-15);
    }

    #[test]
    fn beta_frozen_value() {
        // 0.01 + 0.997·0.98 = 0.98706.
        let got = beta_formula(0.01, 0.997);
        assert!((got - 0.98706).abs() < 1e-12, "beta = {got}");
        // Boundaries: κ = 0 gives p*; p* → 1 with κ = 0 gives 1.
        assert_eq!(beta_formula(0.0, 0.4), 0.4);
        assert_eq!(beta_formula(0.0, 1.0), 1.0);
    }

    #[test]
    fn strong_noise_regime_example_holds() {
        // n = 2, κ = 0.01, a = 0.995: κ < 1/4, a > 0.99 > 1/2.
        let p = params(0.995, 0.0, 0.01);
        let r = check_regime(&p, 2, 0, None).unwrap();
        assert!(r.regime_upper);
        assert!(!r.regime_lower);
        assert!(r.p_star_ok);
    }

    #[test]
    fn sharper_regime_example_and_infeasible_alpha() {
        // n = 10, α = 3, κ = 0.002 ∈ (10⁻³, 1/324), a = 0.9995 > 0.999.
        let p = params(0.9995, 0.0, 0.002);
        let r = check_regime(&p, 10, 0, Some(3.0)).unwrap();
        assert!(r.regime_lower, "{r:?}");

        // α = 2 at n = 10: the κ-window (10⁻², 1/324) is empty.
        let r2 = check_regime(&p, 10, 0, Some(2.0)).unwrap();
        assert!(!r2.regime_lower);
        // Threshold log(4·81)/log(10) ≈ 2.51 separates the two.
        assert!(r2.feasible_alpha_min > 2.0 && r2.feasible_alpha_min < 3.0);
    }

    #[test]
    fn alpha_threshold_at_n_two_is_exactly_two() {
        // log(4·1)/log 2 = 2.
        let p = params(0.9, 0.0, 0.1);
        let r = check_regime(&p, 2, 0, Some(2.5)).unwrap();
        assert!((r.feasible_alpha_min - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mixing_bound_frozen_values() {
        // (100/0.9653)(ln 100 + ln 4) ≈ 620.684.
        let up = mixing_upper_formula(100, 0.9653, 0.25);
        assert!((up - 620.684).abs() < 0.01, "upper = {up}");
        // ε = 1 drops the ln(1/ε) term.
        let up1 = mixing_upper_formula(100, 0.9653, 1.0);
        assert!((up1 - 100.0 / 0.9653 * (100.0_f64).ln()).abs() < 1e-9);
        // (10/(2·0.98706))·ln(10·0.9653/16) ≈ −2.560: vacuous.
        let lo = mixing_lower_formula(10, 0.98706, 0.9653, 0.25);
        assert!((lo - (-2.560)).abs() < 0.01, "lower = {lo}");
    }

    #[test]
    fn theorem_bounds_flags_vacuous_lower_and_rejects_bad_gamma() {
        let g = MultiGraph::edgeless(10).unwrap();
        let p = params(0.9995, 0.0, 0.002);
        let b = theorem_bounds(&g, &p, 0.25).unwrap();
        assert!(b.lower < 0.0 && b.lower_vacuous);
        assert!(b.upper > 0.0);

        // κ large enough to kill γ at this n: domain error.
        let bad = params(0.6, 0.0, 0.4);
        assert!(gamma_const(&bad, 10) <= 0.0);
        assert!(matches!(theorem_bounds(&g, &bad, 0.25), Err(Error::Domain(_))));
    }

    #[test]
    fn chain_construction_validates_p_star() {
        let g = MultiGraph::star(5).unwrap();
        // p* = 0.9 + 4·0.05 = 1.1 ≥ 1.
        assert!(Chain::new(&g, params(0.9, 0.05, 0.1)).is_err());
        assert!(Chain::new(&g, params(0.9, 0.02, 0.1)).is_ok());
    }

    #[test]
    fn single_site_infection_and_recovery_frequencies() {
        // One vertex: P(0 → 1) = a, P(1 → 0) = κ. 10⁵ one-step replicas each,
        // binomial 3σ tolerance.
        let g = MultiGraph::edgeless(1).unwrap();
        let p = params(0.6, 0.0, 0.2);
        let chain = Chain::new(&g, p).unwrap();
        let reps = 100_000;
        let mut infected = 0;
        let mut recovered = 0;
        for i in 0..reps {
            let mut rng = seeding::stream_rng(11, i);
            let mut s = Configuration::all_susceptible(1);
            chain.step(&mut s, &mut rng);
            infected += s.get(0) as usize;
            let mut s = Configuration::all_infected(1);
            chain.step(&mut s, &mut rng);
            recovered += !s.get(0) as usize;
        }
        let rf = reps as f64;
        let sigma_a = (0.6 * 0.4 / rf).sqrt();
        let sigma_k = (0.2 * 0.8 / rf).sqrt();
        assert!((infected as f64 / rf - 0.6).abs() < 3.0 * sigma_a);
        assert!((recovered as f64 / rf - 0.2).abs() < 3.0 * sigma_k);
    }

    #[test]
    fn run_chain_zero_steps_returns_initial_state() {
        let g = MultiGraph::path(4).unwrap();
        let p = params(0.5, 0.01, 0.2);
        let sigma0 = Configuration::from_bits(&[true, false, true, false]);
        let t = run_chain(&g, &p, &sigma0, 0, 1, 7).unwrap();
        assert_eq!(t.final_state, sigma0);
        assert_eq!(t.infected_counts, vec![2]);
    }

    #[test]
    fn run_chain_is_deterministic_per_seed_and_samples_on_stride() {
        let g = MultiGraph::cycle(6).unwrap();
        let p = params(0.4, 0.05, 0.3);
        let sigma0 = Configuration::all_susceptible(6);
        let t1 = run_chain(&g, &p, &sigma0, 1000, 10, 99).unwrap();
        let t2 = run_chain(&g, &p, &sigma0, 1000, 10, 99).unwrap();
        assert_eq!(t1.infected_counts, t2.infected_counts);
        assert_eq!(t1.final_state, t2.final_state);
        assert_eq!(t1.infected_counts.len(), 101);
        let t3 = run_chain(&g, &p, &sigma0, 1000, 10, 100).unwrap();
        assert_ne!(t1.final_state, t3.final_state, "different seeds should diverge");
        assert!(run_chain(&g, &p, &sigma0, 10, 0, 1).is_err(), "stride 0 rejected");
    }
}
