//! The `verify` battery: nine self-contained checks that pit the
//! simulation and the closed-form bounds against the exact
//! small-instance oracle.
//!
//! Every check answers pass/fail with a one-line detail and never
//! panics; an internal error is folded into a failing outcome so the
//! battery always reports all nine lines.

use nsis_core::dynamics::{check_regime, theorem_bounds, Chain, Params};
use nsis_core::graph::{Configuration, MultiGraph};
use nsis_core::oracle::{
    build_coupled_kernel, build_kernel, distance_profile, exact_contraction_check,
    exact_second_moment_check, exact_tmix, stationary,
};
use nsis_core::seeding::stream_rng;
use nsis_core::Result;
use rand::Rng;
use serde::Serialize;

use nsis_core::coupling::CouplingKind;
use nsis_core::oracle::exact_coupling_tail;

/// Verdict of one battery item.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn outcome(name: &'static str, result: Result<(bool, String)>) -> CheckOutcome {
    match result {
        Ok((pass, detail)) => CheckOutcome { name, pass, detail },
        Err(e) => CheckOutcome { name, pass: false, detail: format!("error: {e}") },
    }
}

/// Desk-scale parameters that sit comfortably inside the contraction
/// regime at any `n ≥ 2` and any maximum degree: `κ = 1/(8(n−1))`,
/// `a = 1 − κ/2`, and `λ` sized so `λ·Δ ≤ κ/4` (hence `p* ≤ 1 − κ/4`).
pub fn desk_params(n: usize, max_degree: usize) -> Result<Params> {
    let kappa = 1.0 / (8.0 * (n as f64 - 1.0));
    let a = 1.0 - kappa / 2.0;
    let lambda = kappa / (4.0 * max_degree.max(1) as f64);
    Params::new(a, lambda, kappa)
}

/// The labelled graph shapes every structural check sweeps.
pub fn desk_graphs(n: usize) -> Result<Vec<(String, MultiGraph)>> {
    let mut shapes = vec![
        ("edgeless".to_string(), MultiGraph::edgeless(n)?),
        ("path".to_string(), MultiGraph::path(n)?),
        ("star".to_string(), MultiGraph::star(n)?),
    ];
    if n >= 3 {
        shapes.push(("cycle".to_string(), MultiGraph::cycle(n)?));
    }
    Ok(shapes)
}

/// Transition rows are probability vectors and each step moves at most
/// one coordinate, on randomly drawn multigraphs (loops included) with
/// randomly drawn in-range parameters; coupled rows likewise.
fn kernel_rows_and_locality(seed: u64) -> Result<(bool, String)> {
    let mut rng = stream_rng(seed, 900);
    let mut worst_row_gap = 0.0f64;
    let mut instances = 0usize;
    for _ in 0..12 {
        let n = rng.gen_range(2..=8usize);
        let mut g = MultiGraph::edgeless(n)?;
        for _ in 0..rng.gen_range(0..=2 * n) {
            g.add_edge(rng.gen_range(0..n), rng.gen_range(0..n))?;
        }
        let a = rng.gen_range(0.05..0.85);
        let kappa = rng.gen_range(0.01..0.9);
        let lambda =
            rng.gen_range(0.0..1.0) * (0.999 - a) / g.max_degree().max(1) as f64;
        let params = Params::new(a, lambda, kappa)?;

        let k = build_kernel(&g, &params)?;
        for s in 0..k.n_states() {
            let mut sum = 0.0;
            for (t, &p) in k.row(s).iter().enumerate() {
                if p < 0.0 {
                    return Ok((false, format!("negative entry P({s} -> {t}) = {p}")));
                }
                if p > 0.0 && s != t && (s ^ t).count_ones() != 1 {
                    return Ok((
                        false,
                        format!("step moved {} coordinates: {s} -> {t}", (s ^ t).count_ones()),
                    ));
                }
                sum += p;
            }
            worst_row_gap = worst_row_gap.max((sum - 1.0).abs());
        }
        if n <= 5 {
            for kind in [CouplingKind::Independent, CouplingKind::CommonUniform] {
                let ck = build_coupled_kernel(&g, &params, kind)?;
                for pair in 0..ck.n_pairs() {
                    let sum: f64 = ck.row(pair).iter().sum();
                    if ck.row(pair).iter().any(|&p| p < 0.0) {
                        return Ok((false, format!("negative coupled entry in row {pair}")));
                    }
                    worst_row_gap = worst_row_gap.max((sum - 1.0).abs());
                }
            }
        }
        instances += 1;
    }
    let pass = worst_row_gap <= 1e-12;
    Ok((pass, format!("{instances} random instances; worst row-sum gap {worst_row_gap:.2e}")))
}

/// Every adjacent pair's exact one-step expected distance sits inside
/// `[1 − β/n, 1 − γ/n]` on the desk shapes.
fn adjacent_pair_contraction() -> Result<(bool, String)> {
    let mut pass = true;
    let mut worst = f64::INFINITY;
    let mut instances = 0usize;
    for n in 2..=6usize {
        for (label, g) in desk_graphs(n)? {
            let params = desk_params(n, g.max_degree())?;
            let check = exact_contraction_check(&g, &params)?;
            if !(check.max_ok && check.min_ok && check.regime.regime_upper) {
                return Ok((
                    false,
                    format!(
                        "{label} n={n}: E[rho_1] in [{}, {}] escaped [{}, {}]",
                        check.min_expected_rho1,
                        check.max_expected_rho1,
                        check.lower_bound,
                        check.upper_bound
                    ),
                ));
            }
            worst = worst.min(check.upper_bound - check.max_expected_rho1);
            instances += 1;
        }
    }
    if !worst.is_finite() {
        pass = false;
    }
    Ok((pass, format!("{instances} instances; smallest contraction slack {worst:.2e}")))
}

/// The exact pair second moment stays below
/// `ρ₀²(1 − 2γ/n)^t + n/(2γ)` for all starting pairs up to t = 120.
fn second_moment_envelope() -> Result<(bool, String)> {
    let mut worst_excess = f64::NEG_INFINITY;
    let mut instances = 0usize;
    for n in 2..=5usize {
        for (label, g) in desk_graphs(n)? {
            let params = desk_params(n, g.max_degree())?;
            let check = exact_second_moment_check(&g, &params, 120)?;
            if !check.ok {
                return Ok((
                    false,
                    format!(
                        "{label} n={n}: excess {} at t={} from rho_0={}",
                        check.worst_excess, check.worst_t, check.worst_pair_rho0
                    ),
                ));
            }
            worst_excess = worst_excess.max(check.worst_excess);
            instances += 1;
        }
    }
    Ok((
        true,
        format!("{instances} instances; worst excess over the envelope {worst_excess:.2e}"),
    ))
}

/// The exact ε = 1/4 mixing time never exceeds the closed-form upper
/// bound `(n/γ)(ln n + ln(1/ε))`.
fn mixing_time_upper_bound() -> Result<(bool, String)> {
    let mut worst_ratio = 0.0f64;
    let mut instances = 0usize;
    for n in 4..=7usize {
        for g in [MultiGraph::edgeless(n)?, MultiGraph::path(n)?] {
            let params = desk_params(n, g.max_degree())?;
            let bounds = theorem_bounds(&g, &params, 0.25)?;
            let k = build_kernel(&g, &params)?;
            let exact = exact_tmix(&k, 0.25)?;
            if exact.t as f64 > bounds.upper {
                return Ok((
                    false,
                    format!("n={n}: exact tmix {} exceeds bound {}", exact.t, bounds.upper),
                ));
            }
            worst_ratio = worst_ratio.max(exact.t as f64 / bounds.upper);
            instances += 1;
        }
    }
    Ok((
        true,
        format!("{instances} instances; largest exact/bound ratio {worst_ratio:.3}"),
    ))
}

/// The exact worst-case distance to stationarity is dominated by the
/// worst-pair coalescence tail at every t ≤ 200, for both couplings.
fn coalescence_dominates_distance() -> Result<(bool, String)> {
    let grid: Vec<u64> = (0..=200).collect();
    let mut worst_gap = f64::NEG_INFINITY;
    let mut instances = 0usize;
    for n in 2..=4usize {
        for g in [MultiGraph::edgeless(n)?, MultiGraph::path(n)?] {
            let params = desk_params(n, g.max_degree())?;
            let k = build_kernel(&g, &params)?;
            let profile = distance_profile(&k, 200)?;
            for kind in [CouplingKind::Independent, CouplingKind::CommonUniform] {
                let ck = build_coupled_kernel(&g, &params, kind)?;
                let tail = exact_coupling_tail(&ck, &grid)?;
                for (p, q) in profile.iter().zip(&tail) {
                    let gap = p.d - q.sup_tail;
                    if gap > 1e-10 {
                        return Ok((
                            false,
                            format!(
                                "n={n} {} t={}: d = {} > sup tail = {}",
                                kind.name(),
                                p.t,
                                p.d,
                                q.sup_tail
                            ),
                        ));
                    }
                    worst_gap = worst_gap.max(gap);
                }
                instances += 1;
            }
        }
    }
    Ok((
        true,
        format!("{instances} curves; max of d(t) - sup-pair tail = {worst_gap:.2e} (<= 0 up to roundoff)"),
    ))
}

/// The worst-case and worst-pair distances interleave as
/// `d(t) ≤ d̄(t) ≤ 2 d(t)` along the whole profile.
fn distance_sandwich() -> Result<(bool, String)> {
    let mut instances = 0usize;
    for n in 2..=4usize {
        for g in [MultiGraph::edgeless(n)?, MultiGraph::path(n)?] {
            let params = desk_params(n, g.max_degree())?;
            let k = build_kernel(&g, &params)?;
            for p in distance_profile(&k, 200)? {
                if !(p.d <= p.d_bar + 1e-12 && p.d_bar <= 2.0 * p.d + 1e-12) {
                    return Ok((
                        false,
                        format!("n={n} t={}: d = {}, d_bar = {}", p.t, p.d, p.d_bar),
                    ));
                }
            }
            instances += 1;
        }
    }
    Ok((true, format!("{instances} profiles respect d <= d_bar <= 2d")))
}

/// The numeric stationary law matches the closed forms: the two-state
/// rate ratio at n = 1 and the product law on an edgeless graph.
fn stationary_closed_forms() -> Result<(bool, String)> {
    let mut worst = 0.0f64;

    for (a, kappa) in [(0.6, 0.2), (0.35, 0.25)] {
        let g = MultiGraph::edgeless(1)?;
        let params = Params::new(a, 0.0, kappa)?;
        let pi = stationary(&build_kernel(&g, &params)?)?;
        let p0 = kappa / (a + kappa);
        worst = worst.max((pi.get(0) - p0).abs()).max((pi.get(1) - (1.0 - p0)).abs());
    }

    let g = MultiGraph::edgeless(4)?;
    let params = Params::new(0.96, 0.0, 0.05)?;
    let pi = stationary(&build_kernel(&g, &params)?)?;
    let p_inf: f64 = 0.96 / (0.96 + 0.05);
    for state in 0..16usize {
        let ones = state.count_ones() as i32;
        let expected = p_inf.powi(ones) * (1.0 - p_inf).powi(4 - ones);
        worst = worst.max((pi.get(state) - expected).abs());
    }

    let pass = worst <= 1e-12;
    Ok((pass, format!("largest deviation from the closed forms {worst:.2e}")))
}

/// A long single trajectory's occupation measure lands on the exact
/// stationary law (ergodic-average sanity check of the simulator).
fn occupation_measure(seed: u64) -> Result<(bool, String)> {
    const STEPS: u64 = 10_000_000;
    let g = MultiGraph::path(3)?;
    let params = Params::new(0.35, 0.08, 0.25)?;
    let pi = stationary(&build_kernel(&g, &params)?)?;

    let chain = Chain::new(&g, params)?;
    let mut config = Configuration::all_susceptible(3);
    let mut rng = stream_rng(seed, 901);
    let mut counts = [0u64; 8];
    for _ in 0..STEPS {
        chain.step(&mut config, &mut rng);
        counts[config.as_index()] += 1;
    }
    let tv = 0.5
        * counts
            .iter()
            .enumerate()
            .map(|(s, &c)| (c as f64 / STEPS as f64 - pi.get(s)).abs())
            .sum::<f64>();
    Ok((tv <= 0.01, format!("TV(occupation over 1e7 steps, stationary) = {tv:.2e}")))
}

/// The mixing-time lower bound is computed, its sign reported honestly,
/// and wherever it is positive the exact mixing time respects it. At
/// desk sizes `n·γ > 16` is out of reach, so the bound is negative
/// (vacuous) and the check passes by reporting exactly that.
fn lower_bound_report() -> Result<(bool, String)> {
    let mut details = Vec::new();
    for (n, a, kappa, with_exact) in [
        (8usize, 0.9990234375, 0.0035, true),
        (10usize, 0.9995, 0.002, false),
    ] {
        let params = Params::new(a, 0.0, kappa)?;
        let regime = check_regime(&params, n, 0, Some(3.0))?;
        if !regime.regime_lower {
            return Ok((false, format!("n={n}: sharper regime unexpectedly violated")));
        }
        let g = MultiGraph::edgeless(n)?;
        let bounds = theorem_bounds(&g, &params, 0.25)?;
        if bounds.lower_vacuous != (bounds.lower <= 0.0) {
            return Ok((false, format!("n={n}: vacuity flag disagrees with the sign")));
        }
        if bounds.lower_vacuous {
            details.push(format!("n={n}: lower = {:.4} (vacuous, reported)", bounds.lower));
        } else if with_exact {
            let exact = exact_tmix(&build_kernel(&g, &params)?, 0.25)?;
            if (exact.t as f64) < bounds.lower {
                return Ok((
                    false,
                    format!("n={n}: exact tmix {} below lower bound {}", exact.t, bounds.lower),
                ));
            }
            details.push(format!("n={n}: exact {} >= lower {:.4}", exact.t, bounds.lower));
        } else {
            details.push(format!("n={n}: lower = {:.4} > 0", bounds.lower));
        }
    }
    Ok((true, details.join("; ")))
}

/// Runs the full battery. Deterministic in `seed`; roughly a few
/// seconds of work.
pub fn verify_battery(seed: u64) -> Vec<CheckOutcome> {
    vec![
        outcome("kernel-rows-and-locality", kernel_rows_and_locality(seed)),
        outcome("adjacent-pair-contraction", adjacent_pair_contraction()),
        outcome("second-moment-envelope", second_moment_envelope()),
        outcome("mixing-time-upper-bound", mixing_time_upper_bound()),
        outcome("coalescence-dominates-distance", coalescence_dominates_distance()),
        outcome("distance-sandwich", distance_sandwich()),
        outcome("stationary-closed-forms", stationary_closed_forms()),
        outcome("occupation-measure", occupation_measure(seed)),
        outcome("lower-bound-report", lower_bound_report()),
    ]
}
