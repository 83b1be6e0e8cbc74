//! The coupled sampler against the exact pair kernel: marginals, survival
//! curves, and the Monte Carlo contraction estimate must all agree with
//! their exactly computed counterparts.

use nsis_core::coupling::{
    contraction_estimate, tail_curve, CoupledChain, CoupledState, CouplingKind, PairChoice,
};
use nsis_core::dynamics::Params;
use nsis_core::graph::{Configuration, MultiGraph};
use nsis_core::oracle::{build_coupled_kernel, build_kernel, exact_contraction_check};
use nsis_core::seeding;

fn params(a: f64, lambda: f64, kappa: f64) -> Params {
    Params::new(a, lambda, kappa).unwrap()
}

fn assert_within_band(freq: f64, p: f64, reps: f64, what: &str) {
    let sigma = (p * (1.0 - p) / reps).sqrt();
    assert!(
        (freq - p).abs() <= 4.0 * sigma + 1.0 / reps,
        "{what}: frequency {freq} vs probability {p} (sigma = {sigma})"
    );
}

#[test]
fn coupled_one_step_marginals_match_the_single_kernel() {
    let g = MultiGraph::path(3).unwrap();
    let p = params(0.4, 0.06, 0.25);
    let kernel = build_kernel(&g, &p).unwrap();
    let (s0, e0) = (3usize, 6usize);
    let reps = 400_000u64;

    for kind in [CouplingKind::Independent, CouplingKind::CommonUniform] {
        let coupled = CoupledChain::new(&g, p, kind).unwrap();
        let mut sigma_counts = [0u64; 8];
        let mut eta_counts = [0u64; 8];
        for i in 0..reps {
            let mut state = CoupledState::new(
                Configuration::from_index(3, s0),
                Configuration::from_index(3, e0),
            )
            .unwrap();
            let mut rng = seeding::stream_rng(0xC0FFEE, i);
            coupled.step(&mut state, &mut rng);
            sigma_counts[state.sigma().as_index()] += 1;
            eta_counts[state.eta().as_index()] += 1;
        }
        for target in 0..8 {
            assert_within_band(
                sigma_counts[target] as f64 / reps as f64,
                kernel.entry(s0, target),
                reps as f64,
                &format!("{kind:?} sigma-marginal {s0} -> {target}"),
            );
            assert_within_band(
                eta_counts[target] as f64 / reps as f64,
                kernel.entry(e0, target),
                reps as f64,
                &format!("{kind:?} eta-marginal {e0} -> {target}"),
            );
        }
    }
}

#[test]
fn survival_curve_matches_the_exact_extremal_tail() {
    let g = MultiGraph::path(3).unwrap();
    let p = params(0.7, 0.02, 0.15);
    let grid: Vec<u64> = (0..=30).collect();
    let replicas = 20_000usize;

    for kind in [CouplingKind::Independent, CouplingKind::CommonUniform] {
        // Exact tail of the extremal pair by iterating the pair kernel on the
        // off-diagonal indicator.
        let ck = build_coupled_kernel(&g, &p, kind).unwrap();
        let dim = ck.n_pairs();
        let extremal = ck.pair_index(0, 7);
        let mut v: Vec<f64> =
            (0..dim).map(|m| if ck.rho(m) > 0 { 1.0 } else { 0.0 }).collect();
        let mut exact = Vec::with_capacity(31);
        for t in 0..=30 {
            exact.push(v[extremal]);
            if t < 30 {
                let mut next = vec![0.0; dim];
                for (m, slot) in next.iter_mut().enumerate() {
                    *slot = ck.row(m).iter().zip(&v).map(|(a, b)| a * b).sum();
                }
                v = next;
            }
        }

        let curve =
            tail_curve(&g, &p, kind, PairChoice::Extremal, &grid, replicas, 77).unwrap();
        for (point, &truth) in curve.iter().zip(&exact) {
            assert_within_band(
                point.survival,
                truth,
                replicas as f64,
                &format!("{kind:?} survival at t = {}", point.t),
            );
        }
    }
}

#[test]
fn contraction_estimate_brackets_the_exact_worst_pair() {
    // Four-cycle in the strong-noise window; the deterministic all-infected
    // base in the estimator hits the exact worst adjacent pair.
    let g = MultiGraph::cycle(4).unwrap();
    let kappa = 1.0 / 24.0;
    let a = 1.0 - kappa / 2.0;
    let lambda = kappa / 8.0;
    let p = params(a, lambda, kappa);

    let exact = exact_contraction_check(&g, &p).unwrap();
    assert!(exact.regime.regime_upper, "recipe parameters must sit inside the regime");
    assert!(exact.max_ok && exact.min_ok);

    let est = contraction_estimate(&g, &p, CouplingKind::Independent, 50_000, 11).unwrap();
    let slack = 5.0 * est.max_stderr.max(2e-4);
    assert!(
        (est.max_mean_rho1 - exact.max_expected_rho1).abs() <= slack,
        "estimate {} vs exact worst pair {} (slack {slack})",
        est.max_mean_rho1,
        exact.max_expected_rho1
    );
    // The exact contraction ceiling also caps the estimate, up to noise.
    assert!(est.max_mean_rho1 <= exact.upper_bound + slack);
}
