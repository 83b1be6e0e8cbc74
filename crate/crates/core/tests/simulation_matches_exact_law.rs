//! The sampler and the exact kernel describe the same chain: empirical
//! transition frequencies must sit inside binomial confidence bands around
//! the kernel's probabilities.

use nsis_core::dynamics::{run_chain, Chain, Params};
use nsis_core::graph::{Configuration, MultiGraph};
use nsis_core::oracle::{build_kernel, stationary};
use nsis_core::seeding;

fn params(a: f64, lambda: f64, kappa: f64) -> Params {
    Params::new(a, lambda, kappa).unwrap()
}

/// |freq − p| must stay within four binomial standard deviations (plus one
/// count of slack for p at the boundary).
fn assert_within_band(freq: f64, p: f64, reps: f64, what: &str) {
    let sigma = (p * (1.0 - p) / reps).sqrt();
    assert!(
        (freq - p).abs() <= 4.0 * sigma + 1.0 / reps,
        "{what}: frequency {freq} vs probability {p} (sigma = {sigma})"
    );
}

#[test]
fn one_step_frequencies_match_the_kernel_row() {
    let g = MultiGraph::path(3).unwrap();
    let p = params(0.35, 0.08, 0.25);
    let chain = Chain::new(&g, p).unwrap();
    let kernel = build_kernel(&g, &p).unwrap();

    let start = 5usize; // vertices 0 and 2 infected
    let reps = 1_000_000u64;
    let mut counts = [0u64; 8];
    for i in 0..reps {
        let mut sigma = Configuration::from_index(3, start);
        let mut rng = seeding::stream_rng(0xA11CE, i);
        chain.step(&mut sigma, &mut rng);
        counts[sigma.as_index()] += 1;
    }
    for (target, &c) in counts.iter().enumerate() {
        assert_within_band(
            c as f64 / reps as f64,
            kernel.entry(start, target),
            reps as f64,
            &format!("state {start} -> {target}"),
        );
    }
}

#[test]
fn four_step_frequencies_match_the_kernel_power() {
    let g = MultiGraph::edgeless(2).unwrap();
    let p = params(0.5, 0.0, 0.25);
    let chain = Chain::new(&g, p).unwrap();
    let kernel = build_kernel(&g, &p).unwrap();

    // K^4 by two squarings of the 4x4 matrix.
    let dim = 4usize;
    let mut pow: Vec<f64> = (0..dim * dim)
        .map(|idx| kernel.entry(idx / dim, idx % dim))
        .collect();
    for _ in 0..2 {
        let mut next = vec![0.0; dim * dim];
        for i in 0..dim {
            for k in 0..dim {
                let aik = pow[i * dim + k];
                for j in 0..dim {
                    next[i * dim + j] += aik * pow[k * dim + j];
                }
            }
        }
        pow = next;
    }

    let start = 1usize;
    let reps = 400_000u64;
    let mut counts = [0u64; 4];
    for i in 0..reps {
        let mut sigma = Configuration::from_index(2, start);
        let mut rng = seeding::stream_rng(0xBEE, i);
        for _ in 0..4 {
            chain.step(&mut sigma, &mut rng);
        }
        counts[sigma.as_index()] += 1;
    }
    for (target, &c) in counts.iter().enumerate() {
        assert_within_band(
            c as f64 / reps as f64,
            pow[start * dim + target],
            reps as f64,
            &format!("state {start} -> {target} in 4 steps"),
        );
    }
}

#[test]
fn occupation_fraction_converges_to_the_stationary_mean() {
    // Isolated vertices: stationary infection probability a/(a+kappa) = 0.75
    // per vertex, so the long-run mean infected fraction must match it.
    let g = MultiGraph::edgeless(5).unwrap();
    let p = params(0.6, 0.0, 0.2);
    let steps = 2_000_000u64;
    let burn_in = 1_000usize;
    let traj = run_chain(&g, &p, &Configuration::all_susceptible(5), steps, 1, 99).unwrap();
    let samples = &traj.infected_counts[burn_in..];
    let mean_fraction =
        samples.iter().map(|&c| c as f64).sum::<f64>() / (samples.len() as f64 * 5.0);
    assert!(
        (mean_fraction - 0.75).abs() < 0.01,
        "time-average fraction {mean_fraction} far from 0.75"
    );

    // The same mean, exactly, from the stationary distribution.
    let kernel = build_kernel(&g, &p).unwrap();
    let pi = stationary(&kernel).unwrap();
    let exact_mean: f64 = pi
        .probs()
        .iter()
        .enumerate()
        .map(|(s, &w)| w * s.count_ones() as f64 / 5.0)
        .sum();
    assert!((exact_mean - 0.75).abs() < 1e-12);
}
