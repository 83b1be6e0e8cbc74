//! Randomized invariants over the public API: serialization round-trips,
//! monotone infection pressure, degree bookkeeping under the pairing model,
//! tree shape of branching-process graphs, single-flip locality of both the
//! coupled sampler and the exact kernel.

use proptest::prelude::*;

use nsis_core::coupling::{CoupledChain, CoupledState, CouplingKind};
use nsis_core::dynamics::{infection_prob, Params};
use nsis_core::graph::{parse_graph, serialize_graph, Configuration, MultiGraph, VertexId};
use nsis_core::oracle::build_kernel;
use nsis_core::random::{gen_erdos_renyi, gen_galton_watson, gen_regular_multigraph, OffspringLaw};
use nsis_core::seeding;

fn arb_edges(max_n: usize, max_edges: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1..=max_n).prop_flat_map(move |n| {
        proptest::collection::vec((0..n, 0..n), 0..=max_edges)
            .prop_map(move |edges| (n, edges))
    })
}

fn arb_graph(max_n: usize, max_edges: usize) -> impl Strategy<Value = MultiGraph> {
    arb_edges(max_n, max_edges)
        .prop_map(|(n, edges)| MultiGraph::from_edges(n, edges).unwrap())
}

/// Parameters with `p* < 1` guaranteed against the graph's maximum degree.
fn arb_graph_and_params(
    max_n: usize,
    max_edges: usize,
) -> impl Strategy<Value = (MultiGraph, Params)> {
    arb_graph(max_n, max_edges).prop_flat_map(|g| {
        let dmax = g.max_degree().max(1) as f64;
        (Just(g), 0.05f64..0.9, 0.05f64..0.9, 0.0f64..1.0).prop_map(
            move |(g, a, kappa, lf)| {
                let lambda = lf * (0.999 - a) / dmax;
                let params = Params::new(a, lambda, kappa).unwrap();
                (g, params)
            },
        )
    })
}

proptest! {
    #[test]
    fn serialized_graphs_round_trip((n, edges) in arb_edges(12, 30)) {
        let g = MultiGraph::from_edges(n, edges).unwrap();
        let text = serialize_graph(&g);
        let back = parse_graph(&text).unwrap();
        prop_assert_eq!(back.n(), g.n());
        prop_assert_eq!(serialize_graph(&back), text);
        for v in 0..n {
            prop_assert_eq!(
                back.neighbor_degree(VertexId(v)).unwrap(),
                g.neighbor_degree(VertexId(v)).unwrap()
            );
            prop_assert_eq!(back.loops_at(VertexId(v)).unwrap(), g.loops_at(VertexId(v)).unwrap());
        }
    }

    #[test]
    fn serialization_ignores_edge_insertion_order(
        (n, edges) in arb_edges(10, 24),
        rotation in 0usize..24,
    ) {
        let straight = MultiGraph::from_edges(n, edges.clone()).unwrap();
        let mut rotated = edges;
        if !rotated.is_empty() {
            let k = rotation % rotated.len();
            rotated.rotate_left(k);
        }
        let permuted = MultiGraph::from_edges(n, rotated).unwrap();
        prop_assert_eq!(serialize_graph(&straight), serialize_graph(&permuted));
    }

    #[test]
    fn infection_pressure_is_monotone_in_the_infected_set(
        (g, params) in arb_graph_and_params(8, 20),
        mask in 0usize..256,
        x in 0usize..8,
        y in 0usize..8,
    ) {
        let n = g.n();
        let x = x % n;
        let y = y % n;
        prop_assume!(x != y);
        let sigma = Configuration::from_index(n, mask & ((1 << n) - 1));
        prop_assume!(!sigma.get(y));
        let mut more = sigma.clone();
        more.set(y, true);
        let base = infection_prob(&g, &params, &sigma, VertexId(x)).unwrap();
        let bumped = infection_prob(&g, &params, &more, VertexId(x)).unwrap();
        prop_assert!(bumped >= base);
    }

    #[test]
    fn pairing_model_hits_the_degree_target(
        half_n in 1usize..20,
        d in 1usize..6,
    ) {
        // 2·half_n vertices keeps n·d even for every d.
        let n = 2 * half_n;
        let g = gen_regular_multigraph(n, d, 0xD1CE).unwrap();
        for v in 0..n {
            let stubs = g.neighbor_degree(VertexId(v)).unwrap()
                + 2 * g.loops_at(VertexId(v)).unwrap();
            prop_assert_eq!(stubs, d);
        }
    }

    #[test]
    fn branching_trees_are_trees(
        theta in 1.5f64..3.0,
        n_target in 1usize..200,
        seed in 0u64..1000,
    ) {
        let (tree, meta) =
            gen_galton_watson(&OffspringLaw::Poisson { theta }, n_target, seed).unwrap();
        prop_assert_eq!(tree.n(), n_target);
        prop_assert_eq!(tree.edge_instance_count(), n_target - 1);
        prop_assert_eq!(tree.self_loop_count(), 0);
        prop_assert_eq!(meta.generation_sizes.iter().sum::<usize>(), n_target);
    }

    #[test]
    fn coupled_steps_move_the_distance_by_at_most_one(
        (g, params) in arb_graph_and_params(8, 20),
        s_mask in 0usize..256,
        e_mask in 0usize..256,
        independent in any::<bool>(),
        seed in 0u64..1000,
    ) {
        let n = g.n();
        let kind =
            if independent { CouplingKind::Independent } else { CouplingKind::CommonUniform };
        let coupled = CoupledChain::new(&g, params, kind).unwrap();
        let mut state = CoupledState::new(
            Configuration::from_index(n, s_mask & ((1 << n) - 1)),
            Configuration::from_index(n, e_mask & ((1 << n) - 1)),
        )
        .unwrap();
        let mut rng = seeding::master_rng(seed);
        let mut rho = state.rho();
        let mut met = state.coalesced();
        for _ in 0..30 {
            coupled.step(&mut state, &mut rng);
            prop_assert!(state.rho().abs_diff(rho) <= 1);
            if met {
                prop_assert!(state.coalesced(), "coalesced pairs must stay together");
            }
            rho = state.rho();
            met = state.coalesced();
        }
    }

    #[test]
    fn random_graph_kernels_are_stochastic_and_local(
        n in 1usize..=6,
        p_edge in 0.0f64..1.0,
        seed in 0u64..1000,
        a in 0.05f64..0.9,
        kappa in 0.05f64..0.9,
        lf in 0.0f64..1.0,
    ) {
        let g = gen_erdos_renyi(n, p_edge, seed).unwrap();
        let lambda = lf * (0.999 - a) / g.max_degree().max(1) as f64;
        let params = Params::new(a, lambda, kappa).unwrap();
        let k = build_kernel(&g, &params).unwrap();
        for s in 0..k.n_states() {
            let row = k.row(s);
            let sum: f64 = row.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12, "row {s} sums to {sum}");
            for (e, &pr) in row.iter().enumerate() {
                prop_assert!(pr >= 0.0);
                if (s ^ e).count_ones() > 1 {
                    prop_assert!(pr == 0.0, "K[{s},{e}] = {pr} breaks single-flip locality");
                }
            }
        }
    }

    #[test]
    fn configuration_indexing_round_trips(n in 1usize..=20, raw in any::<usize>()) {
        let idx = raw & ((1usize << n) - 1);
        let sigma = Configuration::from_index(n, idx);
        prop_assert_eq!(sigma.len(), n);
        prop_assert_eq!(sigma.as_index(), idx);
        prop_assert_eq!(sigma.infected_count(), idx.count_ones() as usize);
    }
}
