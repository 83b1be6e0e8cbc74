//! Shape sanity for branching-process trees: the largest offspring count of
//! a Poisson(θ) tree on n vertices grows like ln n / ln ln n, so the
//! normalized ratio must stay within a wide constant band across three
//! decades of n.

use nsis_core::graph::VertexId;
use nsis_core::random::{gen_galton_watson, OffspringLaw};

#[test]
fn max_offspring_scales_like_log_over_loglog() {
    let law = OffspringLaw::Poisson { theta: 2.0 };
    for (batch, n) in [(1u64, 1_000usize), (2, 10_000), (3, 100_000)] {
        let mut ratios = Vec::with_capacity(100);
        for i in 0..100u64 {
            let (tree, meta) = gen_galton_watson(&law, n, batch * 1_000 + i).unwrap();
            assert_eq!(meta.generation_sizes.iter().sum::<usize>(), n);
            let max_children = (0..n)
                .map(|v| {
                    let degree = tree.neighbor_degree(VertexId(v)).unwrap();
                    if v == 0 {
                        degree // the root has no parent edge
                    } else {
                        degree - 1
                    }
                })
                .max()
                .unwrap();
            let nf = n as f64;
            ratios.push(max_children as f64 * nf.ln().ln() / nf.ln());
        }
        ratios.sort_by(f64::total_cmp);
        let median = ratios[50];
        assert!(
            (0.3..=3.0).contains(&median),
            "normalized max offspring {median} out of band at n = {n}"
        );
    }
}
