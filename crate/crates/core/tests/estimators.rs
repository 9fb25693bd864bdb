use std::collections::BTreeMap;

use dimp_core::graph::{Graph, NodeId};
use dimp_core::greedy_select;
use dimp_core::oracle::{
    estimate_influence_mc, exact_influence_bruteforce, exact_rr_distribution, total_variation,
};
use dimp_core::rng::stream;
use dimp_core::rr::{
    build_collection, sample_rr_set_from_root, InvertedIndex, RRCollection, RRSet,
};
use proptest::prelude::*;

fn cyclic() -> Graph {
    Graph::from_weighted_edges(
        5,
        &[
            (0, 1, 0.5),
            (1, 2, 0.6),
            (2, 0, 0.4),
            (2, 3, 0.3),
            (3, 1, 0.5),
            (4, 3, 0.7),
            (3, 4, 0.2),
        ],
    )
    .unwrap()
}

#[test]
fn rooted_samples_follow_exact_law() {
    let g = cyclic();
    for root in 0..g.n() as NodeId {
        let mut rng = stream(3, &[root as u64]);
        let mut counts = BTreeMap::new();
        for _ in 0..200_000 {
            *counts
                .entry(sample_rr_set_from_root(&g, root, &mut rng).sorted_nodes())
                .or_insert(0usize) += 1;
        }
        let tv = total_variation(&counts, &exact_rr_distribution(&g, root).unwrap());
        assert!(tv < 0.01, "root {root}: {tv}");
    }
}

#[test]
fn rr_and_mc_estimates_agree_with_exact_influence() {
    let g = cyclic();
    let c = build_collection(&g, 400_000, 8).unwrap();
    for seeds in [vec![0], vec![3], vec![1, 4], vec![0, 2, 4]] {
        let exact = exact_influence_bruteforce(&g, &seeds).unwrap();
        let rr = c.estimate_influence(&seeds);
        assert!(
            (rr - exact).abs() / exact < 0.01,
            "{seeds:?}: rr {rr} exact {exact}"
        );
        let mc = estimate_influence_mc(&g, &seeds, 50_000, 9).unwrap();
        assert!(
            (mc.mean - exact).abs() <= 4.0 * mc.stderr,
            "{seeds:?}: mc {mc:?} exact {exact}"
        );
    }
}

fn arb_collection() -> impl Strategy<Value = RRCollection> {
    (2usize..=10).prop_flat_map(|n| {
        prop::collection::vec(
            prop::collection::btree_set(0..n as NodeId, 1..=n.min(4)),
            0..30,
        )
        .prop_map(move |sets| {
            let sets: Vec<RRSet> = sets
                .into_iter()
                .map(|s| {
                    let nodes: Vec<NodeId> = s.into_iter().collect();
                    let parents = vec![nodes[0]; nodes.len()];
                    RRSet::from_parts(nodes, parents).unwrap()
                })
                .collect();
            let m = sets.len();
            RRCollection::from_sets(n, sets, m, 0, 0).unwrap()
        })
    })
}

fn naive_greedy(c: &RRCollection, k: usize) -> (Vec<NodeId>, usize) {
    let mut seeds: Vec<NodeId> = Vec::new();
    for _ in 0..k {
        let base = c.coverage(&seeds);
        let best = (0..c.n() as NodeId)
            .filter(|v| !seeds.contains(v))
            .map(|v| {
                let mut s = seeds.clone();
                s.push(v);
                (c.coverage(&s) - base, v)
            })
            .filter(|&(gain, _)| gain > 0)
            .max_by_key(|&(gain, v)| (gain, std::cmp::Reverse(v)));
        match best {
            Some((_, v)) => seeds.push(v),
            None => break,
        }
    }
    let cov = c.coverage(&seeds);
    (seeds, cov)
}

proptest! {
    #[test]
    fn lazy_greedy_equals_naive(c in arb_collection(), k in 1usize..=4) {
        let lazy = greedy_select(&c, k).unwrap();
        let (seeds, cov) = naive_greedy(&c, k);
        prop_assert_eq!(&lazy.seeds, &seeds);
        prop_assert_eq!(lazy.total_coverage, cov);
        prop_assert!(lazy.marginal_coverage.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn index_lists_exactly_the_containing_sets(c in arb_collection()) {
        let index = InvertedIndex::build(c.n(), c.sets());
        prop_assert_eq!(&index, c.index());
        for v in 0..c.n() as NodeId {
            let expected: Vec<u32> = c
                .sets()
                .iter()
                .enumerate()
                .filter(|(_, s)| s.contains(v))
                .map(|(i, _)| i as u32)
                .collect();
            prop_assert_eq!(index.sets_containing(v), &expected[..]);
        }
        prop_assert_eq!(index.total_entries(), c.total_size());
    }

    #[test]
    fn collections_are_seed_deterministic(seed in any::<u64>()) {
        let g = cyclic();
        let a = build_collection(&g, 300, seed).unwrap();
        let b = build_collection(&g, 300, seed).unwrap();
        prop_assert_eq!(a.sets(), b.sets());
    }
}
