mod common;

use common::{exp_weights, random_connected, random_tree};
use matchdecay_core::mwm::{
    certify_no_augmenting_path, matching_weight, mwm_branch_bound, mwm_enumerate, mwm_tree, solve,
    Certificate, Matching,
};
use proptest::prelude::*;

#[test]
fn tree_solver_matches_enumeration() {
    for seed in 0..500u64 {
        let n = 2 + (seed % 13) as usize;
        let g = random_tree(seed, n);
        let w = exp_weights(&g, seed);
        let a = mwm_tree(&g.view(), &w).unwrap();
        let b = mwm_enumerate(&g.view(), &w).unwrap();
        assert_eq!(a.matching, b.matching, "seed {seed}");
        assert_eq!(a.total_weight, b.total_weight);
    }
}

#[test]
fn branch_bound_matches_enumeration() {
    for seed in 0..300u64 {
        let g = random_connected(seed, 10);
        let w = exp_weights(&g, seed);
        let a = mwm_branch_bound(&g.view(), &w).unwrap();
        let b = mwm_enumerate(&g.view(), &w).unwrap();
        assert_eq!(a.matching, b.matching, "seed {seed}");
    }
}

#[test]
fn optimum_is_certified_and_every_worse_matching_is_not() {
    for seed in 0..60u64 {
        let g = random_connected(seed, 7);
        let w = exp_weights(&g, seed);
        let v = g.view();
        let opt = solve(&v, &w).unwrap();
        assert_eq!(
            certify_no_augmenting_path(&v, &w, &opt.matching).unwrap(),
            Certificate::NoAugmentingPath
        );
        // every matching of the graph, by brute force over edge subsets
        let m = g.edge_count();
        for mask in 0u32..1 << m {
            let candidate = Matching::new((0..m).filter(|i| mask >> i & 1 == 1).collect());
            if candidate.validate(&v).is_err() {
                continue;
            }
            let worse = matching_weight(&candidate, &w) < opt.total_weight;
            let cert = certify_no_augmenting_path(&v, &w, &candidate).unwrap();
            assert_eq!(cert.conclusive(), Some(!worse), "seed {seed} mask {mask:b}");
        }
    }
}

#[test]
fn deleted_views_solve_like_their_compaction() {
    for seed in 0..100u64 {
        let g = random_connected(seed, 10);
        let w = exp_weights(&g, seed);
        let view = g.view().delete_vertices([0]);
        let a = solve(&view, &w).unwrap();
        let b = mwm_enumerate(&view, &w).unwrap();
        assert_eq!(a.matching, b.matching);
        assert!(a.matching.edges().iter().all(|&e| view.contains_edge(e)));
    }
}

proptest! {
    #[test]
    fn matching_is_valid_and_weight_consistent(seed in any::<u64>()) {
        let g = random_connected(seed, 9);
        let w = exp_weights(&g, seed);
        let r = solve(&g.view(), &w).unwrap();
        prop_assert!(r.matching.validate(&g.view()).is_ok());
        prop_assert_eq!(r.total_weight, matching_weight(&r.matching, &w));
    }

    #[test]
    fn tree_solver_on_larger_trees_is_locally_optimal(seed in any::<u64>(), n in 15usize..60) {
        let g = random_tree(seed, n);
        let w = exp_weights(&g, seed);
        let r = mwm_tree(&g.view(), &w).unwrap();
        prop_assert_eq!(
            certify_no_augmenting_path(&g.view(), &w, &r.matching).unwrap(),
            Certificate::NoAugmentingPath
        );
    }
}
