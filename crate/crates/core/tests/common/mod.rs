#![allow(dead_code)]

use matchdecay_core::generate::{generate, Family};
use matchdecay_core::weights::{replica_rng, sample_weights};
use matchdecay_core::{Graph, WeightAssignment, WeightDistribution};
use rand::Rng;

/// Random tree on `n` vertices with maximum degree at most 4.
pub fn random_tree(seed: u64, n: usize) -> Graph {
    generate(
        &Family::RandomTree {
            n,
            degree_weights: vec![0.0, 1.0, 1.0, 1.0, 1.0],
        },
        seed,
    )
    .unwrap()
}

/// Connected graph on at most `max_n` vertices: the giant component of a
/// sparse random graph with a seed-dependent size and density.
pub fn random_connected(seed: u64, max_n: usize) -> Graph {
    let mut rng = replica_rng(seed, u64::MAX);
    loop {
        let n = rng.random_range(3..=max_n);
        let lambda = rng.random_range(1.5..4.0);
        let g = generate(&Family::ErdosRenyi { n, lambda }, rng.random()).unwrap();
        if g.vertex_count() >= 3 {
            return g;
        }
    }
}

pub fn exp_weights(g: &Graph, seed: u64) -> WeightAssignment {
    sample_weights(g, WeightDistribution::Exp1, &mut replica_rng(seed, 1))
}
