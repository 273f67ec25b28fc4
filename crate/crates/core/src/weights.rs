//! Edge weights and deterministic replica seeding.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CompactGraph, EdgeId, Graph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeightDistribution {
    /// Exponential with mean 1.
    Exp1,
    /// Uniform on `(0, 1)`.
    Uniform01,
}

impl WeightDistribution {
    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        loop {
            let x: f64 = match self {
                WeightDistribution::Exp1 => rng.sample(Exp1),
                WeightDistribution::Uniform01 => rng.random(),
            };
            if x > 0.0 {
                return x;
            }
        }
    }
}

/// One strictly positive weight per edge of the base graph, indexed by edge id.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightAssignment {
    weights: Vec<f64>,
}

impl WeightAssignment {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        for (edge, &weight) in weights.iter().enumerate() {
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::InvalidWeight { edge, weight });
            }
        }
        Ok(WeightAssignment { weights })
    }

    /// Checks that the assignment covers exactly the edges of `g`.
    pub fn for_graph(g: &Graph, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != g.edge_count() {
            return Err(Error::WeightCountMismatch {
                expected: g.edge_count(),
                got: weights.len(),
            });
        }
        WeightAssignment::new(weights)
    }

    #[inline]
    pub fn get(&self, e: EdgeId) -> f64 {
        self.weights[e]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weights of a compacted view, indexed by local edge id.
    pub fn restrict(&self, compact: &CompactGraph) -> Vec<f64> {
        compact.edge_of.iter().map(|&e| self.weights[e]).collect()
    }

    /// True when all weights are pairwise distinct.
    pub fn is_generic(&self) -> bool {
        let mut sorted = self.weights.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.windows(2).all(|w| w[0] != w[1])
    }
}

/// Draws i.i.d. weights for every edge of `g`, resampling any edge whose
/// value collides with an earlier one so the assignment stays generic.
pub fn sample_weights<R: Rng + ?Sized>(
    g: &Graph,
    distribution: WeightDistribution,
    rng: &mut R,
) -> WeightAssignment {
    sample_n(g.edge_count(), distribution, rng)
}

pub fn sample_n<R: Rng + ?Sized>(
    m: usize,
    distribution: WeightDistribution,
    rng: &mut R,
) -> WeightAssignment {
    let mut seen = HashSet::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for _ in 0..m {
        let w = loop {
            let w = distribution.draw(rng);
            if seen.insert(w.to_bits()) {
                break w;
            }
        };
        weights.push(w);
    }
    WeightAssignment { weights }
}

/// Master seed plus replica count. Replica `i` draws from ChaCha stream `i`
/// of the generator keyed by the master seed, so replicas are independent of
/// the order in which they are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPlan {
    pub master_seed: u64,
    pub replica_count: usize,
}

impl SeedPlan {
    pub fn new(master_seed: u64, replica_count: usize) -> Self {
        SeedPlan {
            master_seed,
            replica_count,
        }
    }

    pub fn replica_rng(&self, replica: u64) -> ChaCha8Rng {
        replica_rng(self.master_seed, replica)
    }

    /// A plan for an independent sub-experiment (e.g. one row of a sweep).
    pub fn derive(&self, salt: u64) -> SeedPlan {
        SeedPlan {
            master_seed: mix(self.master_seed, salt),
            replica_count: self.replica_count,
        }
    }
}

/// The generator behind every replica stream.
pub type ReplicaRng = ChaCha8Rng;

pub fn replica_rng(master_seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replica);
    rng
}

/// splitmix64 finaliser applied to `seed ^ salt`.
pub fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Graph::new(n, &edges).unwrap()
    }

    #[test]
    fn same_seed_same_weights() {
        let g = path(50);
        let a = sample_weights(&g, WeightDistribution::Exp1, &mut replica_rng(7, 3));
        let b = sample_weights(&g, WeightDistribution::Exp1, &mut replica_rng(7, 3));
        assert_eq!(a, b);
        let c = sample_weights(&g, WeightDistribution::Exp1, &mut replica_rng(7, 4));
        assert_ne!(a, c);
    }

    #[test]
    fn exp1_mean_is_one() {
        let w = sample_n(1_000_000, WeightDistribution::Exp1, &mut replica_rng(11, 0));
        let mean = w.as_slice().iter().sum::<f64>() / w.len() as f64;
        // 3e-3 is three standard errors for 1e6 unit-variance samples
        assert!((mean - 1.0).abs() < 3e-3, "mean {mean}");
        assert!(w.is_generic());
    }

    #[test]
    fn uniform_is_in_unit_interval() {
        let w = sample_n(
            10_000,
            WeightDistribution::Uniform01,
            &mut replica_rng(1, 0),
        );
        assert!(w.as_slice().iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(WeightAssignment::new(vec![1.0, 0.0]).is_err());
        assert!(WeightAssignment::new(vec![1.0, f64::NAN]).is_err());
        assert!(WeightAssignment::for_graph(&path(3), vec![1.0]).is_err());
    }
}
