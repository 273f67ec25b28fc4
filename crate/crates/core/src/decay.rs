//! Estimators of the correlation-decay functional
//! `rho_r(G, e) = E sup_A |1{e in M_B} - 1{e in M_{B \ A}}|`, where `B` is
//! the radius-`r` ball around `e` and `A` ranges over subsets of its boundary.
//!
//! Three per-replica quantities are available. `ExactSup` enumerates every
//! `A`. The two bracket variants replace the sup by the gap between the
//! membership tests built from the lower and upper local bounds, which holds
//! for every `A` at once and is therefore never smaller than the exact value.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bonus::{sandwich_with_budget, LocalBoundResult, DEFAULT_WALK_BUDGET};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, SubgraphView, VertexId};
use crate::mwm;
use crate::stats::summarize;
use crate::weights::{sample_weights, SeedPlan, WeightAssignment, WeightDistribution};

pub const DEFAULT_BOUNDARY_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayMethod {
    ExactSup,
    BracketTree,
    BracketGeneral,
}

impl DecayMethod {
    pub fn name(self) -> &'static str {
        match self {
            DecayMethod::ExactSup => "exact",
            DecayMethod::BracketTree => "bracket-tree",
            DecayMethod::BracketGeneral => "bracket-general",
        }
    }
}

impl fmt::Display for DecayMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecayMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "exact-sup" | "exact_sup" => Ok(DecayMethod::ExactSup),
            "bracket-tree" | "bracket_tree" => Ok(DecayMethod::BracketTree),
            "bracket-general" | "bracket_general" => Ok(DecayMethod::BracketGeneral),
            other => Err(Error::InfeasibleParameters(format!(
                "unknown decay method `{other}`"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    pub r: usize,
    pub method: DecayMethod,
    pub n_replicas: usize,
    pub mean: f64,
    pub std_error: f64,
    pub seed: u64,
}

/// The ball around `e` and its boundary, computed once per `(G, e, r)`.
#[derive(Clone, Debug)]
pub struct DecayProblem<'g> {
    g: &'g Graph,
    e: EdgeId,
    r: usize,
    u: VertexId,
    v: VertexId,
    ball: SubgraphView<'g>,
    boundary: Vec<VertexId>,
    boundary_cap: usize,
    walk_budget: u64,
}

impl<'g> DecayProblem<'g> {
    pub fn new(g: &'g Graph, e: EdgeId, r: usize) -> Result<Self> {
        let (u, v) = g.check_edge(e)?;
        let full = g.view();
        let ball = full.ball_around_edge(e, r)?;
        let boundary = full.boundary(&ball);
        Ok(DecayProblem {
            g,
            e,
            r,
            u,
            v,
            ball,
            boundary,
            boundary_cap: DEFAULT_BOUNDARY_CAP,
            walk_budget: DEFAULT_WALK_BUDGET,
        })
    }

    pub fn with_boundary_cap(mut self, cap: usize) -> Self {
        self.boundary_cap = cap;
        self
    }

    pub fn with_walk_budget(mut self, budget: u64) -> Self {
        self.walk_budget = budget;
        self
    }

    pub fn graph(&self) -> &'g Graph {
        self.g
    }

    pub fn edge(&self) -> EdgeId {
        self.e
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn ball(&self) -> &SubgraphView<'g> {
        &self.ball
    }

    pub fn boundary(&self) -> &[VertexId] {
        &self.boundary
    }

    fn in_optimum(&self, view: &SubgraphView<'_>, w: &WeightAssignment) -> Result<bool> {
        if !view.contains_edge(self.e) {
            return Ok(false);
        }
        Ok(mwm::solve(view, w)?.matching.contains(self.e))
    }

    /// Membership of `e` in `M_{B \ A}` for every boundary subset `A`,
    /// indexed by the bit mask of `A` over [`boundary`](Self::boundary).
    pub fn subset_indicators(&self, w: &WeightAssignment) -> Result<Vec<bool>> {
        let k = self.boundary.len();
        if k > self.boundary_cap {
            return Err(Error::BoundaryCapExceeded {
                size: k,
                cap: self.boundary_cap,
            });
        }
        (0..1usize << k)
            .map(|mask| {
                let removed = (0..k)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| self.boundary[i]);
                self.in_optimum(&self.ball.delete_vertices(removed), w)
            })
            .collect()
    }

    /// `sup_A |1{e in M_B} - 1{e in M_{B \ A}}|` by full enumeration.
    pub fn exact(&self, w: &WeightAssignment) -> Result<f64> {
        let ind = self.subset_indicators(w)?;
        Ok(f64::from(u8::from(ind.iter().any(|&x| x != ind[0]))))
    }

    fn bounds(
        &self,
        view: &SubgraphView<'_>,
        w: &WeightAssignment,
        x: VertexId,
    ) -> Result<LocalBoundResult> {
        sandwich_with_budget(view, w, x, self.r, self.walk_budget)
    }

    fn bracket(&self, w: &WeightAssignment, bu: LocalBoundResult, bv: LocalBoundResult) -> f64 {
        let we = w.get(self.e);
        let lo = bu.lo() + bv.lo();
        let hi = bu.hi() + bv.hi();
        let above_lo = lo < we;
        let above_hi = hi < we;
        debug_assert!(
            above_lo || !above_hi,
            "lower threshold exceeds upper threshold"
        );
        f64::from(u8::from(above_lo != above_hi))
    }

    /// Bracket on a tree-shaped ball, with both bounds taken on the two sides
    /// of `G \ e`. The bounds look at the full graph so that boundary vertices
    /// keep their outside neighbours when the depth-`r` base case is applied.
    pub fn bracket_tree(&self, w: &WeightAssignment) -> Result<f64> {
        if !self.ball.is_tree() {
            return Err(Error::NotATree);
        }
        let cut = self.g.view().delete_edges([self.e]);
        let bu = self.bounds(&cut, w, self.u)?;
        let bv = self.bounds(&cut, w, self.v)?;
        Ok(self.bracket(w, bu, bv))
    }

    /// Bracket with `B(u, G \ e)` and `B(v, G \ u)` bounded at depth `r`.
    pub fn bracket_general(&self, w: &WeightAssignment) -> Result<f64> {
        let full = self.g.view();
        let bu = self.bounds(&full.delete_edges([self.e]), w, self.u)?;
        let bv = self.bounds(&full.delete_vertices([self.u]), w, self.v)?;
        Ok(self.bracket(w, bu, bv))
    }

    pub fn replica(&self, method: DecayMethod, w: &WeightAssignment) -> Result<f64> {
        match method {
            DecayMethod::ExactSup => self.exact(w),
            DecayMethod::BracketTree => self.bracket_tree(w),
            DecayMethod::BracketGeneral => self.bracket_general(w),
        }
    }

    /// `|1{e in M_G} - 1{e in M_B}|`, the disagreement with no deletions.
    pub fn rough(&self, w: &WeightAssignment) -> Result<f64> {
        let whole = self.in_optimum(&self.g.view(), w)?;
        let ball = self.in_optimum(&self.ball, w)?;
        Ok(f64::from(u8::from(whole != ball)))
    }

    /// Removes from the ball every vertex matched in `M_G` through an edge
    /// that leaves the ball, and checks that `e`'s membership is unchanged.
    pub fn restriction_consistent(&self, w: &WeightAssignment) -> Result<bool> {
        let global = mwm::solve(&self.g.view(), w)?;
        let mut cut = Vec::new();
        for &f in global.matching.edges() {
            if !self.ball.contains_edge(f) {
                let (a, b) = self.g.endpoints(f);
                cut.extend([a, b].into_iter().filter(|&x| self.ball.contains_vertex(x)));
            }
        }
        let local = self.in_optimum(&self.ball.delete_vertices(cut), w)?;
        Ok(local == global.matching.contains(self.e))
    }
}

pub fn rho_replica_exact(g: &Graph, w: &WeightAssignment, e: EdgeId, r: usize) -> Result<f64> {
    DecayProblem::new(g, e, r)?.exact(w)
}

pub fn rho_replica_bracket_tree(
    g: &Graph,
    w: &WeightAssignment,
    e: EdgeId,
    r: usize,
) -> Result<f64> {
    DecayProblem::new(g, e, r)?.bracket_tree(w)
}

pub fn rho_replica_bracket_general(
    g: &Graph,
    w: &WeightAssignment,
    e: EdgeId,
    r: usize,
) -> Result<f64> {
    DecayProblem::new(g, e, r)?.bracket_general(w)
}

pub fn restriction_consistency(
    g: &Graph,
    w: &WeightAssignment,
    e: EdgeId,
    r: usize,
) -> Result<bool> {
    DecayProblem::new(g, e, r)?.restriction_consistent(w)
}

/// Evaluates `f` on replicas `range`, each with its own stream of the plan,
/// on the current rayon pool. Results come back in replica order.
pub fn replica_values<F>(plan: &SeedPlan, range: Range<u64>, f: F) -> Result<Vec<f64>>
where
    F: Fn(u64, &mut ChaCha8Rng) -> Result<f64> + Sync,
{
    range
        .into_par_iter()
        .map(|i| f(i, &mut plan.replica_rng(i)))
        .collect()
}

/// Per-replica values of `method` with fresh exp(1) weights on all of `G`.
pub fn rho_values(
    problem: &DecayProblem<'_>,
    method: DecayMethod,
    plan: &SeedPlan,
    range: Range<u64>,
) -> Result<Vec<f64>> {
    replica_values(plan, range, |_, rng| {
        let w = sample_weights(problem.graph(), WeightDistribution::Exp1, rng);
        problem.replica(method, &w)
    })
}

pub fn rho_estimate(
    g: &Graph,
    e: EdgeId,
    r: usize,
    method: DecayMethod,
    n_replicas: usize,
    plan: &SeedPlan,
) -> Result<DecayEstimate> {
    let problem = DecayProblem::new(g, e, r)?;
    let values = rho_values(&problem, method, plan, 0..n_replicas as u64)?;
    let s = summarize(&values);
    Ok(DecayEstimate {
        r,
        method,
        n_replicas,
        mean: s.mean,
        std_error: s.std_error,
        seed: plan.master_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::path;

    #[test]
    fn whole_graph_ball_has_no_boundary() {
        let g = path(4).unwrap();
        let p = DecayProblem::new(&g, 1, 3).unwrap();
        assert!(p.boundary().is_empty());
        let est = rho_estimate(&g, 1, 3, DecayMethod::ExactSup, 20, &SeedPlan::new(1, 20)).unwrap();
        assert_eq!((est.mean, est.std_error), (0.0, 0.0));
        let single = Graph::from_edges(&[(0, 1)]).unwrap();
        let w = WeightAssignment::new(vec![1.0]).unwrap();
        assert_eq!(rho_replica_exact(&single, &w, 0, 0).unwrap(), 0.0);
        assert_eq!(rho_replica_bracket_tree(&single, &w, 0, 0).unwrap(), 0.0);
    }

    #[test]
    fn adversarial_path_flips() {
        // path 0..6, middle edge (2,3), r = 1: ball {1,2,3,4}, boundary {1,4}.
        // Heavy edges (1,2) and (3,4) keep the middle edge out; deleting 1 and 4 lets it in.
        let g = path(7).unwrap();
        let w = WeightAssignment::new(vec![0.1, 5.0, 1.0, 5.0, 0.1, 0.2]).unwrap();
        let p = DecayProblem::new(&g, 2, 1).unwrap();
        assert_eq!(p.boundary(), &[1, 4]);
        assert_eq!(p.exact(&w).unwrap(), 1.0);
        assert_eq!(p.bracket_tree(&w).unwrap(), 1.0);
        assert_eq!(p.bracket_general(&w).unwrap(), 1.0);
        assert!(p.restriction_consistent(&w).unwrap());
    }

    #[test]
    fn heavy_edge_brackets_to_zero() {
        let g = path(9).unwrap();
        let w = WeightAssignment::new(vec![0.3, 0.5, 0.2, 100.0, 0.4, 0.6, 0.1, 0.7]).unwrap();
        for r in 1..4 {
            assert_eq!(rho_replica_bracket_tree(&g, &w, 3, r).unwrap(), 0.0);
        }
    }

    #[test]
    fn radius_zero_bracket_is_one() {
        let g = path(5).unwrap();
        let w = WeightAssignment::new(vec![0.3, 0.5, 0.2, 0.4]).unwrap();
        assert_eq!(rho_replica_bracket_general(&g, &w, 1, 0).unwrap(), 1.0);
    }

    #[test]
    fn method_names_round_trip() {
        for m in [
            DecayMethod::ExactSup,
            DecayMethod::BracketTree,
            DecayMethod::BracketGeneral,
        ] {
            assert_eq!(m.name().parse::<DecayMethod>().unwrap(), m);
        }
        assert!("nope".parse::<DecayMethod>().is_err());
    }

    #[test]
    fn estimate_is_reproducible() {
        let g = path(30).unwrap();
        let plan = SeedPlan::new(9, 200);
        let a = rho_estimate(&g, 14, 4, DecayMethod::BracketTree, 200, &plan).unwrap();
        let b = rho_estimate(&g, 14, 4, DecayMethod::BracketTree, 200, &plan).unwrap();
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a.mean));
    }
}
