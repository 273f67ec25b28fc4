//! Exact maximum-weight matching and optimality certification.
//!
//! Three solvers are provided:
//!
//! * [`mwm_tree`] decides each edge of a tree from the two directed subtree
//!   bonuses (`w_uv > B(u, T_{v->u}) + B(v, T_{u->v})`), in linear time.
//! * [`mwm_branch_bound`] branches on the lowest live vertex (unmatched, or
//!   matched to one of its live neighbours) and prunes with the half-sum of
//!   per-vertex maximum incident weights.
//! * [`mwm_enumerate`] includes/excludes edges in id order with the same
//!   prune; it is the reference oracle and is capped at 30 edges by default.
//!
//! All of them assume generic weights. Exact ties in the branch-and-bound
//! and enumeration solvers resolve to the lexicographically smallest edge-id
//! set; the tree solver reports a tie as [`Error::NonGenericWeights`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CompactGraph, EdgeId, Graph, SubgraphView, VertexId};
use crate::weights::WeightAssignment;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    TreeDp,
    BranchBound,
    Enumeration,
}

/// A set of edge ids, kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matching {
    edges: Vec<EdgeId>,
}

impl Matching {
    pub fn new(mut edges: Vec<EdgeId>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        Matching { edges }
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Checks that every edge is present in `view` and no two share a vertex.
    pub fn validate(&self, view: &SubgraphView<'_>) -> Result<()> {
        let g = view.base();
        let mut covered = vec![false; g.vertex_count()];
        for &e in &self.edges {
            if !view.contains_edge(e) {
                return Err(Error::InvalidMatching(format!("edge {e} not in graph")));
            }
            let (u, v) = g.endpoints(e);
            if covered[u] || covered[v] {
                return Err(Error::InvalidMatching(format!("edge {e} shares a vertex")));
            }
            covered[u] = true;
            covered[v] = true;
        }
        Ok(())
    }

    /// Whether `v` is an endpoint of some matching edge.
    pub fn covers(&self, g: &Graph, v: VertexId) -> bool {
        self.edges.iter().any(|&e| {
            let (a, b) = g.endpoints(e);
            a == v || b == v
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MwmResult {
    pub matching: Matching,
    pub total_weight: f64,
    pub certified: bool,
    pub solver: Solver,
}

impl MwmResult {
    fn from_local(
        compact: &CompactGraph,
        local: &[usize],
        w: &WeightAssignment,
        solver: Solver,
    ) -> Self {
        let matching = Matching::new(local.iter().map(|&e| compact.edge_of[e]).collect());
        let total_weight = matching_weight(&matching, w);
        MwmResult {
            matching,
            total_weight,
            certified: false,
            solver,
        }
    }

    /// Runs the augmenting-path certifier; `certified` is set only on a conclusive pass.
    pub fn certify(
        mut self,
        view: &SubgraphView<'_>,
        w: &WeightAssignment,
        path_cap: u64,
    ) -> Result<Self> {
        let outcome = certify_no_augmenting_path_capped(view, w, &self.matching, path_cap)?;
        self.certified = outcome == Certificate::NoAugmentingPath;
        Ok(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverLimits {
    pub enumeration_edge_cap: usize,
    pub branch_node_cap: u64,
    pub certify_path_cap: u64,
}

impl Default for SolverLimits {
    fn default() -> Self {
        SolverLimits {
            enumeration_edge_cap: 30,
            branch_node_cap: 50_000_000,
            certify_path_cap: 1_000_000,
        }
    }
}

/// `w_M`, summed in increasing edge-id order.
pub fn matching_weight(m: &Matching, w: &WeightAssignment) -> f64 {
    m.edges.iter().map(|&e| w.get(e)).sum()
}

pub fn mwm_enumerate(view: &SubgraphView<'_>, w: &WeightAssignment) -> Result<MwmResult> {
    mwm_enumerate_capped(view, w, SolverLimits::default().enumeration_edge_cap)
}

pub fn mwm_enumerate_capped(
    view: &SubgraphView<'_>,
    w: &WeightAssignment,
    edge_cap: usize,
) -> Result<MwmResult> {
    let compact = view.compact();
    let m = compact.graph.edge_count();
    if m > edge_cap {
        return Err(Error::SolverCapExceeded(format!(
            "enumeration over {m} edges exceeds cap {edge_cap}"
        )));
    }
    let local = enumerate_local(&compact.graph, &w.restrict(&compact));
    Ok(MwmResult::from_local(
        &compact,
        &local,
        w,
        Solver::Enumeration,
    ))
}

/// Tree solver. The view must be a single tree.
pub fn mwm_tree(view: &SubgraphView<'_>, w: &WeightAssignment) -> Result<MwmResult> {
    if !view.is_tree() {
        return Err(Error::NotATree);
    }
    mwm_forest(view, w)
}

fn mwm_forest(view: &SubgraphView<'_>, w: &WeightAssignment) -> Result<MwmResult> {
    let compact = view.compact();
    let local = forest_local(&compact.graph, &w.restrict(&compact))?;
    Ok(MwmResult::from_local(&compact, &local, w, Solver::TreeDp))
}

pub fn mwm_branch_bound(view: &SubgraphView<'_>, w: &WeightAssignment) -> Result<MwmResult> {
    mwm_branch_bound_capped(view, w, SolverLimits::default().branch_node_cap)
}

pub fn mwm_branch_bound_capped(
    view: &SubgraphView<'_>,
    w: &WeightAssignment,
    node_cap: u64,
) -> Result<MwmResult> {
    let compact = view.compact();
    let local = branch_bound_local(&compact.graph, &w.restrict(&compact), node_cap)?;
    Ok(MwmResult::from_local(
        &compact,
        &local,
        w,
        Solver::BranchBound,
    ))
}

/// Picks the tree solver for forests and branch-and-bound otherwise.
pub fn solve(view: &SubgraphView<'_>, w: &WeightAssignment) -> Result<MwmResult> {
    if view.is_forest() {
        mwm_forest(view, w)
    } else {
        mwm_branch_bound(view, w)
    }
}

/// `W_H`, the weight of the maximum-weight matching of the view.
pub fn optimal_weight(view: &SubgraphView<'_>, w: &WeightAssignment) -> Result<f64> {
    Ok(solve(view, w)?.total_weight)
}

/// Subtree bonuses on a forest followed by the two-sided membership test.
fn forest_local(g: &Graph, w: &[f64]) -> Result<Vec<usize>> {
    const NONE: usize = usize::MAX;
    let n = g.vertex_count();
    let mut parent = vec![NONE; n];
    let mut parent_edge = vec![NONE; n];
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let start = order.len();
        order.push(root);
        let mut head = start;
        while head < order.len() {
            let x = order[head];
            head += 1;
            for &(y, e) in g.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = x;
                    parent_edge[y] = e;
                    order.push(y);
                }
            }
        }
    }

    // down[v] = B(v, T_v), bonus of v in its own subtree
    let mut down = vec![0.0f64; n];
    for &v in order.iter().rev() {
        if parent[v] != NONE {
            let gain = (w[parent_edge[v]] - down[v]).max(0.0);
            let p = parent[v];
            down[p] = down[p].max(gain);
        }
    }
    // up[v] = B(parent(v), T_{v -> parent(v)}), bonus of the parent once v's subtree is cut off
    let mut up = vec![0.0f64; n];
    let mut children: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    for &v in &order {
        if parent[v] != NONE {
            children[parent[v]].push(v);
        }
    }
    for &p in &order {
        let from_above = if parent[p] != NONE {
            (w[parent_edge[p]] - up[p]).max(0.0)
        } else {
            0.0
        };
        let (mut best, mut second, mut best_child) = (from_above, f64::NEG_INFINITY, NONE);
        for &c in &children[p] {
            let gain = (w[parent_edge[c]] - down[c]).max(0.0);
            if gain > best {
                second = best;
                best = gain;
                best_child = c;
            } else if gain > second {
                second = gain;
            }
        }
        for &c in &children[p] {
            up[c] = if c == best_child {
                second.max(0.0)
            } else {
                best
            };
        }
    }

    let mut matched = Vec::new();
    let mut covered = vec![false; n];
    for v in 0..n {
        if parent[v] == NONE {
            continue;
        }
        let e = parent_edge[v];
        let threshold = up[v] + down[v];
        if w[e] == threshold {
            return Err(Error::NonGenericWeights(format!(
                "edge {e} ties with its cavity threshold"
            )));
        }
        if w[e] > threshold {
            let p = parent[v];
            if covered[p] || covered[v] {
                return Err(Error::NonGenericWeights(
                    "tree criterion selected adjacent edges".into(),
                ));
            }
            covered[p] = true;
            covered[v] = true;
            matched.push(e);
        }
    }
    matched.sort_unstable();
    Ok(matched)
}

fn better(weight: f64, edges: &[usize], best: &(f64, Vec<usize>)) -> bool {
    weight > best.0 || (weight == best.0 && edges < best.1.as_slice())
}

fn enumerate_local(g: &Graph, w: &[f64]) -> Vec<usize> {
    struct Search<'a> {
        g: &'a Graph,
        w: &'a [f64],
        used: Vec<bool>,
        chosen: Vec<usize>,
        best: (f64, Vec<usize>),
        max_rem: Vec<f64>,
    }
    impl Search<'_> {
        fn bound(&mut self, k: usize) -> f64 {
            self.max_rem.iter_mut().for_each(|x| *x = 0.0);
            for e in k..self.g.edge_count() {
                let (u, v) = self.g.endpoints(e);
                if !self.used[u] && !self.used[v] {
                    self.max_rem[u] = self.max_rem[u].max(self.w[e]);
                    self.max_rem[v] = self.max_rem[v].max(self.w[e]);
                }
            }
            0.5 * self.max_rem.iter().sum::<f64>()
        }

        fn rec(&mut self, k: usize, current: f64) {
            if k == self.g.edge_count() {
                let weight: f64 = self.chosen.iter().map(|&e| self.w[e]).sum();
                if better(weight, &self.chosen, &self.best) {
                    self.best = (weight, self.chosen.clone());
                }
                return;
            }
            if current + self.bound(k) < self.best.0 {
                return;
            }
            let (u, v) = self.g.endpoints(k);
            if !self.used[u] && !self.used[v] {
                self.used[u] = true;
                self.used[v] = true;
                self.chosen.push(k);
                self.rec(k + 1, current + self.w[k]);
                self.chosen.pop();
                self.used[u] = false;
                self.used[v] = false;
            }
            self.rec(k + 1, current);
        }
    }
    let mut s = Search {
        g,
        w,
        used: vec![false; g.vertex_count()],
        chosen: Vec::new(),
        best: (f64::NEG_INFINITY, Vec::new()),
        max_rem: vec![0.0; g.vertex_count()],
    };
    s.rec(0, 0.0);
    s.best.1
}

fn branch_bound_local(g: &Graph, w: &[f64], node_cap: u64) -> Result<Vec<usize>> {
    struct Search<'a> {
        g: &'a Graph,
        w: &'a [f64],
        live: Vec<bool>,
        chosen: Vec<usize>,
        best: (f64, Vec<usize>),
        nodes: u64,
        node_cap: u64,
    }
    impl Search<'_> {
        fn rec(&mut self, current: f64) -> Result<()> {
            self.nodes += 1;
            if self.nodes > self.node_cap {
                return Err(Error::SolverCapExceeded(format!(
                    "branch-and-bound explored more than {} nodes",
                    self.node_cap
                )));
            }
            let mut pivot = None;
            let mut bound = 0.0;
            for x in 0..self.g.vertex_count() {
                if !self.live[x] {
                    continue;
                }
                let mut best_here = 0.0f64;
                for &(y, e) in self.g.neighbors(x) {
                    if self.live[y] {
                        best_here = best_here.max(self.w[e]);
                        if pivot.is_none() {
                            pivot = Some(x);
                        }
                    }
                }
                bound += best_here;
            }
            let Some(v) = pivot else {
                let mut edges = self.chosen.clone();
                edges.sort_unstable();
                let weight: f64 = edges.iter().map(|&e| self.w[e]).sum();
                if better(weight, &edges, &self.best) {
                    self.best = (weight, edges);
                }
                return Ok(());
            };
            if current + 0.5 * bound < self.best.0 {
                return Ok(());
            }
            self.live[v] = false;
            for i in 0..self.g.neighbors(v).len() {
                let (u, e) = self.g.neighbors(v)[i];
                if !self.live[u] {
                    continue;
                }
                self.live[u] = false;
                self.chosen.push(e);
                self.rec(current + self.w[e])?;
                self.chosen.pop();
                self.live[u] = true;
            }
            self.rec(current)?;
            self.live[v] = true;
            Ok(())
        }
    }
    let mut s = Search {
        g,
        w,
        live: vec![true; g.vertex_count()],
        chosen: Vec::new(),
        best: (f64::NEG_INFINITY, Vec::new()),
        nodes: 0,
        node_cap,
    };
    s.rec(0.0)?;
    Ok(s.best.1)
}

/// Outcome of the augmenting-path search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// No alternating path or even cycle improves the matching: it is optimal.
    NoAugmentingPath,
    /// An augmenting path or cycle, as base edge ids in traversal order.
    AugmentingPath(Vec<EdgeId>),
    /// The path budget ran out before the search finished.
    Inconclusive,
}

impl Certificate {
    /// `Some(true)` when optimal, `Some(false)` when improvable, `None` when inconclusive.
    pub fn conclusive(&self) -> Option<bool> {
        match self {
            Certificate::NoAugmentingPath => Some(true),
            Certificate::AugmentingPath(_) => Some(false),
            Certificate::Inconclusive => None,
        }
    }
}

pub fn certify_no_augmenting_path(
    view: &SubgraphView<'_>,
    w: &WeightAssignment,
    m: &Matching,
) -> Result<Certificate> {
    certify_no_augmenting_path_capped(view, w, m, SolverLimits::default().certify_path_cap)
}

/// Enumerates self-avoiding alternating paths and even cycles looking for one
/// that satisfies the augmenting conditions: alternation, a free endpoint at
/// each end whose end edge is outside the matching, and strictly more weight
/// off the matching than on it.
pub fn certify_no_augmenting_path_capped(
    view: &SubgraphView<'_>,
    w: &WeightAssignment,
    m: &Matching,
    path_cap: u64,
) -> Result<Certificate> {
    m.validate(view)?;
    let compact = view.compact();
    let g = &compact.graph;
    let weights = w.restrict(&compact);
    let in_m: Vec<bool> = compact.edge_of.iter().map(|&e| m.contains(e)).collect();
    let mut matched = vec![false; g.vertex_count()];
    for (e, &inside) in in_m.iter().enumerate() {
        if inside {
            let (u, v) = g.endpoints(e);
            matched[u] = true;
            matched[v] = true;
        }
    }

    struct Walk<'a> {
        g: &'a Graph,
        w: &'a [f64],
        in_m: &'a [bool],
        matched: &'a [bool],
        on_path: Vec<bool>,
        edges: Vec<usize>,
        start: VertexId,
        count: u64,
        cap: u64,
    }
    enum Found {
        Path(Vec<usize>),
        Exhausted,
    }
    impl Walk<'_> {
        fn sums(&self, extra: usize) -> (f64, f64) {
            let (mut on, mut off) = (0.0, 0.0);
            for &e in self.edges.iter().chain(std::iter::once(&extra)) {
                if self.in_m[e] {
                    on += self.w[e];
                } else {
                    off += self.w[e];
                }
            }
            (on, off)
        }

        fn dfs(&mut self, x: VertexId) -> Option<Found> {
            for i in 0..self.g.neighbors(x).len() {
                let (y, e) = self.g.neighbors(x)[i];
                if let Some(&last) = self.edges.last() {
                    if self.in_m[last] == self.in_m[e] {
                        continue;
                    }
                }
                if y == self.start && self.edges.len() >= 3 {
                    // closing edge; alternation across the seam needs an even length
                    let len = self.edges.len() + 1;
                    if len.is_multiple_of(2) {
                        let (on, off) = self.sums(e);
                        if on < off {
                            let mut cyc = self.edges.clone();
                            cyc.push(e);
                            return Some(Found::Path(cyc));
                        }
                    }
                    continue;
                }
                if self.on_path[y] {
                    continue;
                }
                self.count += 1;
                if self.count > self.cap {
                    return Some(Found::Exhausted);
                }
                let first = *self.edges.first().unwrap_or(&e);
                let start_ok = self.in_m[first] || !self.matched[self.start];
                let end_ok = self.in_m[e] || !self.matched[y];
                if start_ok && end_ok {
                    let (on, off) = self.sums(e);
                    if on < off {
                        let mut p = self.edges.clone();
                        p.push(e);
                        return Some(Found::Path(p));
                    }
                }
                self.on_path[y] = true;
                self.edges.push(e);
                let res = self.dfs(y);
                self.edges.pop();
                self.on_path[y] = false;
                if res.is_some() {
                    return res;
                }
            }
            None
        }
    }

    let mut walk = Walk {
        g,
        w: &weights,
        in_m: &in_m,
        matched: &matched,
        on_path: vec![false; g.vertex_count()],
        edges: Vec::new(),
        start: 0,
        count: 0,
        cap: path_cap,
    };
    for s in 0..g.vertex_count() {
        walk.start = s;
        walk.on_path[s] = true;
        let res = walk.dfs(s);
        walk.on_path[s] = false;
        match res {
            Some(Found::Path(p)) => {
                return Ok(Certificate::AugmentingPath(
                    p.iter().map(|&e| compact.edge_of[e]).collect(),
                ))
            }
            Some(Found::Exhausted) => return Ok(Certificate::Inconclusive),
            None => {}
        }
    }
    Ok(Certificate::NoAugmentingPath)
}
