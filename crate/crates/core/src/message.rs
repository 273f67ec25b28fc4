//! Cavity messages for i.i.d. exp(1) weights on a rooted tree.
//!
//! With exponential weights the probability `p(e_v) = P(w_{e_v} > B(v))`
//! satisfies `p(e_v) = Phi(p(e_{v_1}), ..., p(e_{v_d}))` where
//! `Phi(p) = E[1 / (1 + X)]` and `X` is a sum of independent Bernoulli(`p_i`).
//! Everything here evaluates that expectation exactly through the
//! Poisson-binomial law of `X`; nothing is sampled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::{positive_gap, ExtReal};
use crate::graph::{EdgeId, Graph, VertexId};
use crate::weights::WeightAssignment;

fn check_probabilities(p: &[f64]) -> Result<()> {
    match p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        Some(&bad) => Err(Error::ProbabilityOutOfRange(bad)),
        None => Ok(()),
    }
}

/// Law of a sum of independent Bernoulli variables, as `d + 1` point masses.
fn pb_pmf<I: IntoIterator<Item = f64>>(p: I) -> Vec<f64> {
    let mut pmf = vec![1.0];
    for pi in p {
        pmf.push(0.0);
        for k in (1..pmf.len()).rev() {
            pmf[k] = pmf[k] * (1.0 - pi) + pmf[k - 1] * pi;
        }
        pmf[0] *= 1.0 - pi;
    }
    pmf
}

pub fn poisson_binomial(p: &[f64]) -> Result<Vec<f64>> {
    check_probabilities(p)?;
    Ok(pb_pmf(p.iter().copied()))
}

fn expect<F: Fn(f64) -> f64>(pmf: &[f64], f: F) -> f64 {
    pmf.iter().enumerate().map(|(k, &m)| m * f(k as f64)).sum()
}

fn phi_unchecked(p: &[f64]) -> f64 {
    expect(&pb_pmf(p.iter().copied()), |k| 1.0 / (1.0 + k))
}

fn without(p: &[f64], i: usize) -> impl Iterator<Item = f64> + '_ {
    p.iter()
        .enumerate()
        .filter(move |&(j, _)| j != i)
        .map(|(_, &x)| x)
}

fn phi_gradient_unchecked(p: &[f64]) -> Vec<f64> {
    (0..p.len())
        .map(|i| -expect(&pb_pmf(without(p, i)), |k| 1.0 / ((1.0 + k) * (2.0 + k))))
        .collect()
}

/// `E[1 / (1 + X)]`, `X` a sum of independent Bernoulli(`p_i`).
pub fn phi(p: &[f64]) -> Result<f64> {
    check_probabilities(p)?;
    Ok(phi_unchecked(p))
}

/// `d Phi / d p_i = -E[1 / ((1 + Y_i)(2 + Y_i))]`, with `Y_i` the sum without term `i`.
pub fn phi_gradient(p: &[f64]) -> Result<Vec<f64>> {
    check_probabilities(p)?;
    Ok(phi_gradient_unchecked(p))
}

/// `-log Phi(e^{-q_1}, ..., e^{-q_d})`. Always finite since `Phi >= 1/(d+1)`.
pub fn psi(q: &[ExtReal]) -> f64 {
    let p: Vec<f64> = q.iter().map(|x| x.exp_neg()).collect();
    -phi_unchecked(&p).ln()
}

/// `sum_i |d Psi / d q_i|` where `d Psi / d q_i = p_i (d Phi / d p_i) / Phi`.
/// Infinite `q_i` have `p_i = 0` and contribute nothing.
pub fn psi_gradient_l1(q: &[ExtReal]) -> f64 {
    let p: Vec<f64> = q.iter().map(|x| x.exp_neg()).collect();
    let value = phi_unchecked(&p);
    phi_gradient_unchecked(&p)
        .iter()
        .zip(&p)
        .map(|(g, pi)| (pi * g / value).abs())
        .sum()
}

/// `sum_S (1 + |S|)^{-1} prod_{i in S} e^{-c_i} prod_{i not in S} (1 - e^{-c_i})`,
/// which is `E[exp(-max_i (X_i - c_i)_+)]` for i.i.d. exp(1) `X_i`.
pub fn exp_identity(c: &[ExtReal]) -> f64 {
    let p: Vec<f64> = c.iter().map(|x| x.exp_neg()).collect();
    phi_unchecked(&p)
}

/// Both sides of the key inequality
/// `sum_i p_i E[1 / ((1 + W + Z_i)(2 + W + Z_i))] <= E[1{X > 0} / (1 + W + X)]`
/// where `X = sum_i xi_i`, `Z_i = X - xi_i` and `W` is an independent sum of
/// Bernoulli variables with means `w_means`.
pub fn check_key_inequality(p: &[f64], w_means: &[f64]) -> Result<(f64, f64)> {
    check_probabilities(p)?;
    check_probabilities(w_means)?;
    let lhs = (0..p.len())
        .map(|i| {
            let pmf = pb_pmf(w_means.iter().copied().chain(without(p, i)));
            p[i] * expect(&pmf, |k| 1.0 / ((1.0 + k) * (2.0 + k)))
        })
        .sum();
    let px = pb_pmf(p.iter().copied());
    let pw = pb_pmf(w_means.iter().copied());
    let mut rhs = 0.0;
    for (x, &mx) in px.iter().enumerate().skip(1) {
        for (s, &ms) in pw.iter().enumerate() {
            rhs += mx * ms / (1.0 + (s + x) as f64);
        }
    }
    Ok((lhs, rhs))
}

/// A tree hung from a root of degree one.
///
/// Depths are distances from the root; the height `r` is the largest leaf
/// depth and the boundary leaves are the leaves at depth exactly `r`.
#[derive(Clone, Debug)]
pub struct RootedTree {
    graph: Graph,
    root: VertexId,
    parent: Vec<Option<(VertexId, EdgeId)>>,
    children: Vec<Vec<VertexId>>,
    depth: Vec<usize>,
    order: Vec<VertexId>,
    height: usize,
    boundary_leaves: Vec<VertexId>,
}

impl RootedTree {
    pub fn new(graph: Graph, root: VertexId) -> Result<Self> {
        if root >= graph.vertex_count() {
            return Err(Error::MalformedTree(format!("root {root} is not a vertex")));
        }
        if !graph.is_tree() {
            return Err(Error::MalformedTree("graph is not a tree".into()));
        }
        if graph.degree(root) != 1 {
            return Err(Error::MalformedTree(format!(
                "root has degree {}, expected 1",
                graph.degree(root)
            )));
        }
        let n = graph.vertex_count();
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut depth = vec![0; n];
        let mut order = vec![root];
        let mut head = 0;
        while head < order.len() {
            let x = order[head];
            head += 1;
            for &(y, e) in graph.neighbors(x) {
                if y != root && parent[y].is_none() {
                    parent[y] = Some((x, e));
                    depth[y] = depth[x] + 1;
                    children[x].push(y);
                    order.push(y);
                }
            }
        }
        let leaves = (0..n).filter(|&v| v != root && children[v].is_empty());
        let height = leaves.clone().map(|v| depth[v]).max().unwrap_or(0);
        let boundary_leaves = leaves.filter(|&v| depth[v] == height).collect();
        Ok(RootedTree {
            graph,
            root,
            parent,
            children,
            depth,
            order,
            height,
            boundary_leaves,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    /// The unique neighbour of the root.
    pub fn top(&self) -> VertexId {
        self.children[self.root][0]
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v].map(|(p, _)| p)
    }

    /// The edge from `v` to its parent.
    pub fn parent_edge(&self, v: VertexId) -> Option<EdgeId> {
        self.parent[v].map(|(_, e)| e)
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v]
    }

    pub fn depth(&self, v: VertexId) -> usize {
        self.depth[v]
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn max_degree(&self) -> usize {
        self.graph.max_degree()
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        v != self.root && self.children[v].is_empty()
    }

    pub fn boundary_leaves(&self) -> &[VertexId] {
        &self.boundary_leaves
    }

    /// Vertices in breadth-first order from the root.
    pub fn order(&self) -> &[VertexId] {
        &self.order
    }
}

/// Values `a_v` on the boundary leaves.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryCondition {
    values: Vec<Option<ExtReal>>,
}

impl BoundaryCondition {
    pub fn uniform(t: &RootedTree, a: ExtReal) -> Self {
        Self::build(t, |_| a)
    }

    pub fn zero(t: &RootedTree) -> Self {
        Self::uniform(t, ExtReal::ZERO)
    }

    pub fn infinite(t: &RootedTree) -> Self {
        Self::uniform(t, ExtReal::Infinity)
    }

    fn build(t: &RootedTree, mut f: impl FnMut(VertexId) -> ExtReal) -> Self {
        let mut values = vec![None; t.graph.vertex_count()];
        for &v in &t.boundary_leaves {
            values[v] = Some(f(v));
        }
        BoundaryCondition { values }
    }

    /// The pairs must cover every boundary leaf exactly once and nothing else.
    pub fn from_pairs(t: &RootedTree, pairs: &[(VertexId, ExtReal)]) -> Result<Self> {
        let mut values = vec![None; t.graph.vertex_count()];
        for &(v, a) in pairs {
            if v >= values.len() || !t.boundary_leaves.contains(&v) {
                return Err(Error::BoundaryCondition(format!(
                    "vertex {v} is not a boundary leaf"
                )));
            }
            if a < 0.0 {
                return Err(Error::BoundaryCondition(format!(
                    "negative value at vertex {v}"
                )));
            }
            if values[v].replace(a).is_some() {
                return Err(Error::BoundaryCondition(format!("vertex {v} given twice")));
            }
        }
        if let Some(&v) = t.boundary_leaves.iter().find(|&&v| values[v].is_none()) {
            return Err(Error::BoundaryCondition(format!(
                "no value for boundary leaf {v}"
            )));
        }
        Ok(BoundaryCondition { values })
    }

    pub fn get(&self, v: VertexId) -> Option<ExtReal> {
        self.values.get(v).copied().flatten()
    }
}

/// `p` and `q = -log p` on every edge `e_v`, indexed by the lower endpoint `v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MessageState {
    root: VertexId,
    top: VertexId,
    p: Vec<f64>,
    q: Vec<ExtReal>,
}

impl MessageState {
    pub fn p(&self, v: VertexId) -> Option<f64> {
        (v != self.root).then(|| self.p[v])
    }

    pub fn q(&self, v: VertexId) -> Option<ExtReal> {
        (v != self.root).then(|| self.q[v])
    }

    /// `p` on the root edge.
    pub fn root_p(&self) -> f64 {
        self.p[self.top]
    }

    pub fn root_q(&self) -> ExtReal {
        self.q[self.top]
    }
}

/// Leaves at depth `r` start at `e^{-a_v}`, shallower leaves at 1, and `Phi`
/// is applied upward.
pub fn run_tree_recursion(t: &RootedTree, a: &BoundaryCondition) -> Result<MessageState> {
    let n = t.graph.vertex_count();
    let mut p = vec![1.0; n];
    for &v in t.order.iter().rev() {
        if v == t.root {
            continue;
        }
        p[v] = if t.children[v].is_empty() {
            if t.depth[v] == t.height {
                a.get(v)
                    .ok_or_else(|| {
                        Error::BoundaryCondition(format!("no value for boundary leaf {v}"))
                    })?
                    .exp_neg()
            } else {
                1.0
            }
        } else {
            let child: Vec<f64> = t.children[v].iter().map(|&c| p[c]).collect();
            phi_unchecked(&child)
        };
    }
    let q = p.iter().map(|&x| ExtReal::neg_log(x)).collect();
    Ok(MessageState {
        root: t.root,
        top: t.top(),
        p,
        q,
    })
}

/// `D (1 - (2D)^{-D})^{r-3}`.
pub fn contraction_bound(max_degree: usize, r: usize) -> f64 {
    let d = max_degree as f64;
    d * (1.0 - (2.0 * d).powf(-d)).powi(r as i32 - 3)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    pub value: f64,
    /// Present only when the height is at least 4.
    pub bound: Option<f64>,
    pub max_degree: usize,
}

/// `|p^0(e_o) - p^inf(e_o)|` for the all-zero and all-infinite boundary conditions.
pub fn root_sensitivity(t: &RootedTree) -> Result<Sensitivity> {
    let zero = run_tree_recursion(t, &BoundaryCondition::zero(t))?.root_p();
    let inf = run_tree_recursion(t, &BoundaryCondition::infinite(t))?.root_p();
    let max_degree = t.max_degree();
    Ok(Sensitivity {
        value: (zero - inf).abs(),
        bound: (t.height >= 4).then(|| contraction_bound(max_degree, t.height)),
        max_degree,
    })
}

/// Bonuses `B^a(v)` for fixed weights: boundary leaves take `a_v`, other
/// leaves 0, and internal vertices `max_i (w_{e_{v_i}} - B^a(v_i))_+`.
pub fn tree_bonus_recursion(
    t: &RootedTree,
    w: &WeightAssignment,
    a: &BoundaryCondition,
) -> Result<Vec<ExtReal>> {
    if w.len() != t.graph.edge_count() {
        return Err(Error::WeightCountMismatch {
            expected: t.graph.edge_count(),
            got: w.len(),
        });
    }
    let mut b = vec![ExtReal::ZERO; t.graph.vertex_count()];
    for &v in t.order.iter().rev() {
        if t.is_leaf(v) {
            if t.depth[v] == t.height {
                b[v] = a.get(v).ok_or_else(|| {
                    Error::BoundaryCondition(format!("no value for boundary leaf {v}"))
                })?;
            }
            continue;
        }
        let best = t.children[v]
            .iter()
            .map(|&c| positive_gap(w.get(t.parent_edge(c).expect("child has a parent")), b[c]))
            .fold(0.0, f64::max);
        b[v] = ExtReal::Finite(best);
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::path;

    #[test]
    fn phi_closed_forms() {
        assert_eq!(phi(&[]).unwrap(), 1.0);
        assert_eq!(phi(&[1.0]).unwrap(), 0.5);
        for &p1 in &[0.0, 0.3, 0.77] {
            assert!((phi(&[p1]).unwrap() - (1.0 - p1 / 2.0)).abs() < 1e-12);
            for &p2 in &[0.1, 0.5, 1.0] {
                let want = 1.0 - (p1 + p2) / 2.0 + p1 * p2 / 3.0;
                assert!((phi(&[p1, p2]).unwrap() - want).abs() < 1e-12);
            }
        }
        assert!((phi(&[1.0, 1.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(phi(&[1.2]), Err(Error::ProbabilityOutOfRange(1.2)));
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(phi_gradient(&[0.4]).unwrap(), vec![-0.5]);
        assert_eq!(phi_gradient(&[0.4, 0.0]).unwrap()[0], -0.5);
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(&[]), 0.0);
        assert!((psi(&[ExtReal::ZERO]) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(psi(&[ExtReal::Infinity, ExtReal::Infinity]), 0.0);
        assert!((psi_gradient_l1(&[ExtReal::ZERO]) - 1.0).abs() < 1e-15);
        assert_eq!(psi_gradient_l1(&[ExtReal::Infinity; 3]), 0.0);
    }

    #[test]
    fn exp_identity_examples() {
        assert_eq!(exp_identity(&[ExtReal::ZERO]), 0.5);
        assert!((exp_identity(&[ExtReal::ZERO, ExtReal::ZERO]) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(exp_identity(&[ExtReal::Infinity; 3]), 1.0);
    }

    #[test]
    fn key_inequality_examples() {
        let (lhs, rhs) = check_key_inequality(&[1.0], &[]).unwrap();
        assert_eq!((lhs, rhs), (0.5, 0.5));
        let (lhs, rhs) = check_key_inequality(&[0.0, 0.0], &[0.5]).unwrap();
        assert_eq!((lhs, rhs), (0.0, 0.0));
    }

    #[test]
    fn rooted_tree_structure() {
        let t = RootedTree::new(path(5).unwrap(), 0).unwrap();
        assert_eq!(t.top(), 1);
        assert_eq!(t.height(), 4);
        assert_eq!(t.boundary_leaves(), &[4]);
        assert!(RootedTree::new(path(5).unwrap(), 2).is_err());
        let star = Graph::from_edges(&[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        let t = RootedTree::new(star, 0).unwrap();
        assert_eq!(t.height(), 3);
        assert_eq!(t.boundary_leaves(), &[4]);
        assert!(t.is_leaf(2));
    }

    #[test]
    fn boundary_conditions_on_path() {
        let t = RootedTree::new(path(3).unwrap(), 0).unwrap();
        let zero = run_tree_recursion(&t, &BoundaryCondition::zero(&t)).unwrap();
        assert_eq!(zero.p(2), Some(1.0));
        assert_eq!(zero.root_p(), 0.5);
        let inf = run_tree_recursion(&t, &BoundaryCondition::infinite(&t)).unwrap();
        assert_eq!(inf.p(2), Some(0.0));
        assert_eq!(inf.root_p(), 1.0);
        assert_eq!(inf.p(0), None);
        assert!(BoundaryCondition::from_pairs(&t, &[(1, ExtReal::ZERO)]).is_err());
        assert!(BoundaryCondition::from_pairs(&t, &[]).is_err());
    }

    #[test]
    fn bound_arithmetic() {
        assert!((contraction_bound(2, 10) - 2.0 * (15.0f64 / 16.0).powi(7)).abs() < 1e-15);
        let t = RootedTree::new(path(11).unwrap(), 0).unwrap();
        let s = root_sensitivity(&t).unwrap();
        assert!(s.value <= s.bound.unwrap());
    }

    #[test]
    fn tree_bonus_matches_zero_boundary_bonus() {
        let g = Graph::from_edges(&[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        let w = WeightAssignment::new(vec![0.5, 0.7, 0.2, 0.9]).unwrap();
        let t = RootedTree::new(g.clone(), 0).unwrap();
        let b = tree_bonus_recursion(&t, &w, &BoundaryCondition::zero(&t)).unwrap();
        // B(1, T_1) on {1,2,3,4}: max(0.7 - 0, 0.2 - 0.9) = 0.7
        assert_eq!(b[1], ExtReal::Finite(0.7));
        let sub = g.view().delete_vertices([0]);
        let exact = crate::bonus::bonus(&sub, &w, 1).unwrap();
        assert!((exact - 0.7).abs() < 1e-12);
    }
}
