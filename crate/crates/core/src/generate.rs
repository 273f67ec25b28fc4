//! Graph families used by the experiments.
//!
//! Every generator returns a connected simple graph. Trees are rooted at
//! vertex 0, and the hexagonal patch has its origin at vertex 0.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

const MAX_ATTEMPTS: usize = 100_000;

/// How many children each vertex of a depth-bounded tree receives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TreeShape {
    /// `counts[k]` children for every vertex at depth `k`.
    Levels(Vec<usize>),
    /// i.i.d. child counts: `weights[c]` is proportional to `P(c children)`.
    Iid(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Family {
    Path {
        n: usize,
    },
    Cycle {
        n: usize,
    },
    Complete {
        n: usize,
    },
    /// Rooted tree of height exactly `depth`. With `planted` the root has one child.
    Tree {
        depth: usize,
        shape: TreeShape,
        planted: bool,
    },
    /// Uniform tree on `n` vertices with i.i.d. degrees conditioned to sum to
    /// `2n - 2`; `degree_weights[d]` is proportional to `P(degree = d)`.
    RandomTree {
        n: usize,
        degree_weights: Vec<f64>,
    },
    RandomRegular {
        n: usize,
        d: usize,
    },
    /// `G(n, lambda / n)`, largest component, relabelled in increasing id order.
    ErdosRenyi {
        n: usize,
        lambda: f64,
    },
    /// Ball of graph radius `radius` around the origin of the honeycomb lattice.
    HexPatch {
        radius: usize,
    },
}

impl Family {
    /// Tree where the root has `d` children and every other internal vertex `d - 1`.
    pub fn regular_tree(d: usize, depth: usize) -> Family {
        let mut counts = vec![d.saturating_sub(1); depth];
        if let Some(first) = counts.first_mut() {
            *first = d;
        }
        Family::Tree {
            depth,
            shape: TreeShape::Levels(counts),
            planted: false,
        }
    }
}

pub fn generate(family: &Family, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match family {
        Family::Path { n } => path(*n),
        Family::Cycle { n } => cycle(*n),
        Family::Complete { n } => complete(*n),
        Family::Tree {
            depth,
            shape,
            planted,
        } => depth_tree(*depth, shape, *planted, &mut rng),
        Family::RandomTree { n, degree_weights } => random_tree(*n, degree_weights, &mut rng),
        Family::RandomRegular { n, d } => random_regular(*n, *d, &mut rng),
        Family::ErdosRenyi { n, lambda } => erdos_renyi(*n, *lambda, &mut rng),
        Family::HexPatch { radius } => Ok(hex_patch(*radius)),
    }
}

pub fn path(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InfeasibleParameters("path needs n >= 1".into()));
    }
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::new(n, &edges)
}

pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InfeasibleParameters("cycle needs n >= 3".into()));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::new(n, &edges)
}

pub fn complete(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InfeasibleParameters(
            "complete graph needs n >= 1".into(),
        ));
    }
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    Graph::new(n, &edges)
}

fn depth_tree<R: Rng>(
    depth: usize,
    shape: &TreeShape,
    planted: bool,
    rng: &mut R,
) -> Result<Graph> {
    match shape {
        TreeShape::Levels(counts) => {
            if counts.len() < depth {
                return Err(Error::InfeasibleParameters(format!(
                    "level profile has {} entries, depth is {depth}",
                    counts.len()
                )));
            }
            let first_level = if planted { 1 } else { 0 };
            if counts[first_level.min(depth)..depth].contains(&0) {
                return Err(Error::InfeasibleParameters(
                    "a level with zero children cannot reach the requested depth".into(),
                ));
            }
            Ok(grow_tree(depth, planted, |k| counts[k]))
        }
        TreeShape::Iid(weights) => {
            let total: f64 = weights.iter().sum();
            if weights.iter().any(|x| !(0.0..).contains(x)) || total <= 0.0 {
                return Err(Error::InfeasibleParameters(
                    "child-count law must be a nonnegative vector".into(),
                ));
            }
            if depth > 0 && weights.iter().skip(1).all(|&x| x == 0.0) {
                return Err(Error::InfeasibleParameters(
                    "child-count law puts no mass on >= 1 child".into(),
                ));
            }
            for _ in 0..MAX_ATTEMPTS {
                let g = grow_tree(depth, planted, |_| sample_index(weights, total, rng));
                let heights = g.view().distances_from(&[0]);
                if heights.iter().flatten().max().copied().unwrap_or(0) == depth {
                    return Ok(g);
                }
            }
            Err(Error::InfeasibleParameters(
                "tree never reached the requested depth".into(),
            ))
        }
    }
}

/// Breadth-first growth; `children(k)` is queried once per vertex at depth `k`.
fn grow_tree(depth: usize, planted: bool, mut children: impl FnMut(usize) -> usize) -> Graph {
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    let mut next_id = 1;
    for k in 0..depth {
        let mut next = Vec::new();
        for &v in &frontier {
            let c = if planted && k == 0 { 1 } else { children(k) };
            for _ in 0..c {
                edges.push((v, next_id));
                next.push(next_id);
                next_id += 1;
            }
        }
        frontier = next;
    }
    Graph::new(next_id, &edges).expect("tree growth yields a simple graph")
}

fn sample_index<R: Rng>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let mut x = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if x < w {
            return i;
        }
        x -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

fn random_tree<R: Rng>(n: usize, degree_weights: &[f64], rng: &mut R) -> Result<Graph> {
    match n {
        0 => return Err(Error::InfeasibleParameters("tree needs n >= 1".into())),
        1 => return Graph::new(1, &[]),
        2 => return Graph::new(2, &[(0, 1)]),
        _ => {}
    }
    let support: Vec<usize> = (1..degree_weights.len())
        .filter(|&d| degree_weights[d] > 0.0)
        .collect();
    if support.first() != Some(&1) || support.last().is_none_or(|&d| d < 2) {
        return Err(Error::InfeasibleParameters(
            "degree law must charge degree 1 and some degree >= 2".into(),
        ));
    }
    if degree_weights.iter().any(|x| !(0.0..).contains(x)) {
        return Err(Error::InfeasibleParameters(
            "degree law must be nonnegative".into(),
        ));
    }
    // Conditioning i.i.d. degrees on their sum is invariant under exponential
    // tilting, so tilt the law to mean (2n - 2) / n before rejection sampling.
    let target = (2 * n - 2) as f64 / n as f64;
    let tilted = tilt_to_mean(degree_weights, target);
    let total: f64 = tilted.iter().sum();
    let degrees = (0..MAX_ATTEMPTS)
        .find_map(|_| {
            let ds: Vec<usize> = (0..n).map(|_| sample_index(&tilted, total, rng)).collect();
            (ds.iter().sum::<usize>() == 2 * n - 2).then_some(ds)
        })
        .ok_or_else(|| Error::InfeasibleParameters("could not realise a degree sequence".into()))?;
    let mut code: Vec<VertexId> = degrees
        .iter()
        .enumerate()
        .flat_map(|(v, &d)| std::iter::repeat_n(v, d - 1))
        .collect();
    code.shuffle(rng);
    Graph::new(n, &decode_prufer(n, &code))
}

fn tilt_to_mean(weights: &[f64], target: f64) -> Vec<f64> {
    let tilted = |log_theta: f64| -> (Vec<f64>, f64) {
        let w: Vec<f64> = weights
            .iter()
            .enumerate()
            .map(|(d, &p)| {
                if p > 0.0 {
                    p * (log_theta * d as f64).exp()
                } else {
                    0.0
                }
            })
            .collect();
        let total: f64 = w.iter().sum();
        let mean = w
            .iter()
            .enumerate()
            .map(|(d, &p)| d as f64 * p)
            .sum::<f64>()
            / total;
        (w, mean)
    };
    let (mut lo, mut hi) = (-50.0f64, 50.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tilted(mid).1 < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    tilted(0.5 * (lo + hi)).0
}

fn decode_prufer(n: usize, code: &[VertexId]) -> Vec<(VertexId, VertexId)> {
    let mut remaining = vec![1usize; n];
    for &v in code {
        remaining[v] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<VertexId>> =
        (0..n).filter(|&v| remaining[v] == 1).map(Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &v in code {
        let Reverse(leaf) = leaves.pop().expect("prufer decoding always has a leaf");
        edges.push((leaf.min(v), leaf.max(v)));
        remaining[v] -= 1;
        if remaining[v] == 1 {
            leaves.push(Reverse(v));
        }
    }
    let Reverse(a) = leaves.pop().expect("two leaves remain");
    let Reverse(b) = leaves.pop().expect("two leaves remain");
    edges.push((a.min(b), a.max(b)));
    edges
}

fn random_regular<R: Rng>(n: usize, d: usize, rng: &mut R) -> Result<Graph> {
    if (n * d) % 2 == 1 {
        return Err(Error::InfeasibleParameters(format!(
            "n*d = {} is odd",
            n * d
        )));
    }
    if d >= n || d == 0 {
        return Err(Error::InfeasibleParameters(format!(
            "need 0 < d < n, got d={d}, n={n}"
        )));
    }
    let mut points: Vec<VertexId> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..MAX_ATTEMPTS {
        points.shuffle(rng);
        let mut edges = Vec::with_capacity(n * d / 2);
        let mut seen = std::collections::HashSet::with_capacity(n * d / 2);
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        let g = Graph::new(n, &edges)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::InfeasibleParameters(
        "no simple connected pairing found".into(),
    ))
}

fn erdos_renyi<R: Rng>(n: usize, lambda: f64, rng: &mut R) -> Result<Graph> {
    if n == 0 || !(0.0..).contains(&lambda) {
        return Err(Error::InfeasibleParameters(
            "need n >= 1 and lambda >= 0".into(),
        ));
    }
    let p = (lambda / n as f64).min(1.0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let g = Graph::new(n, &edges)?;
    let largest = g
        .view()
        .components()
        .into_iter()
        .max_by_key(|c| (c.len(), Reverse(c[0])))
        .unwrap_or_default();
    Ok(g.view().induced(largest).compact().graph)
}

/// Honeycomb lattice in brick-wall coordinates: `(x, y)` is joined to
/// `(x +- 1, y)` and to `(x, y + 1)` when `x + y` is even, `(x, y - 1)` otherwise.
fn hex_neighbors((x, y): (i64, i64)) -> [(i64, i64); 3] {
    let vertical = if (x + y).rem_euclid(2) == 0 {
        y + 1
    } else {
        y - 1
    };
    [(x - 1, y), (x + 1, y), (x, vertical)]
}

pub fn hex_patch(radius: usize) -> Graph {
    let mut id: HashMap<(i64, i64), VertexId> = HashMap::new();
    let mut order = vec![(0i64, 0i64)];
    let mut depth = vec![0usize];
    id.insert((0, 0), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        if depth[i] == radius {
            continue;
        }
        for nb in hex_neighbors(order[i]) {
            if let std::collections::hash_map::Entry::Vacant(e) = id.entry(nb) {
                e.insert(order.len());
                order.push(nb);
                depth.push(depth[i] + 1);
                queue.push_back(order.len() - 1);
            }
        }
    }
    let mut edges = Vec::new();
    for (i, &c) in order.iter().enumerate() {
        for nb in hex_neighbors(c) {
            if let Some(&j) = id.get(&nb) {
                if i < j {
                    edges.push((i, j));
                }
            }
        }
    }
    Graph::new(order.len(), &edges).expect("lattice patch is simple")
}
