//! Simple undirected graphs with stable identifiers and read-only deletion views.

use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

/// An immutable simple undirected graph.
///
/// Vertex ids are `0..n`, edge ids are indices into the input edge list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(VertexId, VertexId)>,
    adjacency: Vec<Vec<(VertexId, EdgeId)>>,
}

impl Graph {
    pub fn new(n: usize, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = HashSet::with_capacity(edges.len());
        for (id, &(u, v)) in edges.iter().enumerate() {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::DuplicateEdge(u, v));
            }
            adjacency[u].push((v, id));
            adjacency[v].push((u, id));
        }
        Ok(Graph {
            n,
            edges: edges.to_vec(),
            adjacency,
        })
    }

    /// Builds a graph whose vertex count is one more than the largest id used.
    pub fn from_edges(edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        Graph::new(n, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e]
    }

    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.adjacency
            .get(u)?
            .iter()
            .find(|&&(x, _)| x == v)
            .map(|&(_, e)| e)
    }

    pub fn check_edge(&self, e: EdgeId) -> Result<(VertexId, VertexId)> {
        self.edges.get(e).copied().ok_or(Error::InvalidEdge(e))
    }

    /// The full graph as a view with nothing deleted.
    pub fn view(&self) -> SubgraphView<'_> {
        SubgraphView {
            base: self,
            vertex_deleted: vec![false; self.n],
            edge_deleted: vec![false; self.edges.len()],
        }
    }

    pub fn is_connected(&self) -> bool {
        self.view().is_connected()
    }

    pub fn is_tree(&self) -> bool {
        self.view().is_tree()
    }
}

/// A read-only overlay that deletes vertices and edges from a base graph.
///
/// The effective vertex set is `V(base) \ deleted_vertices`; an edge is
/// effective when it is not deleted and both endpoints are effective.
#[derive(Clone, Debug)]
pub struct SubgraphView<'g> {
    base: &'g Graph,
    vertex_deleted: Vec<bool>,
    edge_deleted: Vec<bool>,
}

impl<'g> SubgraphView<'g> {
    pub fn base(&self) -> &'g Graph {
        self.base
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        v < self.base.n && !self.vertex_deleted[v]
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        if e >= self.base.edges.len() || self.edge_deleted[e] {
            return false;
        }
        let (u, v) = self.base.edges[e];
        !self.vertex_deleted[u] && !self.vertex_deleted[v]
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.base.n).filter(move |&v| !self.vertex_deleted[v])
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.base.edges.len()).filter(move |&e| self.contains_edge(e))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices().count()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Effective neighbours of `v` as `(neighbour, edge)` pairs.
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (VertexId, EdgeId)> + '_ {
        let live = self.contains_vertex(v);
        self.base.adjacency[v]
            .iter()
            .copied()
            .filter(move |&(u, e)| live && !self.vertex_deleted[u] && !self.edge_deleted[e])
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).count()
    }

    pub fn max_degree(&self) -> usize {
        self.vertices().map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Deletes further vertices and edges. Deleting an already deleted id is a no-op.
    pub fn delete<V, E>(&self, vertices: V, edges: E) -> SubgraphView<'g>
    where
        V: IntoIterator<Item = VertexId>,
        E: IntoIterator<Item = EdgeId>,
    {
        let mut out = self.clone();
        for v in vertices {
            out.vertex_deleted[v] = true;
        }
        for e in edges {
            out.edge_deleted[e] = true;
        }
        out
    }

    pub fn delete_vertices<V: IntoIterator<Item = VertexId>>(
        &self,
        vertices: V,
    ) -> SubgraphView<'g> {
        self.delete(vertices, std::iter::empty())
    }

    pub fn delete_edges<E: IntoIterator<Item = EdgeId>>(&self, edges: E) -> SubgraphView<'g> {
        self.delete(std::iter::empty(), edges)
    }

    /// Restricts to the subgraph induced by `keep` (intersected with the current vertices).
    pub fn induced<V: IntoIterator<Item = VertexId>>(&self, keep: V) -> SubgraphView<'g> {
        let mut kept = vec![false; self.base.n];
        for v in keep {
            kept[v] = true;
        }
        let mut out = self.clone();
        for (v, &k) in kept.iter().enumerate() {
            if !k {
                out.vertex_deleted[v] = true;
            }
        }
        out
    }

    /// True when both views have the same effective vertex and edge sets.
    pub fn same_effective(&self, other: &SubgraphView<'_>) -> bool {
        self.vertices().eq(other.vertices()) && self.edges().eq(other.edges())
    }

    /// Breadth-first distances from a set of sources, `None` when unreachable.
    pub fn distances_from(&self, sources: &[VertexId]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.base.n];
        let mut queue = VecDeque::new();
        for &s in sources {
            if self.contains_vertex(s) && dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(x) = queue.pop_front() {
            let d = dist[x].unwrap_or(0);
            for (y, _) in self.neighbors(x) {
                if dist[y].is_none() {
                    dist[y] = Some(d + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Induced subgraph on the vertices within distance `r` of `v`.
    pub fn ball_around_vertex(&self, v: VertexId, r: usize) -> Result<SubgraphView<'g>> {
        if !self.contains_vertex(v) {
            return Err(Error::InvalidVertex(v));
        }
        Ok(self.ball_around(&[v], r))
    }

    /// Induced subgraph on the vertices within distance `r` of either endpoint of `e`.
    pub fn ball_around_edge(&self, e: EdgeId, r: usize) -> Result<SubgraphView<'g>> {
        if !self.contains_edge(e) {
            return Err(Error::InvalidEdge(e));
        }
        let (u, v) = self.base.edges[e];
        Ok(self.ball_around(&[u, v], r))
    }

    fn ball_around(&self, sources: &[VertexId], r: usize) -> SubgraphView<'g> {
        let dist = self.distances_from(sources);
        let keep = (0..self.base.n).filter(|&x| matches!(dist[x], Some(d) if d <= r));
        self.induced(keep)
    }

    /// Vertices of `inner` adjacent (in `self`) to a vertex of `self` outside `inner`.
    pub fn boundary(&self, inner: &SubgraphView<'_>) -> Vec<VertexId> {
        inner
            .vertices()
            .filter(|&v| self.neighbors(v).any(|(u, _)| !inner.contains_vertex(u)))
            .collect()
    }

    /// Connected components of the effective graph, each sorted.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        let mut seen = vec![false; self.base.n];
        let mut out = Vec::new();
        for s in self.vertices() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for (y, _) in self.neighbors(x) {
                    if !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                        stack.push(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn component_of(&self, v: VertexId) -> Vec<VertexId> {
        let dist = self.distances_from(&[v]);
        (0..self.base.n).filter(|&x| dist[x].is_some()).collect()
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    pub fn is_forest(&self) -> bool {
        self.edge_count() + self.components().len() == self.vertex_count()
    }

    pub fn is_tree(&self) -> bool {
        self.vertex_count() > 0
            && self.is_connected()
            && self.edge_count() + 1 == self.vertex_count()
    }

    /// Relabels the effective graph to `0..n'` and remembers the mapping back.
    pub fn compact(&self) -> CompactGraph {
        let mut local = vec![usize::MAX; self.base.n];
        let vertex_of: Vec<VertexId> = self.vertices().collect();
        for (i, &v) in vertex_of.iter().enumerate() {
            local[v] = i;
        }
        let edge_of: Vec<EdgeId> = self.edges().collect();
        let edges: Vec<(VertexId, VertexId)> = edge_of
            .iter()
            .map(|&e| {
                let (u, v) = self.base.edges[e];
                (local[u], local[v])
            })
            .collect();
        let graph =
            Graph::new(vertex_of.len(), &edges).expect("a view of a simple graph is simple");
        CompactGraph {
            graph,
            vertex_of,
            edge_of,
        }
    }
}

/// A relabelled copy of a view together with the maps back to base ids.
#[derive(Clone, Debug)]
pub struct CompactGraph {
    pub graph: Graph,
    pub vertex_of: Vec<VertexId>,
    pub edge_of: Vec<EdgeId>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Graph::new(n, &edges).unwrap()
    }

    #[test]
    fn build_small_graphs() {
        let g = Graph::from_edges(&[(0, 1)]).unwrap();
        assert_eq!((g.degree(0), g.degree(1)), (1, 1));
        let t = Graph::from_edges(&[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!((0..3).all(|v| t.degree(v) == 2));
    }

    #[test]
    fn build_rejects_invalid_input() {
        assert_eq!(
            Graph::from_edges(&[(0, 1), (0, 1)]),
            Err(Error::DuplicateEdge(0, 1))
        );
        assert_eq!(
            Graph::from_edges(&[(0, 1), (1, 0)]),
            Err(Error::DuplicateEdge(1, 0))
        );
        assert_eq!(Graph::from_edges(&[(2, 2)]), Err(Error::SelfLoop(2)));
        assert_eq!(
            Graph::new(2, &[(0, 5)]),
            Err(Error::VertexOutOfRange { vertex: 5, n: 2 })
        );
    }

    #[test]
    fn ball_on_path() {
        let g = path(5);
        let e = g.edge_between(2, 3).unwrap();
        let b = g.view().ball_around_edge(e, 1).unwrap();
        assert_eq!(b.vertices().collect::<Vec<_>>(), vec![1, 2, 3, 4]);
        // vertex 4 is the end of the path, so only 1 touches the outside
        assert_eq!(g.view().boundary(&b), vec![1]);
        let b2 = g
            .view()
            .ball_around_edge(g.edge_between(1, 2).unwrap(), 1)
            .unwrap();
        assert_eq!(g.view().boundary(&b2), vec![3]);
    }

    #[test]
    fn ball_radius_zero_on_triangle() {
        let g = Graph::from_edges(&[(0, 1), (1, 2), (2, 0)]).unwrap();
        let b = g.view().ball_around_edge(0, 0).unwrap();
        assert_eq!(b.vertices().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(b.edges().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn boundary_cases() {
        let g = path(5);
        assert!(g.view().boundary(&g.view()).is_empty());
        let single = g.view().induced([2]);
        assert_eq!(g.view().boundary(&single), vec![2]);
    }

    #[test]
    fn deletions_compose_and_are_idempotent() {
        let g = Graph::from_edges(&[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
        let v = g.view();
        assert!(v.delete([], []).same_effective(&v));
        let both = v.delete_vertices([0, 1]);
        assert!(!both.contains_edge(0));
        let a = v.delete([0], [2]).delete([3], [4]);
        let b = v.delete([0, 3], [2, 4]);
        assert!(a.same_effective(&b));
        assert!(a.delete([0], [2]).same_effective(&a));
    }

    #[test]
    fn compact_preserves_structure() {
        let g = path(6);
        let v = g.view().delete_vertices([0, 3]);
        let c = v.compact();
        assert_eq!(c.graph.vertex_count(), 4);
        assert_eq!(c.graph.edge_count(), 2);
        for (i, &e) in c.edge_of.iter().enumerate() {
            let (a, b) = c.graph.endpoints(i);
            let (x, y) = g.endpoints(e);
            assert_eq!((c.vertex_of[a], c.vertex_of[b]), (x, y));
        }
    }
}
