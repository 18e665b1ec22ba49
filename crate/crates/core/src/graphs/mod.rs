//! Undirected weighted graphs over matrix rows or columns, their
//! combinatorial Laplacians, and the builders used to derive graphs from
//! pairwise distances.

mod build;
mod io;
mod laplacian;

pub use build::{build_epsilon_graph, build_knn_graph, default_alpha, KnnWeights};
pub use io::{read_edge_list, write_edge_list};
pub use laplacian::{Laplacian, Side};

use crate::error::{Error, Result};

/// Undirected graph with nonnegative edge weights, stored as a symmetric
/// compressed adjacency (each edge appears in both endpoint lists).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n_vertices: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

impl WeightedGraph {
    /// A graph on `n_vertices` vertices with no edges.
    pub fn empty(n_vertices: usize) -> Self {
        WeightedGraph {
            n_vertices,
            offsets: vec![0; n_vertices + 1],
            targets: Vec::new(),
            weights: Vec::new(),
        }
    }

    /// Builds a graph from undirected edges `(u, v, w)`.
    ///
    /// Self-loops, out-of-range endpoints, negative or non-finite weights and
    /// repeated unordered pairs are rejected. Zero-weight edges are dropped.
    pub fn from_edges<I>(n_vertices: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
        for (u, v, w) in edges {
            if u >= n_vertices || v >= n_vertices {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for {n_vertices} vertices"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) has invalid weight {w}"
                )));
            }
            pairs.push((u.min(v), u.max(v), w));
        }
        pairs.sort_by_key(|&(u, v, _)| (u, v));
        if let Some(dup) = pairs.windows(2).find(|p| p[0].0 == p[1].0 && p[0].1 == p[1].1) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                dup[0].0, dup[0].1
            )));
        }
        pairs.retain(|&(_, _, w)| w > 0.0);
        Ok(Self::from_sorted_unique(n_vertices, &pairs))
    }

    /// Assembles the compressed adjacency from validated, deduplicated
    /// `u < v` pairs with positive weights.
    pub(crate) fn from_sorted_unique(n_vertices: usize, pairs: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n_vertices];
        for &(u, v, _) in pairs {
            counts[u] += 1;
            counts[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n_vertices + 1);
        offsets.push(0);
        for c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }
        let nnz = *offsets.last().unwrap();
        let mut targets = vec![0usize; nnz];
        let mut weights = vec![0.0; nnz];
        let mut fill = offsets[..n_vertices].to_vec();
        for &(u, v, w) in pairs {
            targets[fill[u]] = v;
            weights[fill[u]] = w;
            fill[u] += 1;
            targets[fill[v]] = u;
            weights[fill[v]] = w;
            fill[v] += 1;
        }
        // keep each neighbor list sorted so weight lookup can bisect
        for i in 0..n_vertices {
            let (lo, hi) = (offsets[i], offsets[i + 1]);
            let mut row: Vec<(usize, f64)> = targets[lo..hi]
                .iter()
                .copied()
                .zip(weights[lo..hi].iter().copied())
                .collect();
            row.sort_by_key(|&(t, _)| t);
            for (k, (t, w)) in row.into_iter().enumerate() {
                targets[lo + k] = t;
                weights[lo + k] = w;
            }
        }
        WeightedGraph {
            n_vertices,
            offsets,
            targets,
            weights,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// Number of undirected edges.
    pub fn n_edges(&self) -> usize {
        self.targets.len() / 2
    }

    /// Neighbors of `v` with their weights, in increasing vertex order.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.offsets[v], self.offsets[v + 1]);
        self.targets[lo..hi]
            .iter()
            .copied()
            .zip(self.weights[lo..hi].iter().copied())
    }

    /// Each undirected edge once, as `(u, v, w)` with `u < v`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_vertices).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&(v, _)| v > u)
                .map(move |(v, w)| (u, v, w))
        })
    }

    /// Weight of the pair `{u, v}`; zero when absent.
    pub fn weight(&self, u: usize, v: usize) -> f64 {
        if u >= self.n_vertices || v >= self.n_vertices {
            return 0.0;
        }
        let (lo, hi) = (self.offsets[u], self.offsets[u + 1]);
        match self.targets[lo..hi].binary_search(&v) {
            Ok(k) => self.weights[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn degree(&self, v: usize) -> f64 {
        self.neighbors(v).map(|(_, w)| w).sum()
    }

    /// Combinatorial Laplacian view `D - W` of this graph.
    pub fn laplacian(&self) -> Laplacian<'_> {
        Laplacian::new(self)
    }

    /// Component label per vertex; labels are dense and ordered by the
    /// smallest vertex in each component.
    pub fn connected_components(&self) -> Vec<usize> {
        const UNSEEN: usize = usize::MAX;
        let mut label = vec![UNSEEN; self.n_vertices];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..self.n_vertices {
            if label[start] != UNSEEN {
                continue;
            }
            label[start] = next;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for (v, _) in self.neighbors(u) {
                    if label[v] == UNSEEN {
                        label[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Union of two graphs on the same vertex set. Pairs present in both
    /// keep the weight from `self`.
    pub fn union(&self, other: &WeightedGraph) -> Result<WeightedGraph> {
        if self.n_vertices != other.n_vertices {
            return Err(Error::dims(
                "graph union",
                self.n_vertices,
                other.n_vertices,
            ));
        }
        let mut pairs: Vec<(usize, usize, f64)> = self.edges().collect();
        pairs.extend(other.edges().filter(|&(u, v, _)| self.weight(u, v) == 0.0));
        pairs.sort_by_key(|&(u, v, _)| (u, v));
        Ok(Self::from_sorted_unique(self.n_vertices, &pairs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loop_and_duplicates() {
        assert!(WeightedGraph::from_edges(3, [(1, 1, 1.0)]).is_err());
        assert!(WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(WeightedGraph::from_edges(3, [(0, 3, 1.0)]).is_err());
        assert!(WeightedGraph::from_edges(3, [(0, 1, -1.0)]).is_err());
    }

    #[test]
    fn zero_weight_edges_are_absent() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 0.0), (1, 2, 2.5)]).unwrap();
        assert_eq!(g.n_edges(), 1);
        assert_eq!(g.weight(0, 1), 0.0);
        assert_eq!(g.weight(2, 1), 2.5);
        assert_eq!(g.weight(1, 2), 2.5);
    }

    #[test]
    fn edges_listed_once_in_order() {
        let g = WeightedGraph::from_edges(4, [(3, 0, 1.0), (2, 1, 0.5), (0, 1, 2.0)]).unwrap();
        let e: Vec<_> = g.edges().collect();
        assert_eq!(e, vec![(0, 1, 2.0), (0, 3, 1.0), (1, 2, 0.5)]);
        assert_eq!(g.degree(0), 3.0);
    }

    #[test]
    fn components() {
        let g = WeightedGraph::from_edges(5, [(0, 1, 1.0), (3, 4, 1.0)]).unwrap();
        assert_eq!(g.connected_components(), vec![0, 0, 1, 2, 2]);
    }
}
