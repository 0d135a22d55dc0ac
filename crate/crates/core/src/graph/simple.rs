use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Finite simple undirected graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
    labels: Option<Vec<String>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, repeated edges and
    /// out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        let mut seen = HashSet::new();
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({i}, {j}) out of range for {n} vertices"
                )));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {i}")));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::InvalidGraph(format!("repeated edge ({i}, {j})")));
            }
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Self {
            adj,
            edge_count: seen.len(),
            labels: None,
        })
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).expect("path is simple")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a simple cycle needs at least 3 vertices");
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle is simple")
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.vertex_count() {
            return Err(Error::InvalidGraph(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.vertex_count()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&j).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    /// Edges as pairs `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (i, list) in self.adj.iter().enumerate() {
            for &j in list {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Graph distances from a set of sources (`usize::MAX` if unreachable).
    pub fn distances_from(&self, sources: &[usize]) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s] != 0 {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn distance(&self, i: usize, j: usize) -> Option<usize> {
        let d = self.distances_from(&[i])[j];
        (d != usize::MAX).then_some(d)
    }

    pub fn component_count(&self) -> usize {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &v in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }

    pub fn require_connected(&self) -> Result<()> {
        match self.component_count() {
            0 | 1 => Ok(()),
            components => Err(Error::Disconnected { components }),
        }
    }

    /// Induced subgraph on `vertices` (in that order). Vertex `k` of the
    /// result is `vertices[k]` of `self`.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut local = vec![usize::MAX; self.vertex_count()];
        for (k, &v) in vertices.iter().enumerate() {
            local[v] = k;
        }
        let mut edges = Vec::new();
        for (k, &v) in vertices.iter().enumerate() {
            for &w in &self.adj[v] {
                let l = local[w];
                if l != usize::MAX && k < l {
                    edges.push((k, l));
                }
            }
        }
        Graph::new(vertices.len(), edges).expect("induced subgraph of a simple graph")
    }

    pub fn adjacency_matrix<T: Scalar>(&self) -> Matrix<T> {
        let n = self.vertex_count();
        let mut m = Matrix::zeros(n, n);
        for (i, list) in self.adj.iter().enumerate() {
            for &j in list {
                m[(i, j)] = T::one();
            }
        }
        m
    }

    /// The positive Laplacian d - A.
    pub fn laplacian_matrix<T: Scalar>(&self) -> Matrix<T> {
        let mut m = self.adjacency_matrix::<T>().scale(-T::one());
        for i in 0..self.vertex_count() {
            m[(i, i)] = T::of_usize(self.degree(i));
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_loops_and_duplicates() {
        assert!(Graph::new(3, [(0, 0)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
    }

    #[test]
    fn path_and_cycle_degrees() {
        assert_eq!(Graph::path(5).degrees(), vec![1, 2, 2, 2, 1]);
        assert_eq!(Graph::cycle(5).degrees(), vec![2; 5]);
        assert_eq!(Graph::cycle(5).edge_count(), 5);
    }

    #[test]
    fn components_and_distances() {
        let g = Graph::new(5, [(0, 1), (1, 2), (3, 4)]).unwrap();
        assert_eq!(g.component_count(), 2);
        assert!(g.require_connected().is_err());
        assert_eq!(g.distance(0, 2), Some(2));
        assert_eq!(g.distance(0, 4), None);
    }

    #[test]
    fn laplacian_plus_adjacency_is_degree() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 0), (2, 3)]).unwrap();
        let l = g.laplacian_matrix::<f64>();
        let a = g.adjacency_matrix::<f64>();
        let s = &l + &a;
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { g.degree(i) as f64 } else { 0.0 };
                assert_eq!(s[(i, j)], expect);
            }
        }
    }
}
