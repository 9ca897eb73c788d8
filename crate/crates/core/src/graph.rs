//! Linear graphs: directed multigraphs whose edges carry a total order.
//!
//! Edge `k` of a [`LinearGraph`] is the `k`-th entry of its edge list and is
//! stored as `(source, target)`. Vertex ids are 0-based.

use crate::error::{Error, Result};
use crate::partition::SetPartition;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl LinearGraph {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for (k, &(s, t)) in edges.iter().enumerate() {
            if s >= vertex_count || t >= vertex_count {
                return Err(Error::invalid(format!(
                    "edge {} = ({}, {}) has an endpoint outside 0..{}",
                    k + 1,
                    s,
                    t,
                    vertex_count
                )));
            }
        }
        Ok(LinearGraph { vertex_count, edges })
    }

    pub fn empty() -> Self {
        LinearGraph { vertex_count: 0, edges: Vec::new() }
    }

    /// `K` disjoint edges; edge `k` goes from vertex `K+k` to vertex `k`.
    pub fn minimal(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("the minimal graph needs order K >= 1"));
        }
        let edges = (0..order).map(|k| (order + k, k)).collect();
        Ok(LinearGraph { vertex_count: 2 * order, edges })
    }

    /// One vertex carrying `order` loops.
    pub fn loops(order: usize) -> Self {
        LinearGraph { vertex_count: 1, edges: vec![(0, 0); order] }
    }

    /// Directed cycle `v_0 <- v_1 <- ... <- v_{n-1} <- v_0`; edge `k` points from `v_{k+1}` to `v_k`,
    /// so the graph trace of the cycle is `Tr(A_1 A_2 ... A_n)`.
    pub fn cycle(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("a cycle needs at least one edge"));
        }
        let edges = (0..len).map(|k| ((k + 1) % len, k)).collect();
        Ok(LinearGraph { vertex_count: len, edges })
    }

    /// Directed path `v_0 <- v_1 <- ... <- v_len`.
    pub fn path(len: usize) -> Self {
        let edges = (0..len).map(|k| (k + 1, k)).collect();
        LinearGraph { vertex_count: len + 1, edges }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn order(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, k: usize) -> (usize, usize) {
        self.edges[k]
    }

    /// Quotient by a partition of the vertex set; block `b` becomes vertex `b`.
    pub fn quotient(&self, pi: &SetPartition) -> Result<Self> {
        if pi.ground_size() != self.vertex_count {
            return Err(Error::invalid(format!(
                "partition of {} elements cannot act on a graph with {} vertices",
                pi.ground_size(),
                self.vertex_count
            )));
        }
        Ok(self.quotient_unchecked(pi))
    }

    pub(crate) fn quotient_unchecked(&self, pi: &SetPartition) -> Self {
        LinearGraph {
            vertex_count: pi.block_count(),
            edges: self.edges.iter().map(|&(s, t)| (pi.block_of(s), pi.block_of(t))).collect(),
        }
    }

    /// Quotient by an arbitrary vertex map `v -> labels[v]` (labels need not be normalized).
    pub fn quotient_by_labels(&self, labels: &[usize]) -> Result<Self> {
        self.quotient(&SetPartition::from_labels(labels)?)
    }

    /// Relabels vertices in order of first appearance along the edge sequence
    /// (source before target), isolated vertices last in their original order.
    pub fn canonical_form(&self) -> Self {
        let mut relabel = vec![usize::MAX; self.vertex_count];
        let mut next = 0;
        for &(s, t) in &self.edges {
            for v in [s, t] {
                if relabel[v] == usize::MAX {
                    relabel[v] = next;
                    next += 1;
                }
            }
        }
        for r in relabel.iter_mut() {
            if *r == usize::MAX {
                *r = next;
                next += 1;
            }
        }
        LinearGraph {
            vertex_count: self.vertex_count,
            edges: self.edges.iter().map(|&(s, t)| (relabel[s], relabel[t])).collect(),
        }
    }

    /// Equality up to order-preserving directed isomorphism.
    pub fn is_isomorphic(&self, other: &LinearGraph) -> bool {
        self.canonical_form() == other.canonical_form()
    }

    /// Reverses every edge, keeping the order.
    pub fn adjoint(&self) -> Self {
        LinearGraph {
            vertex_count: self.vertex_count,
            edges: self.edges.iter().map(|&(s, t)| (t, s)).collect(),
        }
    }

    /// `self` followed by `other`, whose vertices are shifted past those of `self`.
    pub fn disjoint_union(&self, other: &LinearGraph) -> Self {
        let shift = self.vertex_count;
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(s, t)| (s + shift, t + shift)));
        LinearGraph { vertex_count: self.vertex_count + other.vertex_count, edges }
    }

    /// The subgraph on the same vertex set keeping only the listed edges (in the given order).
    pub fn edge_subgraph(&self, keep: &[usize]) -> Self {
        LinearGraph {
            vertex_count: self.vertex_count,
            edges: keep.iter().map(|&k| self.edges[k]).collect(),
        }
    }

    /// Connected component index of every vertex (ignoring orientation), numbered by first vertex.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(s, t) in &self.edges {
            adj[s].push(t);
            adj[t].push(s);
        }
        let mut label = vec![usize::MAX; self.vertex_count];
        let mut count = 0;
        for start in 0..self.vertex_count {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if label[w] == usize::MAX {
                        label[w] = count;
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        label
    }

    /// Number of connected components, isolated vertices included.
    pub fn component_count(&self) -> usize {
        self.component_labels().iter().max().map_or(0, |m| m + 1)
    }

    /// Splits into connected components; each is returned with the original
    /// vertex ids and original edge indices it contains.
    pub fn components(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let labels = self.component_labels();
        let count = labels.iter().max().map_or(0, |m| m + 1);
        let mut out = vec![(Vec::new(), Vec::new()); count];
        for (v, &c) in labels.iter().enumerate() {
            out[c].0.push(v);
        }
        for (k, &(s, _)) in self.edges.iter().enumerate() {
            out[labels[s]].1.push(k);
        }
        out
    }

    /// Degree of each vertex in the underlying undirected multigraph (a loop counts twice).
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count];
        for &(s, t) in &self.edges {
            deg[s] += 1;
            deg[t] += 1;
        }
        deg
    }

    pub fn isolated_vertices(&self) -> Vec<usize> {
        self.degrees()
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(v, _)| v)
            .collect()
    }
}
