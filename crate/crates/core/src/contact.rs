//! Compressed person-to-person contact view used by the embedders and PageRank.
//!
//! Nodes are the people of a [`KnowledgeGraph`] in ascending id order. Each
//! neighbour entry carries the cumulative contact seconds of the pair (direct
//! plus inferred) and the pair strength, the noisy-OR of its records'
//! strengths. For records carrying `1 - exp(-beta t)` the noisy-OR equals the
//! strength of the pooled contact time.

use std::collections::{BTreeMap, HashMap};

use crate::graph::{KnowledgeGraph, NodeId, Relation};

#[derive(Clone, Debug, PartialEq)]
pub struct ContactGraph {
    node_ids: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    strengths: Vec<f64>,
}

impl ContactGraph {
    pub fn from_graph(graph: &KnowledgeGraph) -> Self {
        let node_ids: Vec<NodeId> = graph.person_ids().collect();
        let index: HashMap<NodeId, usize> = node_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut pairs: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
        for e in graph.edges() {
            if e.relation != Relation::HasContactWith {
                continue;
            }
            let (Some(&a), Some(&b)) = (index.get(&e.head), index.get(&e.tail)) else {
                continue;
            };
            let entry = pairs.entry((a.min(b), a.max(b))).or_insert((0.0, 1.0));
            entry.0 += e.total_contact_time as f64;
            entry.1 *= 1.0 - e.strength;
        }
        let edges = pairs.into_iter().map(|((a, b), (w, miss))| (a, b, w, 1.0 - miss));
        Self::assemble(node_ids, index, edges)
    }

    /// Builds a graph on nodes `0..n` from `(a, b, weight, strength)` tuples.
    /// Repeated pairs pool their weights and noisy-OR their strengths;
    /// self-loops are dropped.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64, f64)]) -> Self {
        let node_ids: Vec<NodeId> = (0..n as u32).map(NodeId).collect();
        let index = node_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut pairs: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
        for &(a, b, w, s) in edges {
            assert!(a < n && b < n, "edge endpoint out of range");
            if a == b {
                continue;
            }
            let entry = pairs.entry((a.min(b), a.max(b))).or_insert((0.0, 1.0));
            entry.0 += w;
            entry.1 *= 1.0 - s;
        }
        let edges = pairs.into_iter().map(|((a, b), (w, miss))| (a, b, w, 1.0 - miss));
        Self::assemble(node_ids, index, edges)
    }

    /// Unit-weight, unit-strength graph from an edge list.
    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Self {
        let tuples: Vec<_> = edges.iter().map(|&(a, b)| (a, b, 1.0, 1.0)).collect();
        Self::from_edges(n, &tuples)
    }

    fn assemble(
        node_ids: Vec<NodeId>,
        index: HashMap<NodeId, usize>,
        edges: impl Iterator<Item = (usize, usize, f64, f64)>,
    ) -> Self {
        let n = node_ids.len();
        let mut lists: Vec<Vec<(usize, f64, f64)>> = vec![Vec::new(); n];
        for (a, b, w, s) in edges {
            lists[a].push((b, w, s));
            lists[b].push((a, w, s));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        let mut strengths = Vec::new();
        offsets.push(0);
        for mut list in lists {
            list.sort_by_key(|&(u, _, _)| u);
            for (u, w, s) in list {
                targets.push(u);
                weights.push(w);
                strengths.push(s);
            }
            offsets.push(targets.len());
        }
        Self {
            node_ids,
            index,
            offsets,
            targets,
            weights,
            strengths,
        }
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn node_ids(&self) -> &[NodeId] {
        &self.node_ids
    }

    pub fn node_id(&self, i: usize) -> NodeId {
        self.node_ids[i]
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Number of undirected pairs.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.len()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Neighbours of `v`, ascending.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Cumulative contact seconds, aligned with [`Self::neighbors`].
    pub fn weights(&self, v: usize) -> &[f64] {
        &self.weights[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Pair strengths, aligned with [`Self::neighbors`].
    pub fn strengths(&self, v: usize) -> &[f64] {
        &self.strengths[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Copy of the graph with every pair strength replaced by `s`.
    pub fn with_uniform_strength(&self, s: f64) -> Self {
        Self {
            strengths: vec![s; self.strengths.len()],
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Provenance;

    #[test]
    fn projection_pools_direct_and_inferred() {
        let mut g = KnowledgeGraph::new();
        let a = g.add_person("a");
        let d = g.add_department("dep");
        let b = g.add_person("b");
        g.add_membership(a, d).unwrap();
        g.add_contact(a, b, 20, Provenance::Direct).unwrap();
        g.add_contact(a, b, 40, Provenance::Inferred).unwrap();
        g.set_edge_strength(1, 0.5);
        g.set_edge_strength(2, 0.5);
        let c = ContactGraph::from_graph(&g);
        assert_eq!(c.node_ids(), &[a, b]);
        assert_eq!(c.neighbors(0), &[1]);
        assert_eq!(c.weights(0), &[40.0]);
        assert_eq!(c.strengths(1), &[0.75]);
        assert_eq!(c.edge_count(), 1);
    }

    #[test]
    fn noisy_or_of_decay_strengths_pools_time() {
        let beta: f64 = 0.01;
        let s = |t: f64| 1.0 - (-beta * t).exp();
        let c = ContactGraph::from_edges(2, &[(0, 1, 20.0, s(20.0)), (0, 1, 40.0, s(40.0))]);
        assert!((c.strengths(0)[0] - s(60.0)).abs() < 1e-15);
    }
}
