#![allow(dead_code)]

use kcgml_core::seed;
use kcgml_core::{ContactGraph, KnowledgeGraph, NodeId, Provenance};
use rand::Rng;

/// Random temporal contact graph on `n` people over timestamps `20, 40, ...`.
pub fn random_temporal_graph(seed_value: u64, n: usize, timestamps: usize, events: usize) -> KnowledgeGraph {
    let mut rng = seed::stream(seed_value, "test-temporal", &[]);
    let mut g = KnowledgeGraph::new();
    let ids: Vec<NodeId> = (0..n).map(|i| g.add_person(&format!("p{i}"))).collect();
    for _ in 0..events {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b {
            continue;
        }
        let t = 20 * rng.random_range(1..=timestamps as u64);
        g.add_contact(ids[a], ids[b], t, Provenance::Direct).unwrap();
    }
    g.compute_node_properties();
    g
}

/// Erdos-Renyi style edge list with positive weights and strengths.
pub fn random_edges(seed_value: u64, n: usize, p: f64) -> Vec<(usize, usize, f64, f64)> {
    let mut rng = seed::stream(seed_value, "test-edges", &[]);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p) {
                edges.push((a, b, 20.0 * rng.random_range(1..10) as f64, rng.random_range(0.05..1.0)));
            }
        }
    }
    edges
}

pub fn random_contact_graph(seed_value: u64, n: usize, p: f64) -> ContactGraph {
    ContactGraph::from_edges(n, &random_edges(seed_value, n, p))
}

pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let na: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nn: f64 = numeric.iter().map(|a| a * a).sum::<f64>().sqrt();
    let scale = na.max(nn);
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}
