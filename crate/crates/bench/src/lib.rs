//! Shared fixtures for the benchmarks.

use kcgml_core::ingest::build_kg;
use kcgml_core::kc::{edge_strengths, transitive_closure_step, StrengthModel};
use kcgml_core::synthetic::{generate_synthetic, SyntheticConfig};
use kcgml_core::KnowledgeGraph;

/// Raw and completed graphs for a synthetic office of `n_people`.
pub fn office(n_people: usize) -> (KnowledgeGraph, KnowledgeGraph) {
    let config = SyntheticConfig {
        n_people,
        ..SyntheticConfig::default()
    };
    let (contacts, metadata) = generate_synthetic(&config).expect("valid synthetic config");
    let (raw, _) = build_kg(&contacts, &metadata).expect("synthetic rows are valid");
    let model = StrengthModel::default();
    let kc = edge_strengths(&transitive_closure_step(&raw).0, &model);
    (edge_strengths(&raw, &model), kc)
}
