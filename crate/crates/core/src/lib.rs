//! Knowledge-completion enhanced graph machine learning on temporal contact
//! networks.
//!
//! The crate ingests `t i j` proximity records into a [`KnowledgeGraph`],
//! completes it with inferred co-presence contacts and decay-based contagion
//! strengths ([`kc`]), embeds people with Node2Vec ([`node2vec`]) and
//! GraphSAGE ([`graphsage`]), and measures how completion moves PageRank
//! centrality and embeddings ([`analytics`]).

pub mod analytics;
pub mod archive;
pub mod contact;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod graphsage;
pub mod ingest;
pub mod kc;
pub mod node2vec;
pub mod seed;
pub mod synthetic;

pub use contact::ContactGraph;
pub use embedding::{EmbeddingMatrix, Generator};
pub use error::{Error, Result};
pub use graph::{EdgeRecord, KnowledgeGraph, NodeId, NodeLabel, NodeProperties, NodeRecord, Provenance, Relation};
