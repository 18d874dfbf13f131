//! Centrality, embedding drift, and 2-D projections comparing a raw graph
//! with its completed counterpart.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::contact::ContactGraph;
use crate::embedding::{EmbeddingMatrix, Generator};
use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, NodeId};
use crate::kc::ClosureStats;

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Scores sum to one.
    Probability,
    /// Scores scaled by `|V|`, so a regular graph scores 1.0 everywhere.
    #[default]
    PerNode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PageRankConfig {
    pub alpha: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub normalization: Normalization,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self {
            alpha: 0.85,
            tolerance: 1e-9,
            max_iterations: 100,
            normalization: Normalization::PerNode,
        }
    }
}

impl PageRankConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PageRankResult {
    pub scores: BTreeMap<NodeId, f64>,
    pub iterations: usize,
    pub converged: bool,
    pub normalization: Normalization,
}

/// Power iteration over the contact graph, each contact counted as two
/// directed edges. Nodes without contacts spread their mass uniformly.
pub fn pagerank(graph: &ContactGraph, config: &PageRankConfig) -> Result<PageRankResult> {
    config.validate()?;
    let n = graph.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let nf = n as f64;
    let mut x = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iterations {
        iterations += 1;
        let dangling: f64 = (0..n).filter(|&v| graph.degree(v) == 0).map(|v| x[v]).sum();
        let base = (1.0 - config.alpha) / nf + config.alpha * dangling / nf;
        for (v, slot) in next.iter_mut().enumerate() {
            let inflow: f64 = graph.neighbors(v).iter().map(|&u| x[u] / graph.degree(u) as f64).sum();
            *slot = base + config.alpha * inflow;
        }
        let change: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if change < config.tolerance {
            converged = true;
            break;
        }
    }
    let scale = match config.normalization {
        Normalization::Probability => 1.0,
        Normalization::PerNode => nf,
    };
    Ok(PageRankResult {
        scores: graph
            .node_ids()
            .iter()
            .zip(&x)
            .map(|(&id, &s)| (id, s * scale))
            .collect(),
        iterations,
        converged,
        normalization: config.normalization,
    })
}

/// Node ids sorted by descending score, ties by ascending id.
pub fn ranking(scores: &BTreeMap<NodeId, f64>) -> Vec<(NodeId, f64)> {
    let mut v: Vec<(NodeId, f64)> = scores.iter().map(|(&k, &s)| (k, s)).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    v
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankedNode {
    pub rank: usize,
    pub node: NodeId,
    pub name: Option<String>,
    pub score: f64,
}

/// One line of a side-by-side top-k table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankingRow {
    pub rank: usize,
    pub raw: RankedNode,
    pub kc: RankedNode,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankingComparison {
    pub k: usize,
    pub top_raw: Vec<RankedNode>,
    pub top_kc: Vec<RankedNode>,
    /// `rank_kc - rank_raw` over every node (1-based ranks).
    pub displacement: BTreeMap<NodeId, i64>,
    pub max_displacement: u64,
    pub jaccard: f64,
}

impl RankingComparison {
    pub fn rows(&self) -> Vec<RankingRow> {
        self.top_raw
            .iter()
            .zip(&self.top_kc)
            .map(|(r, c)| RankingRow {
                rank: r.rank,
                raw: r.clone(),
                kc: c.clone(),
            })
            .collect()
    }

    /// Fills in display names from the graph.
    pub fn label_with(&mut self, graph: &KnowledgeGraph) {
        for entry in self.top_raw.iter_mut().chain(self.top_kc.iter_mut()) {
            entry.name = graph.node(entry.node).ok().map(|n| n.name.clone());
        }
    }
}

pub fn top_k_comparison(
    scores_raw: &BTreeMap<NodeId, f64>,
    scores_kc: &BTreeMap<NodeId, f64>,
    k: usize,
) -> Result<RankingComparison> {
    if !scores_raw.keys().eq(scores_kc.keys()) {
        return Err(Error::shape("ranked node sets", scores_raw.len(), scores_kc.len()));
    }
    let k = k.min(scores_raw.len());
    let raw = ranking(scores_raw);
    let kc = ranking(scores_kc);
    let top = |list: &[(NodeId, f64)]| -> Vec<RankedNode> {
        list.iter()
            .take(k)
            .enumerate()
            .map(|(i, &(node, score))| RankedNode {
                rank: i + 1,
                node,
                name: None,
                score,
            })
            .collect()
    };
    let kc_rank: BTreeMap<NodeId, usize> = kc.iter().enumerate().map(|(i, &(id, _))| (id, i)).collect();
    let displacement: BTreeMap<NodeId, i64> = raw
        .iter()
        .enumerate()
        .map(|(i, &(id, _))| (id, kc_rank[&id] as i64 - i as i64))
        .collect();
    let max_displacement = displacement.values().map(|d| d.unsigned_abs()).max().unwrap_or(0);
    let set_raw: BTreeSet<NodeId> = raw.iter().take(k).map(|e| e.0).collect();
    let set_kc: BTreeSet<NodeId> = kc.iter().take(k).map(|e| e.0).collect();
    let union = set_raw.union(&set_kc).count();
    let jaccard = if union == 0 {
        1.0
    } else {
        set_raw.intersection(&set_kc).count() as f64 / union as f64
    };
    Ok(RankingComparison {
        k,
        top_raw: top(&raw),
        top_kc: top(&kc),
        displacement,
        max_displacement,
        jaccard,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftReport {
    pub generator: Generator,
    pub seed: u64,
    pub distances: BTreeMap<NodeId, f64>,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
}

fn check_lineage(a: &EmbeddingMatrix, b: &EmbeddingMatrix) -> Result<()> {
    if a.generator != b.generator {
        return Err(Error::Config(format!(
            "cannot compare {} embeddings with {} embeddings",
            a.generator, b.generator
        )));
    }
    if a.seed != b.seed {
        return Err(Error::Config(format!(
            "embedding seeds differ: {} vs {}",
            a.seed, b.seed
        )));
    }
    if a.dimensions() != b.dimensions() {
        return Err(Error::shape("embedding dimensions", a.dimensions(), b.dimensions()));
    }
    if a.node_ids != b.node_ids {
        return Err(Error::shape("embedding node ids", a.len(), b.len()));
    }
    Ok(())
}

/// Per-node Euclidean distance between matched embeddings.
pub fn embedding_drift(raw: &EmbeddingMatrix, kc: &EmbeddingMatrix) -> Result<DriftReport> {
    check_lineage(raw, kc)?;
    if raw.is_empty() {
        return Err(Error::EmptyInput);
    }
    let d: Vec<f64> = (0..raw.len())
        .map(|r| (raw.values.row(r) - kc.values.row(r)).norm())
        .collect();
    let mut sorted = d.clone();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let median = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0
    };
    Ok(DriftReport {
        generator: raw.generator,
        seed: raw.seed,
        distances: raw.node_ids.iter().copied().zip(d.iter().copied()).collect(),
        mean: d.iter().sum::<f64>() / m as f64,
        median,
        max: sorted[m - 1],
    })
}

/// Rotates `source` onto `target` with the orthogonal map minimising the
/// Frobenius distance. Translation and scale are left alone.
pub fn procrustes_align(source: &EmbeddingMatrix, target: &EmbeddingMatrix) -> Result<EmbeddingMatrix> {
    check_lineage(source, target)?;
    let m = source.values.transpose() * &target.values;
    let svd = m.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Config("alignment decomposition failed".into())),
    };
    let rotation = u * v_t;
    EmbeddingMatrix::new(
        source.node_ids.clone(),
        &source.values * rotation,
        source.generator,
        source.seed,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Projection2D {
    #[serde(skip)]
    pub coordinates: DMatrix<f64>,
    pub explained_variance: Vec<f64>,
    pub degenerate: bool,
}

/// Principal-component projection onto the top `out_dims` axes. Each axis
/// is oriented so its largest-magnitude loading is positive.
pub fn pca_project(values: &DMatrix<f64>, out_dims: usize) -> Result<Projection2D> {
    let (n, d) = values.shape();
    if n < 2 {
        return Err(Error::shape("projection rows", "at least 2", n));
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config("non-finite embedding entry".into()));
    }
    let mut centered = values.clone();
    for mut col in centered.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let scale = values.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let spread = centered.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if spread <= 1e-12 * scale {
        return Ok(Projection2D {
            coordinates: DMatrix::zeros(n, out_dims),
            explained_variance: vec![0.0; out_dims],
            degenerate: true,
        });
    }
    let cov = centered.transpose() * &centered / n as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let total: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0)).sum();

    let mut coordinates = DMatrix::zeros(n, out_dims);
    let mut explained_variance = vec![0.0; out_dims];
    for (c, &idx) in order.iter().take(out_dims).enumerate() {
        let mut axis = eig.eigenvectors.column(idx).clone_owned();
        let lead = axis
            .iter()
            .enumerate()
            .fold(0, |best, (i, x)| if x.abs() > axis[best].abs() { i } else { best });
        if axis[lead] < 0.0 {
            axis.neg_mut();
        }
        coordinates.set_column(c, &(&centered * axis));
        explained_variance[c] = eig.eigenvalues[idx].max(0.0) / total;
    }
    Ok(Projection2D {
        coordinates,
        explained_variance,
        degenerate: false,
    })
}

/// A projection fitted on the union of several embedding variants.
#[derive(Clone, Debug, PartialEq)]
pub struct JointProjection {
    pub projection: Projection2D,
    /// `(node, variant)` for each projected row.
    pub rows: Vec<(NodeId, String)>,
}

impl JointProjection {
    /// CSV with header `node_id,pc1,pc2,variant`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "node_id,pc1,pc2,variant")?;
        let c = &self.projection.coordinates;
        for (r, (id, variant)) in self.rows.iter().enumerate() {
            let pc2 = if c.ncols() > 1 { c[(r, 1)] } else { 0.0 };
            writeln!(out, "{id},{},{pc2},{variant}", c[(r, 0)])?;
        }
        Ok(())
    }
}

/// Stacks the variants row-wise and fits one 2-D projection to all of them.
pub fn joint_projection(variants: &[(&str, &EmbeddingMatrix)]) -> Result<JointProjection> {
    let first = variants.first().ok_or(Error::EmptyInput)?.1;
    let d = first.dimensions();
    let mut rows = Vec::new();
    let mut data = Vec::new();
    for (name, emb) in variants {
        if emb.dimensions() != d {
            return Err(Error::shape(
                format!("{name} embedding dimensions"),
                d,
                emb.dimensions(),
            ));
        }
        for (r, id) in emb.node_ids.iter().enumerate() {
            rows.push((*id, name.to_string()));
            data.extend(emb.values.row(r).iter().copied());
        }
    }
    let stacked = DMatrix::from_row_slice(rows.len(), d, &data);
    Ok(JointProjection {
        projection: pca_project(&stacked, 2)?,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PageRankSummary {
    pub config: PageRankConfig,
    pub raw_iterations: usize,
    pub raw_converged: bool,
    pub kc_iterations: Option<usize>,
    pub kc_converged: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionSummary {
    pub file: String,
    pub explained_variance: Vec<f64>,
    pub degenerate: bool,
}

/// Per-graph aggregation influence with a count of nodes whose influence
/// dropped after completion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InfluenceSummary {
    pub raw_mean: f64,
    pub kc_mean: f64,
    pub decreased: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ReportParts {
    pub closure: Option<ClosureStats>,
    pub pagerank: Option<PageRankSummary>,
    /// Raw-only top-k when completion is disabled.
    pub baseline_top: Option<Vec<RankedNode>>,
    pub ranking: Option<RankingComparison>,
    pub drift: BTreeMap<String, DriftReport>,
    pub influence: Option<InfluenceSummary>,
    pub projections: BTreeMap<String, ProjectionSummary>,
    pub notices: Vec<String>,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticsReport {
    pub closure: Option<ClosureStats>,
    pub pagerank: Option<PageRankSummary>,
    pub baseline_top: Option<Vec<RankedNode>>,
    pub ranking: Option<RankingComparison>,
    pub ranking_table: Vec<RankingRow>,
    pub drift: BTreeMap<String, DriftReport>,
    pub influence: Option<InfluenceSummary>,
    pub projections: BTreeMap<String, ProjectionSummary>,
    pub notices: Vec<String>,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
}

impl AnalyticsReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

pub fn assemble_report(parts: ReportParts) -> Result<AnalyticsReport> {
    let has_any = parts.closure.is_some()
        || parts.pagerank.is_some()
        || parts.baseline_top.is_some()
        || parts.ranking.is_some()
        || !parts.drift.is_empty()
        || parts.influence.is_some()
        || !parts.projections.is_empty();
    if !has_any {
        return Err(Error::EmptyReport);
    }
    Ok(AnalyticsReport {
        ranking_table: parts.ranking.as_ref().map(RankingComparison::rows).unwrap_or_default(),
        closure: parts.closure,
        pagerank: parts.pagerank,
        baseline_top: parts.baseline_top,
        ranking: parts.ranking,
        drift: parts.drift,
        influence: parts.influence,
        projections: parts.projections,
        notices: parts.notices,
        config: parts.config,
        seeds: parts.seeds,
    })
}
