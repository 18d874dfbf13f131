//! GraphSAGE with the mean aggregator over sampled contact neighbourhoods.
//!
//! Layer `k` computes, for every node `v`,
//!
//! ```text
//! m_v = (1 / |N_k(v)|) * sum_{u in N_k(v)} s(v, u) * h_u
//! h_v = relu(W_k * [h_v ; m_v])
//! ```
//!
//! where `s` is the pair strength when strength weighting is enabled and `1`
//! otherwise. The last layer's rows are L2-normalised. Sums run over
//! neighbours in ascending order, so outputs never depend on storage order.
//!
//! Full-batch layers are used: every node's neighbourhood is sampled once per
//! layer and `fanouts[k]` bounds the sample of layer `k + 1`.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::archive::{read_matrices, write_matrices, NamedMatrix};
use crate::contact::ContactGraph;
use crate::embedding::{EmbeddingMatrix, Generator};
use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, NodeId};
use crate::node2vec::{generate_walks, WalkConfig};
use crate::seed;

/// Divisor of the strength-weighted neighbour sum.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrengthNormalization {
    /// Divide by the number of sampled neighbours.
    #[default]
    Count,
    /// Divide by the sum of sampled strengths (a weighted average).
    Strength,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SageConfig {
    pub fanouts: Vec<usize>,
    pub dimensions: usize,
    pub use_strength: bool,
    pub strength_normalization: StrengthNormalization,
    pub epochs: usize,
    pub learning_rate: f64,
    pub negative_samples: usize,
    pub batch_size: usize,
    /// Positive pairs come from walks of this length...
    pub walk_length: usize,
    /// ...started this many times from every node...
    pub walks_per_node: usize,
    /// ...pairing nodes at most this many steps apart.
    pub context_window: usize,
    pub seed: u64,
}

impl Default for SageConfig {
    fn default() -> Self {
        Self {
            fanouts: vec![25, 10],
            dimensions: 16,
            use_strength: false,
            strength_normalization: StrengthNormalization::Count,
            epochs: 10,
            learning_rate: 1e-4,
            negative_samples: 5,
            batch_size: 256,
            walk_length: 5,
            walks_per_node: 5,
            context_window: 2,
            seed: 0,
        }
    }
}

impl SageConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fanouts.is_empty() || self.fanouts.contains(&0) {
            return Err(Error::Config("fanouts must be non-empty and each at least 1".into()));
        }
        if self.dimensions == 0 {
            return Err(Error::Config("dimensions must be at least 1".into()));
        }
        if self.batch_size == 0 || self.walk_length == 0 || self.walks_per_node == 0 || self.context_window == 0 {
            return Err(Error::Config("training counts must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

pub const FEATURE_NAMES: [&str; 4] = ["cp", "deg", "T", "T_avg"];

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub node_ids: Vec<NodeId>,
    pub names: Vec<String>,
    pub values: DMatrix<f64>,
}

impl FeatureMatrix {
    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let ids = DMatrix::from_iterator(self.node_ids.len(), 1, self.node_ids.iter().map(|id| f64::from(id.0)));
        write_matrices(
            &[
                NamedMatrix {
                    name: "node_ids".into(),
                    columns: vec!["node_id".into()],
                    data: ids,
                },
                NamedMatrix {
                    name: "features".into(),
                    columns: self.names.clone(),
                    data: self.values.clone(),
                },
            ],
            out,
        )
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut m = read_matrices(reader)?;
        if m.len() != 2 || m[0].name != "node_ids" || m[1].name != "features" {
            return Err(Error::Parse {
                line: 0,
                message: "expected node_ids and features blocks".into(),
            });
        }
        let features = m.pop().expect("two blocks");
        let ids = m.pop().expect("two blocks");
        if ids.data.nrows() != features.data.nrows() {
            return Err(Error::shape("feature rows", ids.data.nrows(), features.data.nrows()));
        }
        Ok(Self {
            node_ids: ids.data.iter().map(|&x| NodeId(x as u32)).collect(),
            names: features.columns,
            values: features.data,
        })
    }
}

/// Unnormalised `[cp, deg, T, T_avg]` per person, in id order.
pub fn raw_features(graph: &KnowledgeGraph) -> FeatureMatrix {
    let people: Vec<_> = graph.nodes().iter().filter(|n| n.is_person()).collect();
    let mut values = DMatrix::zeros(people.len(), FEATURE_NAMES.len());
    for (r, node) in people.iter().enumerate() {
        if let Some(p) = &node.properties {
            let row = [
                p.contagion_probability,
                p.degree,
                p.total_contact_time,
                p.average_contact_time,
            ];
            for (c, v) in row.into_iter().enumerate() {
                values[(r, c)] = v;
            }
        }
    }
    FeatureMatrix {
        node_ids: people.iter().map(|n| n.id).collect(),
        names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        values,
    }
}

/// Z-scores every column with the population standard deviation; constant
/// columns become zero.
pub fn zscore_columns(values: &mut DMatrix<f64>) {
    let n = values.nrows();
    if n == 0 {
        return;
    }
    for mut col in values.column_iter_mut() {
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        for x in col.iter_mut() {
            *x = if sd > 0.0 { (*x - mean) / sd } else { 0.0 };
        }
    }
}

pub fn build_features(graph: &KnowledgeGraph) -> FeatureMatrix {
    let mut f = raw_features(graph);
    zscore_columns(&mut f.values);
    f
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerWeights {
    /// `W_k` has shape `out x (2 * in)`.
    pub layers: Vec<DMatrix<f64>>,
}

impl LayerWeights {
    /// Uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, one stream per layer.
    pub fn init(input_dim: usize, config: &SageConfig) -> Self {
        let mut layers = Vec::with_capacity(config.fanouts.len());
        let mut in_dim = input_dim;
        for k in 0..config.fanouts.len() {
            let fan_in = 2 * in_dim;
            let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
            let mut rng = seed::stream(config.seed, "sage-init", &[k as u64]);
            let w = DMatrix::from_fn(config.dimensions, fan_in, |_, _| rng.random_range(-bound..=bound));
            layers.push(w);
            in_dim = config.dimensions;
        }
        Self { layers }
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let blocks: Vec<NamedMatrix> = self
            .layers
            .iter()
            .enumerate()
            .map(|(k, w)| NamedMatrix {
                name: format!("layer{}", k + 1),
                columns: Vec::new(),
                data: w.clone(),
            })
            .collect();
        write_matrices(&blocks, out)
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        Ok(Self {
            layers: read_matrices(reader)?.into_iter().map(|m| m.data).collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledNeighborhoods {
    pub node_ids: Vec<NodeId>,
    /// `layers[k][v]`: sampled `(neighbour row, strength)`, ascending by row.
    pub layers: Vec<Vec<Vec<(usize, f64)>>>,
}

impl SampledNeighborhoods {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Sampled neighbour node ids of row `v` at layer `k` (0-based).
    pub fn members(&self, k: usize, v: usize) -> Vec<NodeId> {
        self.layers[k][v].iter().map(|&(u, _)| self.node_ids[u]).collect()
    }
}

/// Uniform sampling without replacement of up to `fanouts[k]` neighbours per
/// node and layer. A node with degree at most the fanout keeps its whole
/// neighbourhood. Streams are keyed by `(seed, layer, node id)`.
pub fn sample_neighborhoods(graph: &ContactGraph, fanouts: &[usize], seed: u64) -> SampledNeighborhoods {
    let layers = fanouts
        .iter()
        .enumerate()
        .map(|(k, &fanout)| {
            (0..graph.len())
                .into_par_iter()
                .map(|v| {
                    let nbrs = graph.neighbors(v);
                    let strengths = graph.strengths(v);
                    let mut picks: Vec<usize> = if nbrs.len() <= fanout {
                        (0..nbrs.len()).collect()
                    } else {
                        let mut rng = seed::stream(seed, "sage-sample", &[k as u64, u64::from(graph.node_id(v).0)]);
                        rand::seq::index::sample(&mut rng, nbrs.len(), fanout).into_vec()
                    };
                    picks.sort_unstable();
                    picks.into_iter().map(|i| (nbrs[i], strengths[i])).collect()
                })
                .collect()
        })
        .collect();
    SampledNeighborhoods {
        node_ids: graph.node_ids().to_vec(),
        layers,
    }
}

/// `I(u)`: fraction of the `|V| * K` (node, layer) samples containing `u`.
pub fn aggregation_influence(neighborhoods: &SampledNeighborhoods) -> BTreeMap<NodeId, f64> {
    let n = neighborhoods.node_ids.len();
    let k = neighborhoods.depth();
    let mut counts = vec![0usize; n];
    for layer in &neighborhoods.layers {
        for sample in layer {
            for &(u, _) in sample {
                counts[u] += 1;
            }
        }
    }
    let denom = (n * k) as f64;
    neighborhoods
        .node_ids
        .iter()
        .zip(counts)
        .map(|(&id, c)| (id, if denom > 0.0 { c as f64 / denom } else { 0.0 }))
        .collect()
}

struct LayerCache {
    /// `[h_prev ; m]`, `n x 2in`.
    concat: DMatrix<f64>,
    /// Pre-activation, `n x out`.
    pre: DMatrix<f64>,
}

struct ForwardPass {
    layers: Vec<LayerCache>,
    /// Final activations before normalisation.
    hidden: DMatrix<f64>,
    output: DMatrix<f64>,
    norms: Vec<f64>,
}

fn coefficients(sample: &[(usize, f64)], config: &SageConfig) -> Vec<(usize, f64)> {
    if sample.is_empty() {
        return Vec::new();
    }
    let scaled: Vec<(usize, f64)> = sample
        .iter()
        .map(|&(u, s)| (u, if config.use_strength { s } else { 1.0 }))
        .collect();
    let denom = match (config.use_strength, config.strength_normalization) {
        (true, StrengthNormalization::Strength) => scaled.iter().map(|&(_, s)| s).sum::<f64>(),
        _ => sample.len() as f64,
    };
    if denom <= 0.0 {
        return Vec::new();
    }
    scaled.into_iter().map(|(u, s)| (u, s / denom)).collect()
}

fn check_shapes(features: &DMatrix<f64>, neighborhoods: &SampledNeighborhoods, weights: &LayerWeights) -> Result<()> {
    let n = features.nrows();
    if neighborhoods.node_ids.len() != n {
        return Err(Error::shape(
            "neighbourhood node count",
            n,
            neighborhoods.node_ids.len(),
        ));
    }
    if weights.layers.len() != neighborhoods.depth() {
        return Err(Error::shape("layer count", neighborhoods.depth(), weights.layers.len()));
    }
    let mut in_dim = features.ncols();
    for (k, w) in weights.layers.iter().enumerate() {
        if w.ncols() != 2 * in_dim {
            return Err(Error::shape(
                format!("layer {} weight columns", k + 1),
                2 * in_dim,
                w.ncols(),
            ));
        }
        if neighborhoods.layers[k].len() != n {
            return Err(Error::shape(
                format!("layer {} neighbourhoods", k + 1),
                n,
                neighborhoods.layers[k].len(),
            ));
        }
        in_dim = w.nrows();
    }
    Ok(())
}

fn run_forward(
    features: &DMatrix<f64>,
    neighborhoods: &SampledNeighborhoods,
    weights: &LayerWeights,
    config: &SageConfig,
) -> Result<ForwardPass> {
    check_shapes(features, neighborhoods, weights)?;
    let n = features.nrows();
    let mut h = features.clone();
    let mut layers = Vec::with_capacity(weights.layers.len());
    for (k, w) in weights.layers.iter().enumerate() {
        let in_dim = h.ncols();
        let mut concat = DMatrix::zeros(n, 2 * in_dim);
        concat.columns_mut(0, in_dim).copy_from(&h);
        for v in 0..n {
            for (u, c) in coefficients(&neighborhoods.layers[k][v], config) {
                for j in 0..in_dim {
                    concat[(v, in_dim + j)] += c * h[(u, j)];
                }
            }
        }
        let pre = &concat * w.transpose();
        h = pre.map(|x| x.max(0.0));
        layers.push(LayerCache { concat, pre });
    }
    let mut output = h.clone();
    let mut norms = Vec::with_capacity(n);
    for mut row in output.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
        norms.push(norm);
    }
    Ok(ForwardPass {
        layers,
        hidden: h,
        output,
        norms,
    })
}

/// Embeds every node. Rows with all-zero activations stay zero.
pub fn forward(
    features: &FeatureMatrix,
    neighborhoods: &SampledNeighborhoods,
    weights: &LayerWeights,
    config: &SageConfig,
) -> Result<EmbeddingMatrix> {
    let pass = run_forward(&features.values, neighborhoods, weights, config)?;
    EmbeddingMatrix::new(
        features.node_ids.clone(),
        pass.output,
        Generator::Graphsage,
        config.seed,
    )
}

/// Smallest `|pre-activation|` over all layers. Finite-difference checks
/// need this away from zero, where ReLU has no derivative.
pub fn preactivation_margin(
    features: &DMatrix<f64>,
    neighborhoods: &SampledNeighborhoods,
    weights: &LayerWeights,
    config: &SageConfig,
) -> Result<f64> {
    let pass = run_forward(features, neighborhoods, weights, config)?;
    Ok(pass
        .layers
        .iter()
        .flat_map(|l| l.pre.iter())
        .fold(f64::INFINITY, |m, z| m.min(z.abs())))
}

/// Positive pairs with their negative samples, as node rows.
#[derive(Clone, Debug, PartialEq)]
pub struct UnsupervisedBatch {
    pub pairs: Vec<(usize, usize)>,
    pub negatives: Vec<Vec<usize>>,
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn row_dot(m: &DMatrix<f64>, a: usize, b: usize) -> f64 {
    m.row(a).dot(&m.row(b))
}

fn add_scaled_row(target: &mut DMatrix<f64>, row: usize, c: f64, src: &DMatrix<f64>, src_row: usize) {
    for j in 0..src.ncols() {
        target[(row, j)] += c * src[(src_row, j)];
    }
}

/// Mean over pairs of `-log s(z_u.z_v) - sum_n log s(-z_u.z_n)` on the
/// normalised output rows, plus its gradient `dL/dZ`.
fn output_loss(out: &DMatrix<f64>, batch: &UnsupervisedBatch, with_grad: bool) -> (f64, DMatrix<f64>) {
    let b = batch.pairs.len().max(1) as f64;
    let mut loss = 0.0;
    let mut grad = DMatrix::zeros(if with_grad { out.nrows() } else { 0 }, out.ncols());
    for (&(u, v), negs) in batch.pairs.iter().zip(&batch.negatives) {
        let f = row_dot(out, u, v);
        loss -= log_sigmoid(f);
        if with_grad {
            let c = (sigmoid(f) - 1.0) / b;
            add_scaled_row(&mut grad, u, c, out, v);
            add_scaled_row(&mut grad, v, c, out, u);
        }
        for &n in negs {
            let f = row_dot(out, u, n);
            loss -= log_sigmoid(-f);
            if with_grad {
                let c = sigmoid(f) / b;
                add_scaled_row(&mut grad, u, c, out, n);
                add_scaled_row(&mut grad, n, c, out, u);
            }
        }
    }
    (loss / b, grad)
}

pub fn batch_loss(
    features: &DMatrix<f64>,
    neighborhoods: &SampledNeighborhoods,
    weights: &LayerWeights,
    config: &SageConfig,
    batch: &UnsupervisedBatch,
) -> Result<f64> {
    let pass = run_forward(features, neighborhoods, weights, config)?;
    Ok(output_loss(&pass.output, batch, false).0)
}

/// Loss and `dL/dW_k` for every layer, by backpropagation.
pub fn batch_loss_and_gradient(
    features: &DMatrix<f64>,
    neighborhoods: &SampledNeighborhoods,
    weights: &LayerWeights,
    config: &SageConfig,
    batch: &UnsupervisedBatch,
) -> Result<(f64, Vec<DMatrix<f64>>)> {
    let pass = run_forward(features, neighborhoods, weights, config)?;
    let (loss, d_out) = output_loss(&pass.output, batch, true);

    // Through the row normalisation y = h / |h|.
    let mut d_h = DMatrix::zeros(pass.hidden.nrows(), pass.hidden.ncols());
    for r in 0..d_h.nrows() {
        let norm = pass.norms[r];
        if norm > 0.0 {
            let y = pass.output.row(r);
            let g = d_out.row(r);
            let proj = y.dot(&g);
            d_h.row_mut(r).copy_from(&((g - y * proj) / norm));
        }
    }

    let mut grads = vec![DMatrix::zeros(0, 0); weights.layers.len()];
    for k in (0..weights.layers.len()).rev() {
        let cache = &pass.layers[k];
        let d_pre = d_h.zip_map(&cache.pre, |g, z| if z > 0.0 { g } else { 0.0 });
        grads[k] = d_pre.transpose() * &cache.concat;
        if k == 0 {
            break;
        }
        let d_concat = &d_pre * &weights.layers[k];
        let in_dim = d_concat.ncols() / 2;
        let mut d_prev = d_concat.columns(0, in_dim).clone_owned();
        for v in 0..d_prev.nrows() {
            for (u, c) in coefficients(&neighborhoods.layers[k][v], config) {
                for j in 0..in_dim {
                    d_prev[(u, j)] += c * d_concat[(v, in_dim + j)];
                }
            }
        }
        d_h = d_prev;
    }
    Ok((loss, grads))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SageTrainingTrace {
    pub epoch_losses: Vec<f64>,
    pub positive_pairs: usize,
}

struct Adam {
    m: Vec<DMatrix<f64>>,
    v: Vec<DMatrix<f64>>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(weights: &LayerWeights) -> Self {
        let zeros: Vec<_> = weights
            .layers
            .iter()
            .map(|w| DMatrix::zeros(w.nrows(), w.ncols()))
            .collect();
        Self {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    fn step(&mut self, weights: &mut LayerWeights, grads: &[DMatrix<f64>], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for (k, g) in grads.iter().enumerate() {
            self.m[k] = &self.m[k] * Self::BETA1 + g * (1.0 - Self::BETA1);
            self.v[k] = &self.v[k] * Self::BETA2 + g.map(|x| x * x) * (1.0 - Self::BETA2);
            let update = self.m[k].zip_map(&self.v[k], |m, v| lr * (m / c1) / ((v / c2).sqrt() + Self::EPS));
            weights.layers[k] -= update;
        }
    }
}

/// Positive pairs: nodes within `context_window` steps on short walks.
fn positive_pairs(graph: &ContactGraph, config: &SageConfig) -> Result<Vec<(usize, usize)>> {
    let walks = generate_walks(
        graph,
        &WalkConfig {
            num_walks_per_node: config.walks_per_node,
            walk_length: config.walk_length,
            p: 1.0,
            q: 1.0,
            use_strength: config.use_strength,
            seed: seed::derive_seed(config.seed, &[seed::label("sage-walks")]),
        },
    )?;
    let mut pairs = Vec::new();
    for w in &walks.walks {
        let rows: Vec<usize> = w
            .iter()
            .map(|&id| graph.index_of(id).expect("walk stays in graph"))
            .collect();
        for i in 0..rows.len() {
            for j in i + 1..rows.len().min(i + config.context_window + 1) {
                if rows[i] != rows[j] {
                    pairs.push((rows[i], rows[j]));
                }
            }
        }
    }
    Ok(pairs)
}

/// Trains layer weights with the unsupervised graph loss and Adam.
///
/// Returns the trained weights and the neighbourhoods they were trained on;
/// embeddings should be produced with those same neighbourhoods.
pub fn train_unsupervised(
    graph: &ContactGraph,
    features: &FeatureMatrix,
    config: &SageConfig,
) -> Result<(LayerWeights, SampledNeighborhoods, SageTrainingTrace)> {
    config.validate()?;
    if graph.len() < 2 {
        return Err(Error::Config("GraphSAGE training needs at least two nodes".into()));
    }
    if features.node_ids != graph.node_ids() {
        return Err(Error::shape("feature rows", graph.len(), features.node_ids.len()));
    }
    let neighborhoods = sample_neighborhoods(graph, &config.fanouts, config.seed);
    let mut weights = LayerWeights::init(features.values.ncols(), config);
    let mut pairs = positive_pairs(graph, config)?;
    let mut trace = SageTrainingTrace {
        epoch_losses: Vec::new(),
        positive_pairs: pairs.len(),
    };
    if pairs.is_empty() || config.epochs == 0 {
        return Ok((weights, neighborhoods, trace));
    }

    let sampler = WeightedIndex::new((0..graph.len()).map(|v| (graph.degree(v) as f64).powf(0.75)))
        .map_err(|e| Error::Config(format!("negative sampling table: {e}")))?;
    let mut adam = Adam::new(&weights);
    for epoch in 0..config.epochs {
        let mut rng = seed::stream(config.seed, "sage-train", &[epoch as u64]);
        pairs.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0;
        for chunk in pairs.chunks(config.batch_size) {
            let negatives = chunk
                .iter()
                .map(|_| (0..config.negative_samples).map(|_| sampler.sample(&mut rng)).collect())
                .collect();
            let batch = UnsupervisedBatch {
                pairs: chunk.to_vec(),
                negatives,
            };
            let (loss, grads) = batch_loss_and_gradient(&features.values, &neighborhoods, &weights, config, &batch)?;
            adam.step(&mut weights, &grads, config.learning_rate);
            total += loss;
            batches += 1;
        }
        trace.epoch_losses.push(total / batches as f64);
    }
    Ok((weights, neighborhoods, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Provenance;

    fn cfg() -> SageConfig {
        SageConfig::default()
    }

    #[test]
    fn identical_nodes_give_zero_features() {
        let mut g = KnowledgeGraph::new();
        let a = g.add_person("a");
        let b = g.add_person("b");
        g.add_contact(a, b, 20, Provenance::Direct).unwrap();
        g.compute_node_properties();
        let f = build_features(&g);
        assert!(f.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn degree_column_is_zscored() {
        let mut g = KnowledgeGraph::new();
        let hub = g.add_person("hub");
        let iso = g.add_person("iso");
        let x = g.add_person("x");
        let y = g.add_person("y");
        g.add_contact(hub, x, 20, Provenance::Direct).unwrap();
        g.add_contact(hub, y, 20, Provenance::Direct).unwrap();
        g.compute_node_properties();
        let raw = raw_features(&g);
        assert_eq!(raw.values.row(1).iter().copied().collect::<Vec<_>>(), vec![0.0; 4]);
        // Two-node oracle: degrees {0, 2} -> {-1, +1}.
        let mut two = DMatrix::from_row_slice(2, 1, &[0.0, 2.0]);
        zscore_columns(&mut two);
        assert_eq!(two.as_slice(), &[-1.0, 1.0]);
        let _ = iso;
    }

    #[test]
    fn exhaustive_and_bounded_sampling() {
        let star: Vec<(usize, usize)> = (1..=100).map(|i| (0, i)).collect();
        let g = ContactGraph::unweighted(101, &star);
        let s = sample_neighborhoods(&g, &[10, 200], 5);
        assert_eq!(s.layers[0][0].len(), 10);
        let mut ids: Vec<usize> = s.layers[0][0].iter().map(|&(u, _)| u).collect();
        ids.dedup();
        assert_eq!(ids.len(), 10);
        assert_eq!(s.layers[1][0].len(), 100);
        assert_eq!(s, sample_neighborhoods(&g, &[10, 200], 5));

        let small = ContactGraph::unweighted(4, &[(0, 1), (0, 2), (0, 3)]);
        let s = sample_neighborhoods(&small, &[10], 1);
        assert_eq!(s.members(0, 0), vec![NodeId(1), NodeId(2), NodeId(3)]);
    }

    #[test]
    fn mean_aggregation_by_hand() {
        // Node 0 with neighbours 1 ([1,0]) and 2 ([0,1]); W passes the mean through.
        let g = ContactGraph::unweighted(3, &[(0, 1), (0, 2)]);
        let features = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let s = sample_neighborhoods(&g, &[5], 0);
        let mut w = DMatrix::zeros(2, 4);
        w[(0, 2)] = 1.0;
        w[(1, 3)] = 1.0;
        let weights = LayerWeights { layers: vec![w] };
        let config = SageConfig {
            fanouts: vec![5],
            dimensions: 2,
            ..cfg()
        };
        let pass = run_forward(&features, &s, &weights, &config).unwrap();
        assert_eq!(pass.hidden.row(0).iter().copied().collect::<Vec<_>>(), vec![0.5, 0.5]);
        let half = 0.5f64.sqrt();
        assert!((pass.output[(0, 0)] - half).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch_names_layer() {
        let g = ContactGraph::unweighted(2, &[(0, 1)]);
        let s = sample_neighborhoods(&g, &[5, 5], 0);
        let features = FeatureMatrix {
            node_ids: g.node_ids().to_vec(),
            names: vec!["a".into()],
            values: DMatrix::zeros(2, 1),
        };
        let weights = LayerWeights {
            layers: vec![DMatrix::zeros(3, 2), DMatrix::zeros(3, 5)],
        };
        let err = forward(&features, &s, &weights, &cfg()).unwrap_err();
        assert!(err.to_string().contains("layer 2"), "{err}");
    }

    #[test]
    fn isolated_node_embeds_from_self() {
        let g = ContactGraph::unweighted(3, &[(0, 1)]);
        let s = sample_neighborhoods(&g, &[5], 0);
        assert!(s.layers[0][2].is_empty());
        let features = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        let weights = LayerWeights {
            layers: vec![DMatrix::from_row_slice(1, 2, &[1.0, 1.0])],
        };
        let config = SageConfig {
            fanouts: vec![5],
            dimensions: 1,
            ..cfg()
        };
        let pass = run_forward(&features, &s, &weights, &config).unwrap();
        assert_eq!(pass.hidden[(2, 0)], 3.0);
        assert_eq!(pass.output[(2, 0)], 1.0);
    }

    #[test]
    fn strength_average_mode() {
        let g = ContactGraph::from_edges(3, &[(0, 1, 1.0, 0.25), (0, 2, 1.0, 0.75)]);
        let s = sample_neighborhoods(&g, &[5], 0);
        let count = SageConfig {
            use_strength: true,
            ..cfg()
        };
        let avg = SageConfig {
            strength_normalization: StrengthNormalization::Strength,
            ..count.clone()
        };
        assert_eq!(coefficients(&s.layers[0][0], &count), vec![(1, 0.125), (2, 0.375)]);
        assert_eq!(coefficients(&s.layers[0][0], &avg), vec![(1, 0.25), (2, 0.75)]);
        assert_eq!(coefficients(&s.layers[0][0], &cfg()), vec![(1, 0.5), (2, 0.5)]);
    }

    #[test]
    fn influence_of_star_center() {
        let n = 6;
        let star: Vec<(usize, usize)> = (1..=n).map(|i| (0, i)).collect();
        let g = ContactGraph::unweighted(n + 1, &star);
        let s = sample_neighborhoods(&g, &[100], 0);
        let infl = aggregation_influence(&s);
        assert!((infl[&NodeId(0)] - n as f64 / (n + 1) as f64).abs() < 1e-15);
        let g = ContactGraph::unweighted(3, &[(0, 1)]);
        let infl = aggregation_influence(&sample_neighborhoods(&g, &[3, 3], 0));
        assert_eq!(infl[&NodeId(2)], 0.0);
    }

    #[test]
    fn zero_epochs_returns_initialisation() {
        let g = ContactGraph::unweighted(4, &[(0, 1), (1, 2), (2, 3)]);
        let features = FeatureMatrix {
            node_ids: g.node_ids().to_vec(),
            names: vec!["x".into()],
            values: DMatrix::from_row_slice(4, 1, &[1.0, -1.0, 0.5, 0.0]),
        };
        let config = SageConfig {
            epochs: 0,
            dimensions: 4,
            ..cfg()
        };
        let (w, _, trace) = train_unsupervised(&g, &features, &config).unwrap();
        assert_eq!(w, LayerWeights::init(1, &config));
        assert!(trace.epoch_losses.is_empty());
    }

    #[test]
    fn training_is_deterministic() {
        let g = ContactGraph::unweighted(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]);
        let features = FeatureMatrix {
            node_ids: g.node_ids().to_vec(),
            names: vec!["x".into(), "y".into()],
            values: DMatrix::from_fn(6, 2, |r, c| ((r * 3 + c) % 5) as f64 - 2.0),
        };
        let config = SageConfig {
            epochs: 3,
            dimensions: 4,
            seed: 9,
            ..cfg()
        };
        let a = train_unsupervised(&g, &features, &config).unwrap();
        let b = train_unsupervised(&g, &features, &config).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.2, b.2);
    }

    #[test]
    fn weights_and_features_round_trip() {
        let config = SageConfig {
            dimensions: 3,
            seed: 4,
            ..cfg()
        };
        let w = LayerWeights::init(4, &config);
        let mut buf = Vec::new();
        w.write(&mut buf).unwrap();
        assert_eq!(LayerWeights::read(buf.as_slice()).unwrap(), w);

        let f = FeatureMatrix {
            node_ids: vec![NodeId(0), NodeId(2)],
            names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            values: DMatrix::from_row_slice(2, 4, &[0.1, 0.2, 0.3, 0.4, -1.0, 1.0, 0.0, 2.5]),
        };
        let mut buf = Vec::new();
        f.write(&mut buf).unwrap();
        assert_eq!(FeatureMatrix::read(buf.as_slice()).unwrap(), f);
    }
}
