//! Second-order biased random walks and skip-gram training with negative
//! sampling.
//!
//! The unnormalised score of stepping from `current` to neighbour `x`, having
//! arrived from `prev`, is `alpha(prev, x) * w(current, x) * S(current, x)`,
//! where `w` is the pair's cumulative contact time, `S` its strength (only
//! when strength weighting is on) and `alpha` is `1/p` for a return to
//! `prev`, `1` for a neighbour of `prev` and `1/q` otherwise.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contact::ContactGraph;
use crate::embedding::{EmbeddingMatrix, Generator};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkConfig {
    pub num_walks_per_node: usize,
    pub walk_length: usize,
    /// Return parameter.
    pub p: f64,
    /// In-out parameter.
    pub q: f64,
    pub use_strength: bool,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            num_walks_per_node: 10,
            walk_length: 80,
            p: 1.0,
            q: 1.0,
            use_strength: false,
            seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_walks_per_node == 0 || self.walk_length == 0 {
            return Err(Error::Config("walk counts must be at least 1".into()));
        }
        if !(self.p > 0.0 && self.q > 0.0 && self.p.is_finite() && self.q.is_finite()) {
            return Err(Error::Config("p and q must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkCorpus {
    pub walks: Vec<Vec<NodeId>>,
    pub config: WalkConfig,
}

impl WalkCorpus {
    /// One walk per line, space-separated node ids.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        for walk in &self.walks {
            let ids: Vec<String> = walk.iter().map(NodeId::to_string).collect();
            writeln!(out, "{}", ids.join(" "))?;
        }
        Ok(())
    }
}

fn bias(graph: &ContactGraph, prev: Option<usize>, x: usize, config: &WalkConfig) -> f64 {
    match prev {
        None => 1.0,
        Some(t) if t == x => 1.0 / config.p,
        Some(t) if graph.has_edge(t, x) => 1.0,
        Some(_) => 1.0 / config.q,
    }
}

fn scores(graph: &ContactGraph, prev: Option<usize>, current: usize, config: &WalkConfig) -> Vec<f64> {
    let neighbors = graph.neighbors(current);
    let weights = graph.weights(current);
    let strengths = graph.strengths(current);
    (0..neighbors.len())
        .map(|k| {
            let s = if config.use_strength { strengths[k] } else { 1.0 };
            bias(graph, prev, neighbors[k], config) * weights[k] * s
        })
        .collect()
}

/// Probability of stepping to each neighbour of `current` (aligned with
/// `graph.neighbors(current)`). Empty when the walk cannot continue.
pub fn transition_distribution(
    graph: &ContactGraph,
    prev: Option<usize>,
    current: usize,
    config: &WalkConfig,
) -> Vec<f64> {
    let raw = scores(graph, prev, current, config);
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Vec::new();
    }
    raw.into_iter().map(|s| s / total).collect()
}

fn walk_from<R: Rng>(graph: &ContactGraph, start: usize, config: &WalkConfig, rng: &mut R) -> Vec<NodeId> {
    let mut walk = vec![graph.node_id(start)];
    let mut prev = None;
    let mut current = start;
    while walk.len() < config.walk_length {
        let raw = scores(graph, prev, current, config);
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            break;
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = raw.len() - 1;
        for (k, s) in raw.iter().enumerate() {
            acc += s;
            if target < acc && *s > 0.0 {
                pick = k;
                break;
            }
        }
        let next = graph.neighbors(current)[pick];
        walk.push(graph.node_id(next));
        prev = Some(current);
        current = next;
    }
    walk
}

/// `num_walks_per_node` rounds, each starting one walk at every node in
/// ascending order. Each walk draws from its own stream keyed by
/// `(seed, node id, round)`, so thread count does not affect the corpus.
pub fn generate_walks(graph: &ContactGraph, config: &WalkConfig) -> Result<WalkCorpus> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> = (0..config.num_walks_per_node)
        .flat_map(|round| (0..graph.len()).map(move |v| (round, v)))
        .collect();
    let walks = jobs
        .par_iter()
        .map(|&(round, v)| {
            let mut rng = seed::stream(config.seed, "walk", &[u64::from(graph.node_id(v).0), round as u64]);
            walk_from(graph, v, config, &mut rng)
        })
        .collect();
    Ok(WalkCorpus {
        walks,
        config: config.clone(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct VisitProbabilities {
    pub counts: BTreeMap<NodeId, usize>,
    /// `k * T`: number of walks times configured walk length.
    pub denominator: usize,
}

impl VisitProbabilities {
    pub fn probability(&self, u: NodeId) -> f64 {
        self.counts.get(&u).map_or(0.0, |&c| c as f64 / self.denominator as f64)
    }

    pub fn total(&self) -> f64 {
        self.counts.values().sum::<usize>() as f64 / self.denominator as f64
    }
}

/// Fraction of the `k * T` walk slots landing on each node.
pub fn visit_probability(corpus: &WalkCorpus) -> Result<VisitProbabilities> {
    if corpus.walks.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut counts = BTreeMap::new();
    for &u in corpus.walks.iter().flatten() {
        *counts.entry(u).or_insert(0) += 1;
    }
    Ok(VisitProbabilities {
        counts,
        denominator: corpus.walks.len() * corpus.config.walk_length,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkipGramConfig {
    pub dimensions: usize,
    pub window: usize,
    pub negative_samples: usize,
    pub epochs: usize,
    /// Initial step size, decayed linearly towards `1e-4` of itself.
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        Self {
            dimensions: 16,
            window: 10,
            negative_samples: 5,
            epochs: 5,
            learning_rate: 0.025,
            seed: 0,
        }
    }
}

impl SkipGramConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dimensions == 0 {
            return Err(Error::Config("dimensions must be at least 1".into()));
        }
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
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

/// `log(sigmoid(x))` without overflow.
fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `-log sigmoid(c.o) - sum_n log sigmoid(-c.n)`.
pub fn pair_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    -log_sigmoid(dot(center, context)) - negatives.iter().map(|n| log_sigmoid(-dot(center, n))).sum::<f64>()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairGradient {
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Analytic gradient of [`pair_loss`] with respect to every input vector.
pub fn pair_loss_gradient(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> PairGradient {
    let d = center.len();
    let mut g_center = vec![0.0; d];
    let pos = sigmoid(dot(center, context)) - 1.0;
    let g_context: Vec<f64> = center.iter().map(|c| pos * c).collect();
    for k in 0..d {
        g_center[k] += pos * context[k];
    }
    let mut g_negs = Vec::with_capacity(negatives.len());
    for n in negatives {
        let s = sigmoid(dot(center, n));
        for k in 0..d {
            g_center[k] += s * n[k];
        }
        g_negs.push(center.iter().map(|c| s * c).collect());
    }
    PairGradient {
        center: g_center,
        context: g_context,
        negatives: g_negs,
    }
}

/// One descent step on the pair loss for `(center, context)` and `negatives`
/// (row indices into `input` / `output`). Gradients are taken at the
/// pre-update point. Returns the pre-update loss.
pub(crate) fn sgd_pair_update(
    input: &mut [f64],
    output: &mut [f64],
    d: usize,
    (c, o): (usize, usize),
    negatives: &[usize],
    lr: f64,
    g_center: &mut [f64],
) -> f64 {
    g_center.iter_mut().for_each(|x| *x = 0.0);
    let center = &input[c * d..(c + 1) * d];
    let mut loss = 0.0;
    let mut coefs = Vec::with_capacity(negatives.len() + 1);
    let f = dot(center, &output[o * d..(o + 1) * d]);
    loss -= log_sigmoid(f);
    coefs.push((o, sigmoid(f) - 1.0));
    for &t in negatives {
        let f = dot(center, &output[t * d..(t + 1) * d]);
        loss -= log_sigmoid(-f);
        coefs.push((t, sigmoid(f)));
    }
    for &(t, coef) in &coefs {
        let out_t = &output[t * d..(t + 1) * d];
        for k in 0..d {
            g_center[k] += coef * out_t[k];
        }
    }
    for &(t, coef) in &coefs {
        for k in 0..d {
            output[t * d + k] -= lr * coef * input[c * d + k];
        }
    }
    for k in 0..d {
        input[c * d + k] -= lr * g_center[k];
    }
    loss
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TrainingTrace {
    /// Mean pair loss per epoch, measured before each pair's update.
    pub epoch_losses: Vec<f64>,
    pub pairs_per_epoch: usize,
}

/// Trains skip-gram embeddings for `node_ids` from a walk corpus.
///
/// Input vectors start uniform in `[-0.5/d, 0.5/d)` from a stream keyed by
/// node id, output vectors at zero. Nodes absent from the corpus keep their
/// initial vector. Training is single-threaded and bit-deterministic.
pub fn train_skipgram(
    corpus: &WalkCorpus,
    node_ids: &[NodeId],
    config: &SkipGramConfig,
) -> Result<(EmbeddingMatrix, TrainingTrace)> {
    config.validate()?;
    if corpus.walks.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let d = config.dimensions;
    let n = node_ids.len();
    let row: BTreeMap<NodeId, usize> = node_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let walks: Vec<Vec<usize>> = corpus
        .walks
        .iter()
        .map(|w| {
            w.iter()
                .map(|id| row.get(id).copied().ok_or(Error::NodeNotFound(*id)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut input = vec![0.0; n * d];
    for (i, id) in node_ids.iter().enumerate() {
        let mut rng = seed::stream(config.seed, "skipgram-init", &[u64::from(id.0)]);
        for x in &mut input[i * d..(i + 1) * d] {
            *x = (rng.random::<f64>() - 0.5) / d as f64;
        }
    }
    let mut output = vec![0.0; n * d];

    let mut freq = vec![0usize; n];
    for &v in walks.iter().flatten() {
        freq[v] += 1;
    }
    let pairs: Vec<(usize, usize)> = walks
        .iter()
        .flat_map(|w| {
            (0..w.len()).flat_map(move |i| {
                let lo = i.saturating_sub(config.window);
                let hi = (i + config.window).min(w.len() - 1);
                (lo..=hi).filter(move |&j| j != i).map(move |j| (w[i], w[j]))
            })
        })
        .collect();

    let mut trace = TrainingTrace {
        epoch_losses: Vec::new(),
        pairs_per_epoch: pairs.len(),
    };
    if pairs.is_empty() {
        let values = DMatrix::from_row_slice(n, d, &input);
        return Ok((
            EmbeddingMatrix::new(node_ids.to_vec(), values, Generator::Node2vec, config.seed)?,
            trace,
        ));
    }

    let sampler = WeightedIndex::new(freq.iter().map(|&f| (f as f64).powf(0.75)))
        .map_err(|e| Error::Config(format!("negative sampling table: {e}")))?;
    let mut rng = seed::stream(config.seed, "skipgram-train", &[]);
    let total_steps = (config.epochs * pairs.len()) as f64;
    let mut step = 0usize;
    let mut negs = Vec::with_capacity(config.negative_samples);
    let mut g_center = vec![0.0; d];

    for _ in 0..config.epochs {
        let mut loss = 0.0;
        for &(c, o) in &pairs {
            let lr = config.learning_rate * (1.0 - step as f64 / total_steps).max(1e-4);
            step += 1;
            negs.clear();
            for _ in 0..config.negative_samples {
                let t = sampler.sample(&mut rng);
                if t != o {
                    negs.push(t);
                }
            }
            loss += sgd_pair_update(&mut input, &mut output, d, (c, o), &negs, lr, &mut g_center);
        }
        trace.epoch_losses.push(loss / pairs.len() as f64);
    }

    let values = DMatrix::from_row_slice(n, d, &input);
    Ok((
        EmbeddingMatrix::new(node_ids.to_vec(), values, Generator::Node2vec, config.seed)?,
        trace,
    ))
}
