use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kcgml_core::kc::{Aggregator, StrengthForm};
use kcgml_core::synthetic::SyntheticConfig;

use crate::config::{EmbedderChoice, PipelineConfig};

#[derive(Debug, Parser)]
#[command(
    name = "kcgml",
    version,
    about = "Knowledge-completion pipeline for temporal contact graphs"
)]
pub struct Cli {
    /// Global seed; every stage seed is derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Run directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// TOML config file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Reuse the config recorded in a run manifest; flags override it.
    #[arg(long, global = true, conflicts_with = "config")]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Parse contact and metadata files (or generate a synthetic set) into KG_raw.
    Ingest(InputArgs),
    /// Infer co-presence contacts, set strengths and run contagion: KG_raw -> KG_KC.
    Complete(CompleteArgs),
    /// Train Node2Vec and/or GraphSAGE embeddings.
    Embed(EmbedCommand),
    /// PageRank comparison, embedding drift and 2-D projections.
    Analyze(AnalyzeArgs),
    /// All stages in order.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Default, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub contacts: Option<PathBuf>,
    #[arg(long)]
    pub metadata: Option<PathBuf>,
    /// Generate an office-like synthetic dataset instead of reading files.
    #[arg(long, conflicts_with_all = ["contacts", "metadata"])]
    pub synthetic: bool,
    #[arg(long)]
    pub n_people: Option<usize>,
    #[arg(long)]
    pub n_departments: Option<usize>,
    #[arg(long)]
    pub n_timestamps: Option<usize>,
    #[arg(long)]
    pub event_rate: Option<f64>,
    #[arg(long)]
    pub target_pairs: Option<usize>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum AggregatorArg {
    NoisyOr,
    Max,
    Avg,
    Sum,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum FormArg {
    Subtractive,
    Multiplicative,
}

#[derive(Debug, Default, Args)]
pub struct CompleteArgs {
    /// Propagation threshold.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Transmissibility per second of contact.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_enum)]
    pub aggregator: Option<AggregatorArg>,
    #[arg(long, value_enum)]
    pub strength_form: Option<FormArg>,
    #[arg(long)]
    pub max_hops: Option<usize>,
    /// Number of top-PageRank people used as contagion seeds.
    #[arg(long)]
    pub seed_k: Option<usize>,
    #[arg(long)]
    pub no_contagion: bool,
}

#[derive(Debug, Default, Args)]
pub struct EmbedArgs {
    #[arg(long, value_enum)]
    pub embedder: Option<EmbedderChoice>,
    /// Embedding dimensions for both embedders.
    #[arg(long)]
    pub dims: Option<usize>,
    /// Walks per node.
    #[arg(long)]
    pub walks: Option<usize>,
    /// Walk length.
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub negative: Option<usize>,
    /// Skip-gram epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Per-layer GraphSAGE sample sizes, e.g. 25,10.
    #[arg(long, value_delimiter = ',')]
    pub fanouts: Option<Vec<usize>>,
    #[arg(long)]
    pub sage_epochs: Option<usize>,
    /// Weight walks and aggregation by contact strength.
    #[arg(long)]
    pub strength_weighting: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Raw,
    Kc,
    Both,
}

#[derive(Debug, Args)]
pub struct EmbedCommand {
    #[command(flatten)]
    pub embed: EmbedArgs,
    /// Which graph to embed (default: raw, plus KC when its archive exists).
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
}

#[derive(Debug, Default, Args)]
pub struct AnalyzeArgs {
    /// Rows in the PageRank comparison.
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Rotate Node2Vec KC embeddings onto the raw ones before drift.
    #[arg(long)]
    pub align: bool,
    /// Analyse the raw graph only.
    #[arg(long)]
    pub no_kc: bool,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub complete: CompleteArgs,
    #[command(flatten)]
    pub embed: EmbedArgs,
    #[command(flatten)]
    pub analyze: AnalyzeArgs,
}

impl InputArgs {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        if self.contacts.is_some() || self.metadata.is_some() {
            cfg.input.contacts = self.contacts.clone().or(cfg.input.contacts.take());
            cfg.input.metadata = self.metadata.clone().or(cfg.input.metadata.take());
            cfg.input.synthetic = None;
        }
        if self.synthetic {
            cfg.input.contacts = None;
            cfg.input.metadata = None;
            cfg.input.synthetic.get_or_insert_with(SyntheticConfig::default);
        }
        if let Some(s) = cfg.input.synthetic.as_mut() {
            if let Some(v) = self.n_people {
                s.n_people = v;
            }
            if let Some(v) = self.n_departments {
                s.n_departments = v;
            }
            if let Some(v) = self.n_timestamps {
                s.n_timestamps = v;
            }
            if let Some(v) = self.event_rate {
                s.event_rate = v;
            }
            if self.target_pairs.is_some() {
                s.target_pairs = self.target_pairs;
            }
        }
    }
}

impl CompleteArgs {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        let m = &mut cfg.strength;
        if let Some(v) = self.tau {
            m.tau = v;
        }
        if let Some(v) = self.beta {
            m.beta = v;
        }
        if let Some(a) = self.aggregator {
            m.aggregator = match a {
                AggregatorArg::NoisyOr => Aggregator::NoisyOr,
                AggregatorArg::Max => Aggregator::Max,
                AggregatorArg::Avg => Aggregator::Avg,
                AggregatorArg::Sum => Aggregator::Sum,
            };
        }
        if let Some(f) = self.strength_form {
            m.form = match f {
                FormArg::Subtractive => StrengthForm::Subtractive,
                FormArg::Multiplicative => StrengthForm::Multiplicative,
            };
        }
        if let Some(v) = self.max_hops {
            m.max_hops = v;
        }
        if let Some(v) = self.seed_k {
            cfg.analysis.seed_k = v;
        }
        if self.no_contagion {
            cfg.analysis.contagion = false;
        }
    }
}

impl EmbedArgs {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(e) = self.embedder {
            cfg.embedder = e;
        }
        if let Some(d) = self.dims {
            cfg.skipgram.dimensions = d;
            cfg.graphsage.dimensions = d;
        }
        if let Some(v) = self.walks {
            cfg.walks.num_walks_per_node = v;
        }
        if let Some(v) = self.length {
            cfg.walks.walk_length = v;
        }
        if let Some(v) = self.window {
            cfg.skipgram.window = v;
        }
        if let Some(v) = self.p {
            cfg.walks.p = v;
        }
        if let Some(v) = self.q {
            cfg.walks.q = v;
        }
        if let Some(v) = self.negative {
            cfg.skipgram.negative_samples = v;
            cfg.graphsage.negative_samples = v;
        }
        if let Some(v) = self.epochs {
            cfg.skipgram.epochs = v;
        }
        if let Some(v) = &self.fanouts {
            cfg.graphsage.fanouts = v.clone();
        }
        if let Some(v) = self.sage_epochs {
            cfg.graphsage.epochs = v;
        }
        if self.strength_weighting {
            cfg.enable_strength_weighting = true;
        }
    }
}

impl AnalyzeArgs {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(k) = self.top_k {
            cfg.analysis.top_k = k;
        }
        if self.align {
            cfg.analysis.align_node2vec = true;
        }
        if self.no_kc {
            cfg.enable_kc = false;
        }
    }
}
