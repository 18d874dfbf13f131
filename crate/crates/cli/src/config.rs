use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use kcgml_core::analytics::PageRankConfig;
use kcgml_core::graphsage::SageConfig;
use kcgml_core::kc::StrengthModel;
use kcgml_core::node2vec::{SkipGramConfig, WalkConfig};
use kcgml_core::seed;
use kcgml_core::synthetic::SyntheticConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EmbedderChoice {
    Node2vec,
    Graphsage,
    #[default]
    Both,
}

impl EmbedderChoice {
    pub fn node2vec(self) -> bool {
        matches!(self, EmbedderChoice::Node2vec | EmbedderChoice::Both)
    }

    pub fn graphsage(self) -> bool {
        matches!(self, EmbedderChoice::Graphsage | EmbedderChoice::Both)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InputConfig {
    pub contacts: Option<PathBuf>,
    pub metadata: Option<PathBuf>,
    /// Generate a synthetic dataset instead of reading files.
    pub synthetic: Option<SyntheticConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    /// Rows in the PageRank comparison table.
    pub top_k: usize,
    /// Highest-PageRank people used as contagion seeds.
    pub seed_k: usize,
    pub contagion: bool,
    /// Rotate Node2Vec KC embeddings onto the raw ones before measuring drift.
    pub align_node2vec: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            top_k: 10,
            seed_k: 5,
            contagion: true,
            align_node2vec: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub enable_kc: bool,
    pub enable_strength_weighting: bool,
    pub embedder: EmbedderChoice,
    pub input: InputConfig,
    pub strength: StrengthModel,
    pub walks: WalkConfig,
    pub skipgram: SkipGramConfig,
    pub graphsage: SageConfig,
    pub pagerank: PageRankConfig,
    pub analysis: AnalysisConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            out: PathBuf::from("run"),
            enable_kc: true,
            enable_strength_weighting: false,
            embedder: EmbedderChoice::Both,
            input: InputConfig::default(),
            strength: StrengthModel::default(),
            walks: WalkConfig::default(),
            skipgram: SkipGramConfig::default(),
            graphsage: SageConfig::default(),
            pagerank: PageRankConfig::default(),
            analysis: AnalysisConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))
    }

    /// Checks everything except the input source.
    pub fn validate(&self) -> CliResult<()> {
        let err = |e: kcgml_core::Error| CliError::config("config", e.to_string());
        self.strength.validate().map_err(err)?;
        self.walks.validate().map_err(err)?;
        self.skipgram.validate().map_err(err)?;
        self.graphsage.validate().map_err(err)?;
        self.pagerank.validate().map_err(err)?;
        if let Some(s) = &self.input.synthetic {
            s.validate().map_err(err)?;
        }
        if self.analysis.top_k == 0 {
            return Err(CliError::config("config", "top_k must be at least 1"));
        }
        Ok(())
    }

    pub fn validate_input(&self) -> CliResult<()> {
        let files = self.input.contacts.is_some() || self.input.metadata.is_some();
        match (files, self.input.synthetic.is_some()) {
            (true, true) => Err(CliError::config(
                "config",
                "give either input files or --synthetic, not both",
            )),
            (false, false) => Err(CliError::config(
                "config",
                "no input: give --contacts/--metadata or --synthetic",
            )),
            (true, false) if self.input.contacts.is_none() || self.input.metadata.is_none() => Err(CliError::config(
                "config",
                "both --contacts and --metadata are required",
            )),
            _ => Ok(()),
        }
    }

    /// Stage configs with seeds derived from the global seed. Raw and KC runs
    /// use the same seeds so their embeddings are directly comparable.
    pub fn seeded(&self) -> SeededStages {
        let derive = |name: &str| seed::derive_seed(self.seed, &[seed::label(name)]);
        SeededStages {
            synthetic: self
                .input
                .synthetic
                .clone()
                .map(|s| SyntheticConfig { seed: self.seed, ..s }),
            walks: WalkConfig {
                seed: derive("node2vec-walks"),
                use_strength: self.walks.use_strength || self.enable_strength_weighting,
                ..self.walks.clone()
            },
            skipgram: SkipGramConfig {
                seed: derive("node2vec-skipgram"),
                ..self.skipgram.clone()
            },
            graphsage: SageConfig {
                seed: derive("graphsage"),
                use_strength: self.graphsage.use_strength || self.enable_strength_weighting,
                ..self.graphsage.clone()
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeededStages {
    pub synthetic: Option<SyntheticConfig>,
    pub walks: WalkConfig,
    pub skipgram: SkipGramConfig,
    pub graphsage: SageConfig,
}
