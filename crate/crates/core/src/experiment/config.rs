//! JSON experiment configuration.
//!
//! Every field except `task` and the task's data source has a default.
//! Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{DiffusionGso, SyntheticCorpusParams};
use crate::error::{Error, Result};
use crate::graph::random::GraphGenerator;
use crate::graph::Direction;
use crate::nn::Activation;
use crate::optim::{AdamConfig, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    SourceLocalization,
    Authorship,
}

/// Where a source-localization graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    /// Whitespace-separated `src dst [weight]` lines.
    EdgeList {
        path: PathBuf,
        #[serde(default)]
        directed: bool,
    },
    Generator(GraphGenerator),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CorpusSource {
    /// One subdirectory of text files per author.
    Directory(PathBuf),
    Synthetic(SyntheticCorpusParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub source: CorpusSource,
    pub target_author: String,
    #[serde(default = "defaults::excerpt_words")]
    pub excerpt_words: usize,
    #[serde(default = "defaults::window")]
    pub window: usize,
    #[serde(default)]
    pub normalize: bool,
    /// One word per line; the bundled list is used when absent.
    #[serde(default)]
    pub function_words: Option<PathBuf>,
    #[serde(default = "defaults::train_fraction")]
    pub train_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    /// Required for source localization.
    #[serde(default)]
    pub graph: Option<GraphSource>,
    /// Required for authorship.
    #[serde(default)]
    pub corpus: Option<CorpusConfig>,
    /// Architectures compared by `compare`; `train` uses the first.
    #[serde(default = "defaults::activations")]
    pub activations: Vec<Activation>,
    #[serde(default = "defaults::filters")]
    pub filters: usize,
    #[serde(default = "defaults::taps")]
    pub taps: usize,
    /// Number of top-degree source nodes. Authorship is always binary.
    #[serde(default = "defaults::classes")]
    pub classes: usize,
    #[serde(default = "defaults::train_samples")]
    pub train_samples: usize,
    #[serde(default = "defaults::test_samples")]
    pub test_samples: usize,
    #[serde(default)]
    pub t_min: usize,
    #[serde(default = "defaults::t_max")]
    pub t_max: usize,
    #[serde(default)]
    pub diffusion_gso: DiffusionGso,
    #[serde(default)]
    pub neighborhood_direction: Direction,
    #[serde(default = "defaults::epochs")]
    pub epochs: usize,
    #[serde(default = "defaults::batch_size")]
    pub batch_size: usize,
    #[serde(default = "defaults::learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "defaults::rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::out_dir")]
    pub out_dir: PathBuf,
    /// Held-out share of the training data for per-epoch validation curves.
    #[serde(default)]
    pub validation_fraction: Option<f64>,
}

mod defaults {
    use std::path::PathBuf;

    use crate::nn::Activation;

    pub fn activations() -> Vec<Activation> {
        vec![
            Activation::Relu,
            Activation::DynamicMedian { reach: 1 },
            Activation::DynamicMedian { reach: 2 },
        ]
    }
    pub fn filters() -> usize {
        32
    }
    pub fn taps() -> usize {
        5
    }
    pub fn classes() -> usize {
        5
    }
    pub fn train_samples() -> usize {
        10_000
    }
    pub fn test_samples() -> usize {
        200
    }
    pub fn t_max() -> usize {
        4
    }
    pub fn epochs() -> usize {
        30
    }
    pub fn batch_size() -> usize {
        100
    }
    pub fn learning_rate() -> f64 {
        1e-3
    }
    pub fn rounds() -> usize {
        10
    }
    pub fn out_dir() -> PathBuf {
        PathBuf::from("out")
    }
    pub fn excerpt_words() -> usize {
        1000
    }
    pub fn window() -> usize {
        10
    }
    pub fn train_fraction() -> f64 {
        0.8
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Command-line flags take precedence over file values.
    pub fn apply_overrides(
        &mut self,
        seed: Option<u64>,
        activation: Option<Activation>,
        out_dir: Option<PathBuf>,
    ) {
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(a) = activation {
            self.activations = vec![a];
        }
        if let Some(o) = out_dir {
            self.out_dir = o;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("filters", self.filters),
            ("taps", self.taps),
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
            ("rounds", self.rounds),
        ];
        for (field, v) in positive {
            if v == 0 {
                return Err(Error::config(field, "must be positive"));
            }
        }
        if self.activations.is_empty() {
            return Err(Error::config("activations", "list is empty"));
        }
        for a in &self.activations {
            if matches!(a, Activation::StaticMedian { .. } | Activation::DynamicMedian { .. })
                && a.max_hop() == 0
            {
                return Err(Error::config(
                    "activations",
                    format!("`{a}` needs a reach of at least 1"),
                ));
            }
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning_rate", "must be finite and non-negative"));
        }
        if let Some(f) = self.validation_fraction {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::config("validation_fraction", "must lie in (0, 1)"));
            }
        }
        match self.task {
            Task::SourceLocalization => {
                if self.graph.is_none() {
                    return Err(Error::config("graph", "required for source-localization"));
                }
                for (field, v) in [
                    ("classes", self.classes),
                    ("train_samples", self.train_samples),
                    ("test_samples", self.test_samples),
                ] {
                    if v == 0 {
                        return Err(Error::config(field, "must be positive"));
                    }
                }
                if self.t_min > self.t_max {
                    return Err(Error::config("t_min", "exceeds t_max"));
                }
            }
            Task::Authorship => {
                let c = self
                    .corpus
                    .as_ref()
                    .ok_or_else(|| Error::config("corpus", "required for authorship"))?;
                if c.excerpt_words == 0 {
                    return Err(Error::config("corpus.excerpt_words", "must be positive"));
                }
                if c.window == 0 {
                    return Err(Error::config("corpus.window", "must be positive"));
                }
                if !(c.train_fraction > 0.0 && c.train_fraction < 1.0) {
                    return Err(Error::config("corpus.train_fraction", "must lie in (0, 1)"));
                }
                if let CorpusSource::Synthetic(p) = &c.source {
                    if p.authors < 2 {
                        return Err(Error::config("corpus.source.synthetic.authors", "need at least 2"));
                    }
                    if !(0.0..=1.0).contains(&p.function_word_rate) {
                        return Err(Error::config(
                            "corpus.source.synthetic.function_word_rate",
                            "must lie in [0, 1]",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Classes seen by the model.
    pub fn n_classes(&self) -> usize {
        match self.task {
            Task::SourceLocalization => self.classes,
            Task::Authorship => 2,
        }
    }

    /// Largest neighborhood reach any compared activation needs.
    pub fn max_hop(&self) -> usize {
        self.activations.iter().map(Activation::max_hop).max().unwrap_or(0)
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            adam: AdamConfig {
                learning_rate: self.learning_rate,
                ..AdamConfig::default()
            },
            seed,
            validation_fraction: self.validation_fraction,
        }
    }
}
