//! Seeded multi-round comparison of architectures.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use sha2::{Digest, Sha256};

use super::config::{CorpusConfig, CorpusSource, ExperimentConfig, GraphSource, Task};
use crate::data::wan::parse_function_words;
use crate::data::{
    authorship_round, generate_diffusion_dataset, load_corpus, synthetic_corpus,
    top_degree_nodes, AuthorshipParams, Corpus, Dataset, DiffusionParams, WanSpec,
    DEFAULT_FUNCTION_WORDS,
};
use crate::error::{Error, Result};
use crate::graph::{load_edge_list, Graph, DEFAULT_TOL};
use crate::nn::{Activation, Architecture, GraphContext, Model};
use crate::optim::{evaluate, train, Metrics, TrainReport};

/// Inputs shared by every round, loaded once.
#[derive(Debug, Clone)]
pub enum Resources {
    Diffusion { graph: Graph, sources: Vec<usize> },
    Authorship { corpus: Corpus, spec: WanSpec, target: String },
}

impl Resources {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        match cfg.task {
            Task::SourceLocalization => {
                let graph = match cfg.graph.as_ref() {
                    Some(GraphSource::EdgeList { path, directed }) => {
                        let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
                        load_edge_list(std::io::BufReader::new(f), *directed)?
                    }
                    Some(GraphSource::Generator(g)) => g.generate_connected()?,
                    None => return Err(Error::config("graph", "required for source-localization")),
                };
                let sources = top_degree_nodes(&graph, cfg.classes)
                    .map_err(|e| Error::config("classes", e.to_string()))?;
                Ok(Resources::Diffusion { graph, sources })
            }
            Task::Authorship => {
                let c = cfg
                    .corpus
                    .as_ref()
                    .ok_or_else(|| Error::config("corpus", "required for authorship"))?;
                let spec = wan_spec(c)?;
                let corpus = match &c.source {
                    CorpusSource::Directory(dir) => load_corpus(dir)?,
                    CorpusSource::Synthetic(p) => {
                        let mut corpus = Corpus::new();
                        for (author, docs) in synthetic_corpus(spec.function_words(), p) {
                            for d in docs {
                                corpus.add_text(&author, &d);
                            }
                        }
                        corpus
                    }
                };
                if corpus.texts(&c.target_author).is_none() {
                    return Err(Error::config(
                        "corpus.target_author",
                        format!("no author named `{}`", c.target_author),
                    ));
                }
                Ok(Resources::Authorship {
                    corpus,
                    spec,
                    target: c.target_author.clone(),
                })
            }
        }
    }
}

fn wan_spec(c: &CorpusConfig) -> Result<WanSpec> {
    let words = match &c.function_words {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_function_words(&text)
        }
        None => parse_function_words(DEFAULT_FUNCTION_WORDS),
    };
    WanSpec::new(words, c.window, c.normalize)
}

/// Graph and datasets of one round.
#[derive(Debug, Clone)]
pub struct RoundData {
    pub round: usize,
    pub seed: u64,
    pub graph: Graph,
    pub train: Dataset,
    pub test: Dataset,
}

impl RoundData {
    /// Hex SHA-256 over the graph and both datasets.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.graph.to_edge_list().as_bytes());
        h.update(self.train.to_text().as_bytes());
        h.update(self.test.to_text().as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn context(&self, cfg: &ExperimentConfig) -> Result<Arc<GraphContext>> {
        let ctx = GraphContext::from_graph(
            &self.graph,
            cfg.max_hop(),
            cfg.neighborhood_direction,
            DEFAULT_TOL,
        )?;
        Ok(Arc::new(ctx))
    }
}

/// Round `k` uses seed `cfg.seed + k` for data, initialization and shuffling.
pub fn round_data(cfg: &ExperimentConfig, res: &Resources, round: usize) -> Result<RoundData> {
    let seed = cfg.seed.wrapping_add(round as u64);
    match res {
        Resources::Diffusion { graph, sources } => {
            let all = generate_diffusion_dataset(
                graph,
                sources,
                &DiffusionParams {
                    samples: cfg.train_samples + cfg.test_samples,
                    t_min: cfg.t_min,
                    t_max: cfg.t_max,
                    gso: cfg.diffusion_gso,
                    seed,
                },
            )?;
            let train_idx: Vec<usize> = (0..cfg.train_samples).collect();
            let test_idx: Vec<usize> = (cfg.train_samples..all.len()).collect();
            Ok(RoundData {
                round,
                seed,
                graph: graph.clone(),
                train: all.subset(&train_idx),
                test: all.subset(&test_idx),
            })
        }
        Resources::Authorship {
            corpus,
            spec,
            target,
        } => {
            let c = cfg.corpus.as_ref().expect("validated authorship config");
            let data = authorship_round(
                corpus,
                spec,
                &AuthorshipParams {
                    target: target.clone(),
                    excerpt_words: c.excerpt_words,
                    train_fraction: c.train_fraction,
                    seed,
                },
            )?;
            Ok(RoundData {
                round,
                seed,
                graph: data.wan,
                train: data.train,
                test: data.test,
            })
        }
    }
}

/// A trained model with its training report and test metrics.
#[derive(Debug, Clone)]
pub struct TrainedRun {
    pub model: Model,
    pub report: TrainReport,
    pub test: Metrics,
    pub seconds: f64,
}

pub fn architecture(cfg: &ExperimentConfig, data: &RoundData, activation: Activation) -> Architecture {
    Architecture {
        nodes: data.graph.n_nodes(),
        features_in: 1,
        filters: cfg.filters,
        taps: cfg.taps,
        classes: cfg.n_classes(),
        activation,
    }
}

pub fn train_one(
    cfg: &ExperimentConfig,
    data: &RoundData,
    ctx: Arc<GraphContext>,
    activation: Activation,
) -> Result<TrainedRun> {
    let start = Instant::now();
    let mut model = Model::new(architecture(cfg, data, activation), ctx, data.seed)?;
    let report = train(&mut model, &data.train, &cfg.train_config(data.seed))?;
    let test = evaluate(&model, &data.test)?;
    Ok(TrainedRun {
        model,
        report,
        test,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundResult {
    pub round: usize,
    pub seed: u64,
    pub activation: Activation,
    pub test_accuracy: f64,
    pub test_loss: f64,
    pub final_train_loss: f64,
    /// Trainable parameters of the convolutional layer (filter taps plus
    /// activation weights).
    pub conv_params: usize,
    pub dataset_hash: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub activation: Activation,
    pub rounds: usize,
    pub mean_accuracy: f64,
    /// Sample standard deviation; zero for a single round.
    pub std_accuracy: f64,
    pub conv_params: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub results: Vec<RoundResult>,
    pub summary: Vec<SummaryRow>,
}

/// Trains every configured architecture on every round's shared data.
pub fn run_rounds(cfg: &ExperimentConfig) -> Result<Comparison> {
    cfg.validate()?;
    let res = Resources::load(cfg)?;
    let mut results = Vec::with_capacity(cfg.rounds * cfg.activations.len());
    for round in 0..cfg.rounds {
        let annotate = |e: Error| Error::Round {
            round,
            source: Box::new(e),
        };
        let data = round_data(cfg, &res, round).map_err(annotate)?;
        let ctx = data.context(cfg).map_err(annotate)?;
        let hash = data.fingerprint();
        for &activation in &cfg.activations {
            let run = train_one(cfg, &data, Arc::clone(&ctx), activation).map_err(annotate)?;
            results.push(RoundResult {
                round,
                seed: data.seed,
                activation,
                test_accuracy: run.test.accuracy,
                test_loss: run.test.loss,
                final_train_loss: run.report.final_train.loss,
                conv_params: run.model.params().conv_param_count(),
                dataset_hash: hash.clone(),
                seconds: run.seconds,
            });
        }
    }
    let summary = summarize(&cfg.activations, &results);
    Ok(Comparison { results, summary })
}

fn summarize(activations: &[Activation], results: &[RoundResult]) -> Vec<SummaryRow> {
    activations
        .iter()
        .map(|&a| {
            let rows: Vec<&RoundResult> = results.iter().filter(|r| r.activation == a).collect();
            let acc: Vec<f64> = rows.iter().map(|r| r.test_accuracy).collect();
            let (mean, std) = mean_std(&acc);
            SummaryRow {
                activation: a,
                rounds: rows.len(),
                mean_accuracy: mean,
                std_accuracy: std,
                conv_params: rows.first().map_or(0, |r| r.conv_params),
            }
        })
        .collect()
}

/// Mean and sample (n - 1) standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl Comparison {
    /// Per-run rows without wall-clock time.
    pub fn results_csv(&self) -> String {
        let mut out = String::from(
            "round,seed,activation,test_accuracy,test_loss,final_train_loss,conv_params,dataset_sha256\n",
        );
        for r in &self.results {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.round,
                r.seed,
                r.activation,
                r.test_accuracy,
                r.test_loss,
                r.final_train_loss,
                r.conv_params,
                r.dataset_hash
            );
        }
        out
    }

    /// One row per architecture: mean and sample std of test accuracy.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("activation,rounds,mean_accuracy,std_accuracy,conv_params\n");
        for s in &self.summary {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.activation, s.rounds, s.mean_accuracy, s.std_accuracy, s.conv_params
            );
        }
        out
    }

    pub fn timings_csv(&self) -> String {
        let mut out = String::from("round,activation,seconds\n");
        for r in &self.results {
            let _ = writeln!(out, "{},{},{:.6}", r.round, r.activation, r.seconds);
        }
        out
    }

    /// Writes `results.csv`, `summary.csv` and `timings.csv` into `dir`.
    /// Only the timings file depends on wall-clock time.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_atomic(&dir.join("results.csv"), &self.results_csv())?;
        write_atomic(&dir.join("summary.csv"), &self.summary_csv())?;
        write_atomic(&dir.join("timings.csv"), &self.timings_csv())
    }
}

/// Writes per-epoch `epoch,train_loss,val_loss,val_acc` rows.
pub fn emit_curves(report: &TrainReport, path: &Path) -> Result<()> {
    if report.epochs.is_empty() {
        return Err(Error::Validation("training report has no epochs".into()));
    }
    write_atomic(path, &report.curves_csv())
}

/// Writes to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Validation(format!("`{}` is not a file path", path.display())))?;
    let mut tmp_name = name.to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp: PathBuf = path.with_file_name(tmp_name);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
