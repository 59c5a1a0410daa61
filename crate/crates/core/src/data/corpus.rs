//! Author corpora and the authorship-attribution dataset pipeline.
//!
//! A corpus directory holds one subdirectory per author with plain-text
//! files. Texts are cut into disjoint fixed-length excerpts. For a target
//! author the task is binary: excerpts by the target (label 1) against an
//! equal number of excerpts by other authors (label 0).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{stratified_partition, Dataset, Sample};
use super::wan::{build_wan, excerpt_features, tokenize, WanSpec};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Tokenized texts per author, authors in name order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    authors: BTreeMap<String, Vec<Vec<String>>>,
}

impl Corpus {
    pub fn new() -> Self {
        Corpus::default()
    }

    pub fn add_text(&mut self, author: &str, text: &str) {
        self.authors
            .entry(author.to_string())
            .or_default()
            .push(tokenize(text));
    }

    pub fn authors(&self) -> impl Iterator<Item = &str> {
        self.authors.keys().map(String::as_str)
    }

    pub fn texts(&self, author: &str) -> Option<&[Vec<String>]> {
        self.authors.get(author).map(Vec::as_slice)
    }

    /// Disjoint `len`-token excerpts of every text by `author`; a short tail
    /// at the end of each text is dropped.
    pub fn excerpts(&self, author: &str, len: usize) -> Vec<&[String]> {
        self.authors
            .get(author)
            .map(|texts| {
                texts
                    .iter()
                    .flat_map(|t| t.chunks_exact(len))
                    .collect()
            })
            .unwrap_or_default()
    }
}

/// Reads `dir/<author>/*` as UTF-8 text. Files are read in name order.
pub fn load_corpus(dir: &Path) -> Result<Corpus> {
    let mut corpus = Corpus::new();
    let mut author_dirs: Vec<_> = read_dir_sorted(dir)?
        .into_iter()
        .filter(|p| p.is_dir())
        .collect();
    author_dirs.sort();
    for adir in author_dirs {
        let author = adir
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| Error::Validation(format!("bad author directory {}", adir.display())))?
            .to_string();
        for file in read_dir_sorted(&adir)?.into_iter().filter(|p| p.is_file()) {
            let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
            corpus.add_text(&author, &text);
        }
    }
    if corpus.authors.is_empty() {
        return Err(Error::Validation(format!(
            "no author directories under {}",
            dir.display()
        )));
    }
    Ok(corpus)
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        out.push(entry.map_err(|e| Error::io(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

/// Writes raw texts as `dir/<author>/text_<k>.txt`.
pub fn write_corpus(dir: &Path, texts: &BTreeMap<String, Vec<String>>) -> Result<()> {
    for (author, docs) in texts {
        let adir = dir.join(author);
        fs::create_dir_all(&adir).map_err(|e| Error::io(&adir, e))?;
        for (k, doc) in docs.iter().enumerate() {
            let path = adir.join(format!("text_{k:03}.txt"));
            fs::write(&path, doc).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}

/// Knobs of the synthetic stylometry corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticCorpusParams {
    pub authors: usize,
    pub texts_per_author: usize,
    pub words_per_text: usize,
    /// Fraction of tokens that are function words.
    pub function_word_rate: f64,
    /// How far each author's function-word preferences stray from the
    /// shared base profile, as a log-scale half-width.
    pub style_spread: f64,
    pub seed: u64,
}

impl Default for SyntheticCorpusParams {
    fn default() -> Self {
        SyntheticCorpusParams {
            authors: 2,
            texts_per_author: 4,
            words_per_text: 25_000,
            function_word_rate: 0.45,
            style_spread: 0.6,
            seed: 0,
        }
    }
}

/// Generates texts whose authors differ only in function-word usage.
///
/// All authors share a Zipf-like base profile over `function_words`; each
/// author rescales it by per-word factors `exp(U(-spread, spread))` and also
/// has a preferred successor for every function word, which gives their word
/// adjacency networks distinct structure. Content words come from a shared
/// made-up vocabulary.
pub fn synthetic_corpus(
    function_words: &[String],
    params: &SyntheticCorpusParams,
) -> BTreeMap<String, Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let syllables = ["ka", "lo", "mi", "ren", "tu", "sa", "vel", "dor", "pi", "nu", "gar", "eth"];
    let content: Vec<String> = (0..600)
        .map(|_| {
            let n = rng.random_range(2..=3);
            (0..n).map(|_| *syllables.choose(&mut rng).unwrap()).collect()
        })
        .filter(|w: &String| !function_words.contains(w))
        .collect();
    let nf = function_words.len();
    let base: Vec<f64> = (0..nf).map(|i| 1.0 / (i as f64 + 2.0)).collect();

    let mut out = BTreeMap::new();
    for a in 0..params.authors {
        let name = format!("author_{}", (b'a' + a as u8) as char);
        let weights: Vec<f64> = base
            .iter()
            .map(|w| w * rng.random_range(-params.style_spread..=params.style_spread).exp())
            .collect();
        let cumulative = cumulative(&weights);
        let successor: Vec<usize> = (0..nf).map(|_| rng.random_range(0..nf)).collect();
        let mut docs = Vec::with_capacity(params.texts_per_author);
        for _ in 0..params.texts_per_author {
            let mut words: Vec<&str> = Vec::with_capacity(params.words_per_text);
            let mut last_fw: Option<usize> = None;
            for _ in 0..params.words_per_text {
                if rng.random_bool(params.function_word_rate) {
                    let idx = match last_fw {
                        Some(prev) if rng.random_bool(0.25) => successor[prev],
                        _ => sample_cumulative(&cumulative, rng.random()),
                    };
                    words.push(&function_words[idx]);
                    last_fw = Some(idx);
                } else {
                    words.push(&content[rng.random_range(0..content.len())]);
                }
            }
            docs.push(words.join(" "));
        }
        out.insert(name, docs);
    }
    out
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w / total;
            acc
        })
        .collect()
}

fn sample_cumulative(cumulative: &[f64], u: f64) -> usize {
    cumulative
        .partition_point(|&c| c < u)
        .min(cumulative.len() - 1)
}

/// Settings for one authorship round.
#[derive(Debug, Clone, PartialEq)]
pub struct AuthorshipParams {
    pub target: String,
    pub excerpt_words: usize,
    pub train_fraction: f64,
    pub seed: u64,
}

/// Network and labeled splits for one round.
#[derive(Debug, Clone)]
pub struct AuthorshipData {
    pub wan: Graph,
    pub train: Dataset,
    pub test: Dataset,
}

/// Builds a balanced binary dataset for `params.target`, splits it, and
/// builds the target's word adjacency network from training excerpts only.
///
/// Negatives are drawn without replacement by picking a non-target author
/// uniformly, then one of their unused excerpts uniformly.
pub fn authorship_round(
    corpus: &Corpus,
    spec: &WanSpec,
    params: &AuthorshipParams,
) -> Result<AuthorshipData> {
    if params.excerpt_words == 0 {
        return Err(Error::config("excerpt_words", "must be positive"));
    }
    let positives = corpus.excerpts(&params.target, params.excerpt_words);
    if positives.is_empty() {
        return Err(Error::Validation(format!(
            "author `{}` has no excerpts of {} words",
            params.target, params.excerpt_words
        )));
    }
    let mut pools: Vec<Vec<&[String]>> = corpus
        .authors()
        .filter(|a| *a != params.target)
        .map(|a| corpus.excerpts(a, params.excerpt_words))
        .filter(|p| !p.is_empty())
        .collect();
    let available: usize = pools.iter().map(Vec::len).sum();
    if available < positives.len() {
        return Err(Error::Validation(format!(
            "{} target excerpts but only {available} from other authors",
            positives.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut negatives = Vec::with_capacity(positives.len());
    while negatives.len() < positives.len() {
        pools.retain(|p| !p.is_empty());
        let a = rng.random_range(0..pools.len());
        let k = rng.random_range(0..pools[a].len());
        negatives.push(pools[a].swap_remove(k));
    }

    let excerpts: Vec<(&[String], usize)> = positives
        .iter()
        .map(|e| (*e, 1))
        .chain(negatives.iter().map(|e| (*e, 0)))
        .collect();
    let labels: Vec<usize> = excerpts.iter().map(|&(_, l)| l).collect();
    let (train_idx, test_idx) =
        stratified_partition(&labels, 2, params.train_fraction, params.seed)?;

    let target_train: Vec<Vec<&str>> = train_idx
        .iter()
        .filter(|&&i| excerpts[i].1 == 1)
        .map(|&i| excerpts[i].0.iter().map(String::as_str).collect())
        .collect();
    let wan = build_wan(&target_train, spec)?;

    let make = |idx: &[usize]| -> Result<Dataset> {
        let samples = idx
            .iter()
            .map(|&i| {
                Ok(Sample {
                    signal: excerpt_features(excerpts[i].0, spec)?,
                    label: excerpts[i].1,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(
            spec.len(),
            2,
            samples,
            vec!["other".to_string(), params.target.clone()],
            params.seed,
        )
    };
    Ok(AuthorshipData {
        wan,
        train: make(&train_idx)?,
        test: make(&test_idx)?,
    })
}
