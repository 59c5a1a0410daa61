use std::fmt::Write as _;
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::nn::SignalBatch;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub signal: Vec<f64>,
    pub label: usize,
}

/// Labeled graph signals on one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_nodes: usize,
    n_classes: usize,
    samples: Vec<Sample>,
    /// Human-readable tag per label (a node id or an author name).
    class_map: Vec<String>,
    seed: u64,
}

impl Dataset {
    pub fn new(
        n_nodes: usize,
        n_classes: usize,
        samples: Vec<Sample>,
        class_map: Vec<String>,
        seed: u64,
    ) -> Result<Self> {
        if class_map.len() != n_classes {
            return Err(Error::Validation(format!(
                "class map has {} entries for {n_classes} classes",
                class_map.len()
            )));
        }
        for (idx, s) in samples.iter().enumerate() {
            if s.signal.len() != n_nodes {
                return Err(Error::Validation(format!(
                    "sample {idx} has {} values, expected {n_nodes}",
                    s.signal.len()
                )));
            }
            if s.label >= n_classes {
                return Err(Error::Validation(format!(
                    "sample {idx} has label {} but only {n_classes} classes",
                    s.label
                )));
            }
            if s.signal.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("sample {idx} has a non-finite value")));
            }
        }
        Ok(Dataset {
            n_nodes,
            n_classes,
            samples,
            class_map,
            seed,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn class_map(&self) -> &[String] {
        &self.class_map
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn label_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.n_classes];
        for s in &self.samples {
            h[s.label] += 1;
        }
        h
    }

    /// Samples at `indices`, as a single-feature batch plus labels.
    pub fn batch(&self, indices: &[usize]) -> (SignalBatch, Vec<usize>) {
        let signals = indices.iter().map(|&i| self.samples[i].signal.as_slice());
        let x = SignalBatch::from_signals(self.n_nodes, signals).expect("samples share one length");
        let labels = indices.iter().map(|&i| self.samples[i].label).collect();
        (x, labels)
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            n_nodes: self.n_nodes,
            n_classes: self.n_classes,
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            class_map: self.class_map.clone(),
            seed: self.seed,
        }
    }

    /// Header `N C count seed`, then one `label v0 v1 ...` line per sample.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {} {}",
            self.n_nodes,
            self.n_classes,
            self.samples.len(),
            self.seed
        );
        for s in &self.samples {
            let _ = write!(out, "{}", s.label);
            for v in &s.signal {
                let _ = write!(out, " {v:?}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses [`Dataset::to_text`] output. Class tags are not stored in the
    /// file and come back as the label numbers.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let parse_err = |line: usize, msg: String| Error::Parse { line, msg };
        let header = match lines.next() {
            Some((_, l)) => l.map_err(|e| parse_err(1, e.to_string()))?,
            None => return Err(parse_err(1, "empty dataset file".into())),
        };
        let head: Vec<u64> = header
            .split_whitespace()
            .map(|t| t.parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| parse_err(1, format!("bad header `{header}`")))?;
        let [n_nodes, n_classes, count, seed] = head[..] else {
            return Err(parse_err(1, "header must be `N C count seed`".into()));
        };
        let (n_nodes, n_classes, count) = (n_nodes as usize, n_classes as usize, count as usize);
        let mut samples = Vec::with_capacity(count);
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut toks = line.split_whitespace();
            let label: usize = toks
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| parse_err(lineno, "bad label".into()))?;
            let signal: Vec<f64> = toks
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| parse_err(lineno, "bad signal value".into()))?;
            if signal.len() != n_nodes {
                return Err(parse_err(
                    lineno,
                    format!("{} values, header says {n_nodes}", signal.len()),
                ));
            }
            samples.push(Sample { signal, label });
        }
        if samples.len() != count {
            return Err(parse_err(
                1,
                format!("header declares {count} samples, file has {}", samples.len()),
            ));
        }
        let class_map = (0..n_classes).map(|c| c.to_string()).collect();
        Dataset::new(n_nodes, n_classes, samples, class_map, seed)
    }

    /// Hex SHA-256 of the text serialization.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Seeded stratified split. Each class sends `round(n_c * train_fraction)`
/// samples to the training side, so per-class counts are within one sample
/// of exact proportionality.
pub fn split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let labels = ds.labels();
    let (train_idx, test_idx) = stratified_partition(&labels, ds.n_classes, train_fraction, seed)?;
    Ok((ds.subset(&train_idx), ds.subset(&test_idx)))
}

/// Index-level form of [`split`]: returns shuffled `(train, test)` positions
/// into `labels`.
pub fn stratified_partition(
    labels: &[usize],
    n_classes: usize,
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Validation(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &label) in labels.iter().enumerate() {
        by_class[label].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for members in by_class.iter_mut() {
        members.shuffle(&mut rng);
        let take = (members.len() as f64 * train_fraction).round() as usize;
        train_idx.extend_from_slice(&members[..take]);
        test_idx.extend_from_slice(&members[take..]);
    }
    if train_idx.is_empty() || test_idx.is_empty() {
        return Err(Error::Validation(format!(
            "split of {} samples at {train_fraction} leaves an empty side",
            labels.len()
        )));
    }
    train_idx.shuffle(&mut rng);
    test_idx.shuffle(&mut rng);
    Ok((train_idx, test_idx))
}
