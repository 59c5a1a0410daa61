//! Word adjacency networks and function-word frequency features.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};

/// Function-word list bundled with the crate.
pub const DEFAULT_FUNCTION_WORDS: &str = include_str!("../../assets/function_words.txt");

/// Lowercases and splits on every non-alphabetic character.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// One word per line; blank lines and `#` comments are skipped.
pub fn parse_function_words(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// Node set and co-appearance rule of a word adjacency network.
#[derive(Debug, Clone, PartialEq)]
pub struct WanSpec {
    function_words: Vec<String>,
    index: HashMap<String, usize>,
    window: usize,
    normalize: bool,
}

impl WanSpec {
    pub fn new(function_words: Vec<String>, window: usize, normalize: bool) -> Result<Self> {
        if function_words.is_empty() {
            return Err(Error::Validation("function-word list is empty".into()));
        }
        if window == 0 {
            return Err(Error::Validation("co-appearance window must be positive".into()));
        }
        let mut index = HashMap::with_capacity(function_words.len());
        for (i, w) in function_words.iter().enumerate() {
            if w.is_empty() || *w != w.to_lowercase() {
                return Err(Error::Validation(format!("function word `{w}` is not lowercase")));
            }
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Validation(format!("function word `{w}` listed twice")));
            }
        }
        Ok(WanSpec {
            function_words,
            index,
            window,
            normalize,
        })
    }

    pub fn function_words(&self) -> &[String] {
        &self.function_words
    }

    pub fn len(&self) -> usize {
        self.function_words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.function_words.is_empty()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }
}

/// Ordered co-appearance counts: `(u, v)` counts occurrences of function word
/// `v` at most `window` tokens after an occurrence of `u`, within one text.
/// Self pairs are dropped.
pub fn co_appearance_counts<S: AsRef<str>>(
    texts: &[Vec<S>],
    spec: &WanSpec,
) -> (BTreeMap<(usize, usize), f64>, bool) {
    let mut counts: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut any_function_word = false;
    for tokens in texts {
        let ids: Vec<Option<usize>> = tokens.iter().map(|t| spec.index_of(t.as_ref())).collect();
        for (p, u) in ids.iter().enumerate() {
            let Some(u) = *u else { continue };
            any_function_word = true;
            let end = (p + spec.window).min(ids.len() - 1);
            for v in ids[p + 1..=end].iter().flatten() {
                if *v != u {
                    *counts.entry((u, *v)).or_insert(0.0) += 1.0;
                }
            }
        }
    }
    (counts, any_function_word)
}

/// Directed word adjacency network over `spec`'s function words.
pub fn build_wan<S: AsRef<str>>(texts: &[Vec<S>], spec: &WanSpec) -> Result<Graph> {
    let (counts, any) = co_appearance_counts(texts, spec);
    if !any {
        return Err(Error::Validation(
            "no function word occurs in the texts; the network would be empty".into(),
        ));
    }
    let mut out_totals = vec![0.0; spec.len()];
    if spec.normalize {
        for (&(u, _), &w) in &counts {
            out_totals[u] += w;
        }
    }
    let edges = counts
        .into_iter()
        .map(|((u, v), w)| {
            let w = if spec.normalize { w / out_totals[u] } else { w };
            Edge::new(u, v, w)
        })
        .collect();
    Graph::new(spec.len(), edges, true)
}

/// Relative frequency of each function word in an excerpt.
pub fn excerpt_features<S: AsRef<str>>(tokens: &[S], spec: &WanSpec) -> Result<Vec<f64>> {
    if tokens.is_empty() {
        return Err(Error::Validation("empty excerpt".into()));
    }
    let mut counts = vec![0.0; spec.len()];
    for t in tokens {
        if let Some(i) = spec.index_of(t.as_ref()) {
            counts[i] += 1.0;
        }
    }
    let len = tokens.len() as f64;
    counts.iter_mut().for_each(|c| *c /= len);
    Ok(counts)
}
