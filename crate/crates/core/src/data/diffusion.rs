//! Synthetic diffusion processes for source localization.
//!
//! A process started at node `c` is observed at a random time `t` as
//! `x(t) = W^t e_c`; the task is to recover `c` from `x(t)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::graph::{adjacency, normalized_adjacency, Graph, ShiftMatrix, DEFAULT_TOL};

/// Operator the diffusion is run with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffusionGso {
    /// Raw weighted adjacency.
    Raw,
    /// Adjacency divided by its spectral radius.
    #[default]
    Normalized,
}

/// `c` nodes of highest degree, ties to the smaller id.
pub fn top_degree_nodes(g: &Graph, c: usize) -> Result<Vec<usize>> {
    if c > g.n_nodes() {
        return Err(Error::Validation(format!(
            "asked for {c} top-degree nodes of a {}-node graph",
            g.n_nodes()
        )));
    }
    let mut nodes: Vec<usize> = (0..g.n_nodes()).collect();
    nodes.sort_by(|&a, &b| g.degree(b).cmp(&g.degree(a)).then(a.cmp(&b)));
    nodes.truncate(c);
    Ok(nodes)
}

/// `W^t e_source` by `t` successive products.
pub fn diffuse(w: &ShiftMatrix, source: usize, t: usize) -> Result<Vec<f64>> {
    if source >= w.n() {
        return Err(Error::Validation(format!(
            "source {source} out of range for {} nodes",
            w.n()
        )));
    }
    let mut x = vec![0.0; w.n()];
    x[source] = 1.0;
    let mut next = vec![0.0; w.n()];
    for _ in 0..t {
        w.apply(&x, &mut next);
        std::mem::swap(&mut x, &mut next);
    }
    Ok(x)
}

/// Observation times are drawn uniformly from `t_min..=t_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionParams {
    pub samples: usize,
    pub t_min: usize,
    pub t_max: usize,
    pub gso: DiffusionGso,
    pub seed: u64,
}

/// Samples `(x(t), c)` with `c` uniform over `sources` (label = position in
/// `sources`) and `t` uniform over the observation window. Sample `k` uses
/// its own ChaCha stream, so the output does not depend on generation order.
pub fn generate_diffusion_dataset(
    g: &Graph,
    sources: &[usize],
    params: &DiffusionParams,
) -> Result<Dataset> {
    if sources.is_empty() {
        return Err(Error::Validation("no diffusion sources".into()));
    }
    if params.samples == 0 {
        return Err(Error::Validation("sample count must be positive".into()));
    }
    if params.t_min > params.t_max {
        return Err(Error::Validation(format!(
            "t_min {} exceeds t_max {}",
            params.t_min, params.t_max
        )));
    }
    let w = match params.gso {
        DiffusionGso::Raw => adjacency(g),
        DiffusionGso::Normalized => normalized_adjacency(g, DEFAULT_TOL)?,
    };
    // every (source, t) signal, computed once
    let span = params.t_max - params.t_min + 1;
    let mut table = Vec::with_capacity(sources.len() * span);
    for &c in sources {
        let mut x = diffuse(&w, c, params.t_min)?;
        let mut next = vec![0.0; w.n()];
        for _ in 0..span {
            table.push(x.clone());
            w.apply(&x, &mut next);
            std::mem::swap(&mut x, &mut next);
        }
    }
    let samples = (0..params.samples)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(k as u64);
            let label = rng.random_range(0..sources.len());
            let dt = rng.random_range(0..span);
            Sample {
                signal: table[label * span + dt].clone(),
                label,
            }
        })
        .collect();
    let class_map = sources.iter().map(|c| c.to_string()).collect();
    Dataset::new(g.n_nodes(), sources.len(), samples, class_map, params.seed)
}
