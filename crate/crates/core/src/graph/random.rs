//! Deterministic graph generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Edge, Graph};
use crate::error::{Error, Result};

pub fn path(n: usize) -> Graph {
    let edges = (1..n).map(|i| Edge::new(i - 1, i, 1.0)).collect();
    Graph::new(n, edges, false).expect("path edges are valid")
}

pub fn cycle(n: usize, directed: bool) -> Graph {
    let edges = (0..n).map(|i| Edge::new(i, (i + 1) % n, 1.0)).collect();
    Graph::new(n, edges, directed).expect("cycle edges are valid for n >= 3")
}

/// `K_{1, leaves}` with center 0.
pub fn star(leaves: usize) -> Graph {
    let edges = (1..=leaves).map(|i| Edge::new(0, i, 1.0)).collect();
    Graph::new(leaves + 1, edges, false).expect("star edges are valid")
}

/// `G(n, p)`; directed graphs draw each ordered pair independently.
pub fn erdos_renyi(n: usize, p: f64, directed: bool, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || (!directed && j < i) {
                continue;
            }
            if rng.random_bool(p) {
                edges.push(Edge::new(i, j, 1.0));
            }
        }
    }
    Graph::new(n, edges, directed).expect("generated edges are valid")
}

/// Undirected stochastic block model with consecutive blocks.
pub fn stochastic_block(block_sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Graph {
    let n: usize = block_sizes.iter().sum();
    let block: Vec<usize> = block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if block[i] == block[j] { p_in } else { p_out };
            if rng.random_bool(p) {
                edges.push(Edge::new(i, j, 1.0));
            }
        }
    }
    Graph::new(n, edges, false).expect("generated edges are valid")
}

/// Undirected random geometric graph on the unit square.
pub fn random_geometric(n: usize, radius: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (dx, dy) = (pts[i].0 - pts[j].0, pts[i].1 - pts[j].1);
            if dx * dx + dy * dy <= radius * radius {
                edges.push(Edge::new(i, j, 1.0));
            }
        }
    }
    Graph::new(n, edges, false).expect("generated edges are valid")
}

/// Generator description usable from experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphGenerator {
    StochasticBlock {
        block_sizes: Vec<usize>,
        p_in: f64,
        p_out: f64,
        seed: u64,
    },
    RandomGeometric {
        nodes: usize,
        radius: f64,
        seed: u64,
    },
    ErdosRenyi {
        nodes: usize,
        p: f64,
        #[serde(default)]
        directed: bool,
        seed: u64,
    },
}

const MAX_CONNECT_TRIES: u64 = 1000;

impl GraphGenerator {
    /// Draws graphs with seeds `seed, seed + 1, ...` until one is weakly
    /// connected.
    pub fn generate_connected(&self) -> Result<Graph> {
        for offset in 0..MAX_CONNECT_TRIES {
            let g = self.generate_with_offset(offset);
            if g.is_weakly_connected() {
                return Ok(g);
            }
        }
        Err(Error::Validation(format!(
            "no connected graph after {MAX_CONNECT_TRIES} draws from {self:?}"
        )))
    }

    fn generate_with_offset(&self, offset: u64) -> Graph {
        match *self {
            GraphGenerator::StochasticBlock {
                ref block_sizes,
                p_in,
                p_out,
                seed,
            } => stochastic_block(block_sizes, p_in, p_out, seed.wrapping_add(offset)),
            GraphGenerator::RandomGeometric {
                nodes,
                radius,
                seed,
            } => random_geometric(nodes, radius, seed.wrapping_add(offset)),
            GraphGenerator::ErdosRenyi {
                nodes,
                p,
                directed,
                seed,
            } => erdos_renyi(nodes, p, directed, seed.wrapping_add(offset)),
        }
    }
}
