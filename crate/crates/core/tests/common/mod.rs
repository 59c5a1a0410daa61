//! Reference implementations shared by the integration tests.
//!
//! Everything here is written independently of the library internals: dense
//! Floyd-Warshall distances, boolean matrix powers, full-sort medians, a
//! dense forward pass of the whole network, Jacobi eigenvalues and central
//! finite differences.
#![allow(dead_code, clippy::needless_range_loop)]

pub mod props;

use medgnn::graph::{Direction, Edge, Graph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const INF: usize = usize::MAX;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Bernoulli(p) arcs on every ordered (directed) or unordered pair.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, directed: bool) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || (!directed && j < i) {
                continue;
            }
            if rng.random_bool(p) {
                edges.push(Edge::new(i, j, rng.random_range(0.5..2.0)));
            }
        }
    }
    Graph::new(n, edges, directed).unwrap()
}

/// `m[i][j]` is true when `j` is a one-hop neighbor of `i`: an arc `j -> i`
/// for [`Direction::In`], an arc `i -> j` for [`Direction::Out`].
pub fn one_hop(g: &Graph, direction: Direction) -> Vec<Vec<bool>> {
    let n = g.n_nodes();
    let mut m = vec![vec![false; n]; n];
    for e in g.edges() {
        match direction {
            Direction::In => m[e.dst][e.src] = true,
            Direction::Out => m[e.src][e.dst] = true,
        }
    }
    m
}

/// All-pairs hop distances; unreachable pairs are [`INF`].
pub fn floyd_warshall(m: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = m.len();
    let mut d = vec![vec![INF; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if m[i][j] && i != j {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k] == INF {
                continue;
            }
            for j in 0..n {
                if d[k][j] != INF && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

pub fn oracle_neighborhood(dist: &[Vec<usize>], i: usize, r: usize) -> Vec<usize> {
    (0..dist.len()).filter(|&j| dist[i][j] <= r).collect()
}

pub fn bool_matmul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    let mut c = vec![vec![false; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] {
                for j in 0..n {
                    c[i][j] |= b[k][j];
                }
            }
        }
    }
    c
}

/// `powers[k] = M^k` for `k = 0..=max`.
pub fn bool_powers(m: &[Vec<bool>], max: usize) -> Vec<Vec<Vec<bool>>> {
    let n = m.len();
    let mut id = vec![vec![false; n]; n];
    for (i, row) in id.iter_mut().enumerate() {
        row[i] = true;
    }
    let mut out = vec![id];
    for k in 1..=max {
        let next = bool_matmul(&out[k - 1], m);
        out.push(next);
    }
    out
}

/// Median of `(value, node)` pairs by full sort: position `floor(m/2)` of the
/// ascending order, reported with the smallest node id among equal values.
pub fn oracle_median(window: &[(f64, usize)]) -> (f64, usize) {
    let mut w = window.to_vec();
    w.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let value = w[w.len() / 2].0;
    let node = w.iter().find(|p| p.0 == value).unwrap().1;
    (value, node)
}

pub fn oracle_static_median(x: &[f64], dist: &[Vec<usize>], r: usize) -> Vec<(f64, usize)> {
    (0..x.len())
        .map(|i| {
            let window: Vec<(f64, usize)> =
                oracle_neighborhood(dist, i, r).into_iter().map(|j| (x[j], j)).collect();
            oracle_median(&window)
        })
        .collect()
}

pub type Dense = Vec<Vec<f64>>;

pub fn dense_matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

pub fn dense_matvec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

pub fn dense_identity(n: usize) -> Dense {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleActivation {
    Relu,
    Static(usize),
    Dynamic(usize),
}

/// Dense reference of the single-layer network with one input feature.
///
/// Parameters come as one flat vector in the library's tensor order:
/// filter `h[g][k]`, then `omega` (dynamic median only), readout weight
/// `w[c][g * n + i]`, readout bias `b[c]`.
pub struct OracleNet {
    pub shift: Dense,
    pub dist: Vec<Vec<usize>>,
    pub filters: usize,
    pub taps: usize,
    pub classes: usize,
    pub activation: OracleActivation,
}

impl OracleNet {
    pub fn n(&self) -> usize {
        self.shift.len()
    }

    pub fn param_len(&self) -> usize {
        let omega = match self.activation {
            OracleActivation::Dynamic(r) => r + 1,
            _ => 0,
        };
        self.filters * self.taps + omega + self.classes * (self.filters * self.n() + 1)
    }

    /// Filter outputs `y[g][i]` for one signal.
    pub fn filter(&self, theta: &[f64], x: &[f64]) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut powers = vec![dense_identity(n)];
        for k in 1..self.taps {
            powers.push(dense_matmul(&powers[k - 1], &self.shift));
        }
        let shifted: Vec<Vec<f64>> = powers.iter().map(|p| dense_matvec(p, x)).collect();
        (0..self.filters)
            .map(|g| {
                (0..n)
                    .map(|i| (0..self.taps).map(|k| theta[g * self.taps + k] * shifted[k][i]).sum())
                    .collect()
            })
            .collect()
    }

    pub fn activate(&self, theta: &[f64], y: &[f64]) -> Vec<f64> {
        match self.activation {
            OracleActivation::Relu => y.iter().map(|v| v.max(0.0)).collect(),
            OracleActivation::Static(r) => {
                oracle_static_median(y, &self.dist, r).into_iter().map(|p| p.0).collect()
            }
            OracleActivation::Dynamic(reach) => {
                let omega = &theta[self.filters * self.taps..self.filters * self.taps + reach + 1];
                let mut out = vec![0.0; y.len()];
                for (r, w) in omega.iter().enumerate() {
                    for (o, (v, _)) in out.iter_mut().zip(oracle_static_median(y, &self.dist, r)) {
                        *o += w * v;
                    }
                }
                out
            }
        }
    }

    pub fn logits(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let z: Vec<f64> = self
            .filter(theta, x)
            .iter()
            .flat_map(|y| self.activate(theta, y))
            .collect();
        let in_dim = self.filters * n;
        let w_start = self.param_len() - self.classes * (in_dim + 1);
        let b_start = w_start + self.classes * in_dim;
        (0..self.classes)
            .map(|c| {
                let w = &theta[w_start + c * in_dim..w_start + (c + 1) * in_dim];
                w.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() + theta[b_start + c]
            })
            .collect()
    }

    /// Mean negative log-softmax of the labels.
    pub fn loss(&self, theta: &[f64], xs: &[Vec<f64>], labels: &[usize]) -> f64 {
        let total: f64 = xs
            .iter()
            .zip(labels)
            .map(|(x, &y)| {
                let l = self.logits(theta, x);
                let m = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lse = m + l.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
                lse - l[y]
            })
            .sum();
        total / xs.len() as f64
    }

    /// Smallest gap between two values that share a median window or, for
    /// ReLU, the smallest distance of a pre-activation from zero.
    pub fn kink_margin(&self, theta: &[f64], xs: &[Vec<f64>]) -> f64 {
        let mut margin = f64::INFINITY;
        for x in xs {
            for y in self.filter(theta, x) {
                match self.activation {
                    OracleActivation::Relu => {
                        for v in &y {
                            margin = margin.min(v.abs());
                        }
                    }
                    OracleActivation::Static(r) | OracleActivation::Dynamic(r) => {
                        for hop in 1..=r {
                            for i in 0..y.len() {
                                let mut vals: Vec<f64> = oracle_neighborhood(&self.dist, i, hop)
                                    .into_iter()
                                    .map(|j| y[j])
                                    .collect();
                                vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                                for w in vals.windows(2) {
                                    margin = margin.min(w[1] - w[0]);
                                }
                            }
                        }
                    }
                }
            }
        }
        margin
    }
}

/// Central differences `(f(x + h e_k) - f(x - h e_k)) / 2h`.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            let orig = probe[k];
            probe[k] = orig + h;
            let up = f(&probe);
            probe[k] = orig - h;
            let down = f(&probe);
            probe[k] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `|a - b| / max(|a|, |b|)` in the 2-norm, with a floor on the denominator
/// so that two vanishing gradients compare as equal.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&diff) / norm(a).max(norm(b)).max(1e-8)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(a: &Dense) -> Vec<f64> {
    let n = a.len();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).collect()
}

/// `[W]_ij = w_ji` as a dense matrix.
pub fn dense_adjacency(g: &Graph) -> Dense {
    let n = g.n_nodes();
    let mut w = vec![vec![0.0; n]; n];
    for e in g.edges() {
        w[e.dst][e.src] = e.weight;
    }
    w
}
