use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Graph;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 5000;

const POWER_ITERATION_SEED: u64 = 0x005e_ed0f_5a1f;

/// Dense row-major `n x n` shift operator.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl ShiftMatrix {
    pub fn zeros(n: usize) -> Self {
        ShiftMatrix {
            n,
            entries: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::Shape(format!(
                    "row of length {} in a {n}x{n} matrix",
                    row.len()
                )));
            }
            entries.extend_from_slice(row);
        }
        Ok(ShiftMatrix { n, entries })
    }

    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Shape(format!(
                "{} entries for a {n}x{n} matrix",
                entries.len()
            )));
        }
        Ok(ShiftMatrix { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        ShiftMatrix {
            n: self.n,
            entries: self.entries.iter().map(|v| v * c).collect(),
        }
    }

    /// `out = S x`
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for (o, row) in out.iter_mut().zip(self.entries.chunks_exact(self.n)) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// `out = S^T x`
    pub fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (xi, row) in x.iter().zip(self.entries.chunks_exact(self.n)) {
            if *xi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * xi;
            }
        }
    }

    pub fn matmul(&self, other: &ShiftMatrix) -> ShiftMatrix {
        let n = self.n;
        let mut out = ShiftMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }
}

/// Weighted adjacency with the transpose convention: entry `(i, j)` holds the
/// weight of arc `j -> i`, so `(W x)_i` sums over in-neighbors of `i`.
pub fn adjacency(g: &Graph) -> ShiftMatrix {
    let mut m = ShiftMatrix::zeros(g.n_nodes());
    for e in g.edges() {
        m.set(e.dst, e.src, e.weight);
    }
    m
}

/// 0/1 pattern of [`adjacency`].
pub fn binary_gso(g: &Graph) -> ShiftMatrix {
    let mut m = ShiftMatrix::zeros(g.n_nodes());
    for e in g.edges() {
        m.set(e.dst, e.src, 1.0);
    }
    m
}

/// Largest eigenvalue modulus by seeded power iteration.
///
/// Sign-definite matrices (all entries `>= 0` or all `<= 0`) are shifted by
/// their largest absolute row sum before iterating. The shift keeps the
/// Perron root strictly dominant, which makes bipartite and periodic graphs
/// converge. Mixed-sign matrices iterate on the two-step ratio
/// `sqrt(|S^2 x| / |x|)`, which handles real `+-rho` pairs.
pub fn spectral_radius(s: &ShiftMatrix, tol: f64, max_iter: usize) -> Result<f64> {
    if s.is_zero() {
        return Err(Error::NoSpectralRadius);
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Validation(format!("tolerance must be positive, got {tol}")));
    }
    let n = s.n();
    if support_is_acyclic(s) {
        // nilpotent: every walk dies out after at most n steps
        return Ok(0.0);
    }
    let nonneg = s.entries().iter().all(|&v| v >= 0.0);
    let nonpos = s.entries().iter().all(|&v| v <= 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_ITERATION_SEED);

    if nonneg || nonpos {
        let sign = if nonneg { 1.0 } else { -1.0 };
        let shift = (0..n)
            .map(|i| s.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
        normalize(&mut x);
        let mut y = vec![0.0; n];
        let mut last = f64::NAN;
        for _ in 0..max_iter {
            s.apply(&x, &mut y);
            for (yi, xi) in y.iter_mut().zip(&x) {
                *yi = sign * *yi + shift * xi;
            }
            let est = norm(&y) - shift;
            normalize(&mut y);
            std::mem::swap(&mut x, &mut y);
            if last.is_finite() && (est - last).abs() <= tol * est.abs().max(f64::MIN_POSITIVE) {
                return Ok(est);
            }
            last = est;
        }
        return Err(Error::NotConverged {
            iterations: max_iter,
            last,
        });
    }

    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    normalize(&mut x);
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut last = f64::NAN;
    for _ in 0..max_iter {
        s.apply(&x, &mut y);
        s.apply(&y, &mut z);
        let nz = norm(&z);
        if nz == 0.0 {
            // nilpotent on the iterate's span
            return Ok(0.0);
        }
        let est = nz.sqrt();
        normalize(&mut z);
        std::mem::swap(&mut x, &mut z);
        if last.is_finite() && (est - last).abs() <= tol * est {
            return Ok(est);
        }
        last = est;
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        last,
    })
}

/// Adjacency divided by its spectral radius.
pub fn normalized_adjacency(g: &Graph, tol: f64) -> Result<ShiftMatrix> {
    let w = adjacency(g);
    let rho = spectral_radius(&w, tol, DEFAULT_MAX_ITER)?;
    if rho <= 0.0 {
        return Err(Error::NoSpectralRadius);
    }
    Ok(w.scaled(1.0 / rho))
}

/// Kahn's algorithm on the nonzero pattern of `s`.
fn support_is_acyclic(s: &ShiftMatrix) -> bool {
    let n = s.n();
    let mut indegree = vec![0usize; n];
    for i in 0..n {
        for (j, &v) in s.row(i).iter().enumerate() {
            if v != 0.0 {
                indegree[j] += 1;
            }
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&j| indegree[j] == 0).collect();
    let mut removed = 0;
    while let Some(i) = ready.pop() {
        removed += 1;
        for (j, &v) in s.row(i).iter().enumerate() {
            if v != 0.0 {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.push(j);
                }
            }
        }
    }
    removed == n
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn normalize(x: &mut [f64]) {
    let n = norm(x);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}
