//! Activation functions: pointwise ReLU and neighborhood medians.
//!
//! The static median replaces each node's value with the median over its
//! extended `r`-hop neighborhood. The dynamic median mixes the static medians
//! at hops `0..=R` with trainable weights `omega`, shared by all features:
//!
//! ```text
//! y_i = sum_r omega_r * med { x_j : j within r hops of i }
//! ```
//!
//! Gradients with respect to the input route each upstream value to the
//! single neighborhood member that was selected as the median.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::select::{median_rank, select_rank};
use super::SignalBatch;
use crate::error::{Error, Result};
use crate::graph::NeighborhoodTable;

/// Which nonlinearity follows the filter bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Activation {
    Relu,
    /// Static median over the extended `hops`-hop neighborhood.
    StaticMedian { hops: usize },
    /// Weighted sum of static medians at hops `0..=reach`.
    DynamicMedian { reach: usize },
}

impl Activation {
    /// Neighborhood reach the activation needs from the table.
    pub fn max_hop(&self) -> usize {
        match *self {
            Activation::Relu => 0,
            Activation::StaticMedian { hops } => hops,
            Activation::DynamicMedian { reach } => reach,
        }
    }

    /// Trainable parameters owned by the activation itself.
    pub fn param_count(&self) -> usize {
        match *self {
            Activation::DynamicMedian { reach } => reach + 1,
            _ => 0,
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Relu => write!(f, "relu"),
            Activation::StaticMedian { hops } => write!(f, "med:{hops}"),
            Activation::DynamicMedian { reach } => write!(f, "dyn-med:{reach}"),
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    /// Accepts `relu`, `med:<r>` (or `static-med:<r>`, `static-median:<r>`)
    /// and `dyn-med:<R>` (or `dynamic-median:<R>`).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config("activation", format!("unknown activation `{s}`"));
        if s == "relu" {
            return Ok(Activation::Relu);
        }
        let (kind, hops) = s.split_once(':').ok_or_else(bad)?;
        let hops: usize = hops.parse().map_err(|_| bad())?;
        match kind {
            "med" | "static-med" | "static-median" => Ok(Activation::StaticMedian { hops }),
            "dyn-med" | "dynamic-median" => Ok(Activation::DynamicMedian { reach: hops }),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for Activation {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Activation> for String {
    fn from(a: Activation) -> String {
        a.to_string()
    }
}

/// ReLU input mask.
#[derive(Debug, Clone, Default)]
pub struct ReluCache {
    dims: Option<(usize, usize, usize)>,
    active: Vec<bool>,
}

pub fn relu_forward(x: &SignalBatch, cache: &mut ReluCache) -> SignalBatch {
    cache.dims = Some(x.dims());
    cache.active.clear();
    cache.active.extend(x.values().iter().map(|&v| v > 0.0));
    let values = x.values().iter().map(|&v| v.max(0.0)).collect();
    SignalBatch::from_values(x.batch(), x.features(), x.nodes(), values)
        .expect("dimensions are copied from the input")
}

/// Subgradient 0 at the kink.
pub fn relu_backward(cache: &ReluCache, grad_out: &SignalBatch) -> Result<SignalBatch> {
    let dims = cache
        .dims
        .ok_or_else(|| Error::StaleCache("relu backward before forward".into()))?;
    if grad_out.dims() != dims {
        return Err(Error::StaleCache(format!(
            "relu cache holds {dims:?}, upstream gradient is {:?}",
            grad_out.dims()
        )));
    }
    let values = grad_out
        .values()
        .iter()
        .zip(&cache.active)
        .map(|(&g, &on)| if on { g } else { 0.0 })
        .collect();
    SignalBatch::from_values(dims.0, dims.1, dims.2, values)
}

/// Median selections saved by the forward pass.
///
/// For every `(sample, feature, node)` and every cached hop level this holds
/// the median value `z` and the id of the neighborhood member it came from.
#[derive(Debug, Clone, Default)]
pub struct MedianCache {
    dims: Option<(usize, usize, usize)>,
    hops: Vec<usize>,
    // [b][f][i][level]
    selected: Vec<usize>,
    stack: Vec<f64>,
}

impl MedianCache {
    /// Hop radii with cached selections, in storage order.
    pub fn hops(&self) -> &[usize] {
        &self.hops
    }

    /// Node whose value was the median for `(b, f, i)` at hop level `level`.
    pub fn selected(&self, b: usize, f: usize, i: usize, level: usize) -> usize {
        self.selected[self.offset(b, f, i) + level]
    }

    /// Median stack entry `[z_i]_level` for `(b, f, i)`.
    pub fn median(&self, b: usize, f: usize, i: usize, level: usize) -> f64 {
        self.stack[self.offset(b, f, i) + level]
    }

    fn offset(&self, b: usize, f: usize, i: usize) -> usize {
        let (_, features, nodes) = self.dims.expect("median cache is filled");
        ((b * features + f) * nodes + i) * self.hops.len()
    }

    fn check(&self, hops: &[usize], grad_out: &SignalBatch, what: &str) -> Result<()> {
        let dims = self
            .dims
            .ok_or_else(|| Error::StaleCache(format!("{what} backward before forward")))?;
        if self.hops != hops || grad_out.dims() != dims {
            return Err(Error::StaleCache(format!(
                "{what} cache holds hops {:?} on {dims:?}, backward asked for hops {hops:?} on {:?}",
                self.hops,
                grad_out.dims()
            )));
        }
        Ok(())
    }
}

/// Fills `cache` with medians of `x` at each radius in `hops`.
fn gather_medians(
    x: &SignalBatch,
    tbl: &NeighborhoodTable,
    hops: &[usize],
    cache: &mut MedianCache,
) -> Result<()> {
    let (batch, features, n) = x.dims();
    if n != tbl.n_nodes() {
        return Err(Error::Shape(format!(
            "signal on {n} nodes, neighborhood table covers {}",
            tbl.n_nodes()
        )));
    }
    for &r in hops {
        tbl.check_hop(r)?;
    }
    let levels = hops.len();
    cache.dims = Some((batch, features, n));
    cache.hops = hops.to_vec();
    cache.selected.clear();
    cache.selected.resize(batch * features * n * levels, 0);
    cache.stack.clear();
    cache.stack.resize(batch * features * n * levels, 0.0);

    let widest = hops.iter().map(|&r| tbl.max_size(r)).max().unwrap_or(1);
    let mut window: Vec<(f64, usize)> = Vec::with_capacity(widest);
    for b in 0..batch {
        for f in 0..features {
            let signal = x.signal(b, f);
            for i in 0..n {
                let base = ((b * features + f) * n + i) * levels;
                for (level, &r) in hops.iter().enumerate() {
                    let (value, node) = if r == 0 {
                        (signal[i], i)
                    } else {
                        let members = tbl.members(i, r);
                        window.clear();
                        window.extend(members.iter().map(|&j| (signal[j], j)));
                        select_rank(&mut window, median_rank(members.len()))
                    };
                    cache.stack[base + level] = value;
                    cache.selected[base + level] = node;
                }
            }
        }
    }
    Ok(())
}

/// Median of `x` over each node's extended `r`-hop neighborhood, per sample
/// and per feature.
pub fn static_median_forward(
    x: &SignalBatch,
    tbl: &NeighborhoodTable,
    r: usize,
    cache: &mut MedianCache,
) -> Result<SignalBatch> {
    gather_medians(x, tbl, &[r], cache)?;
    let (batch, features, n) = x.dims();
    SignalBatch::from_values(batch, features, n, cache.stack.clone())
}

pub fn static_median_backward(
    r: usize,
    cache: &MedianCache,
    grad_out: &SignalBatch,
) -> Result<SignalBatch> {
    cache.check(&[r], grad_out, "static median")?;
    let (batch, features, n) = grad_out.dims();
    let mut grad_x = SignalBatch::zeros(batch, features, n);
    for b in 0..batch {
        for f in 0..features {
            let gy = grad_out.signal(b, f);
            let base = (b * features + f) * n;
            let gx = grad_x.signal_mut(b, f);
            for (i, &g) in gy.iter().enumerate() {
                gx[cache.selected[base + i]] += g;
            }
        }
    }
    Ok(grad_x)
}

/// Trainable mixing weights of a dynamic median, `omega[r]` for hop `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicMedian {
    omega: Vec<f64>,
}

impl DynamicMedian {
    /// Starts as the identity: `omega = (1, 0, ..., 0)`.
    pub fn identity(reach: usize) -> Self {
        let mut omega = vec![0.0; reach + 1];
        omega[0] = 1.0;
        DynamicMedian { omega }
    }

    pub fn from_weights(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::Shape("dynamic median needs at least one weight".into()));
        }
        Ok(DynamicMedian { omega })
    }

    pub fn reach(&self) -> usize {
        self.omega.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.omega
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.omega
    }

    fn hops(&self) -> Vec<usize> {
        (0..self.omega.len()).collect()
    }
}

pub fn dynamic_median_forward(
    x: &SignalBatch,
    tbl: &NeighborhoodTable,
    p: &DynamicMedian,
    cache: &mut MedianCache,
) -> Result<SignalBatch> {
    gather_medians(x, tbl, &p.hops(), cache)?;
    let (batch, features, n) = x.dims();
    let values = cache
        .stack
        .chunks_exact(p.omega.len())
        .map(|z| z.iter().zip(&p.omega).fold(0.0, |acc, (zr, w)| acc + w * zr))
        .collect();
    SignalBatch::from_values(batch, features, n, values)
}

/// Returns `(grad_omega, grad_x)`.
pub fn dynamic_median_backward(
    p: &DynamicMedian,
    cache: &MedianCache,
    grad_out: &SignalBatch,
) -> Result<(Vec<f64>, SignalBatch)> {
    cache.check(&p.hops(), grad_out, "dynamic median")?;
    let levels = p.omega.len();
    let (batch, features, n) = grad_out.dims();
    let mut grad_omega = vec![0.0; levels];
    let mut grad_x = SignalBatch::zeros(batch, features, n);
    for b in 0..batch {
        for f in 0..features {
            let gy = grad_out.signal(b, f);
            let gx = grad_x.signal_mut(b, f);
            for (i, &g) in gy.iter().enumerate() {
                let base = ((b * features + f) * n + i) * levels;
                for r in 0..levels {
                    grad_omega[r] += g * cache.stack[base + r];
                    gx[cache.selected[base + r]] += p.omega[r] * g;
                }
            }
        }
    }
    Ok((grad_omega, grad_x))
}
