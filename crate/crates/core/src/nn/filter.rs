//! Polynomial graph filter bank `y_g = sum_f sum_k h[g,f,k] S^k x_f`.

use rand::Rng;

use super::SignalBatch;
use crate::error::{Error, Result};
use crate::graph::ShiftMatrix;

/// Filter taps, indexed `[out_feature][in_feature][tap]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    f_in: usize,
    f_out: usize,
    taps: usize,
    h: Vec<f64>,
}

impl FilterBank {
    pub fn zeros(f_in: usize, f_out: usize, taps: usize) -> Self {
        FilterBank {
            f_in,
            f_out,
            taps,
            h: vec![0.0; f_in * f_out * taps],
        }
    }

    pub fn from_coefficients(f_in: usize, f_out: usize, taps: usize, h: Vec<f64>) -> Result<Self> {
        if h.len() != f_in * f_out * taps {
            return Err(Error::Shape(format!(
                "{} filter coefficients for {f_out}x{f_in}x{taps}",
                h.len()
            )));
        }
        Ok(FilterBank { f_in, f_out, taps, h })
    }

    /// Uniform in `+-sqrt(1 / (f_in * taps))`.
    pub fn init_uniform<R: Rng>(f_in: usize, f_out: usize, taps: usize, rng: &mut R) -> Self {
        let bound = (1.0 / (f_in * taps) as f64).sqrt();
        let h = (0..f_in * f_out * taps)
            .map(|_| rng.random_range(-bound..=bound))
            .collect();
        FilterBank { f_in, f_out, taps, h }
    }

    pub fn f_in(&self) -> usize {
        self.f_in
    }

    pub fn f_out(&self) -> usize {
        self.f_out
    }

    pub fn taps(&self) -> usize {
        self.taps
    }

    pub fn param_count(&self) -> usize {
        self.h.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.h
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.h
    }

    #[inline]
    pub fn coeff(&self, g: usize, f: usize, k: usize) -> f64 {
        self.h[(g * self.f_in + f) * self.taps + k]
    }

    #[inline]
    fn index(&self, g: usize, f: usize, k: usize) -> usize {
        (g * self.f_in + f) * self.taps + k
    }
}

/// Shifted inputs `S^k x` saved by [`filter_forward`].
#[derive(Debug, Clone, Default)]
pub struct FilterCache {
    dims: Option<(usize, usize, usize, usize)>,
    // [b][f][k][node]
    shifted: Vec<f64>,
}

impl FilterCache {
    /// `S^k x[b, f]`
    pub fn shifted(&self, b: usize, f: usize, k: usize) -> &[f64] {
        let (_, f_in, n, taps) = self.dims.expect("filter cache is filled");
        let start = ((b * f_in + f) * taps + k) * n;
        &self.shifted[start..start + n]
    }
}

pub fn filter_forward(
    p: &FilterBank,
    s: &ShiftMatrix,
    x: &SignalBatch,
    cache: &mut FilterCache,
) -> Result<SignalBatch> {
    let (batch, f_in, n) = x.dims();
    if f_in != p.f_in {
        return Err(Error::Shape(format!(
            "filter expects {} input features, got {f_in}",
            p.f_in
        )));
    }
    if n != s.n() {
        return Err(Error::Shape(format!(
            "signal on {n} nodes, shift operator is {}x{}",
            s.n(),
            s.n()
        )));
    }
    let taps = p.taps;
    cache.shifted.clear();
    cache.shifted.resize(batch * f_in * taps * n, 0.0);
    for b in 0..batch {
        for f in 0..f_in {
            let base = ((b * f_in + f) * taps) * n;
            let block = &mut cache.shifted[base..base + taps * n];
            if taps == 0 {
                continue;
            }
            block[..n].copy_from_slice(x.signal(b, f));
            for k in 1..taps {
                let (prev, rest) = block.split_at_mut(k * n);
                s.apply(&prev[(k - 1) * n..], &mut rest[..n]);
            }
        }
    }
    cache.dims = Some((batch, f_in, n, taps));

    let mut out = SignalBatch::zeros(batch, p.f_out, n);
    for b in 0..batch {
        for g in 0..p.f_out {
            let y = out.signal_mut(b, g);
            for f in 0..f_in {
                for k in 0..taps {
                    let h = p.coeff(g, f, k);
                    if h == 0.0 {
                        continue;
                    }
                    let z = &cache.shifted[((b * f_in + f) * taps + k) * n..][..n];
                    for (yi, zi) in y.iter_mut().zip(z) {
                        *yi += h * zi;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Returns `(grad_h, grad_x)`.
pub fn filter_backward(
    p: &FilterBank,
    s: &ShiftMatrix,
    cache: &FilterCache,
    grad_out: &SignalBatch,
) -> Result<(Vec<f64>, SignalBatch)> {
    let (batch, f_in, n, taps) = cache
        .dims
        .ok_or_else(|| Error::StaleCache("filter backward before forward".into()))?;
    if f_in != p.f_in || taps != p.taps {
        return Err(Error::StaleCache(format!(
            "filter cache built for {f_in} inputs x {taps} taps, parameters have {} x {}",
            p.f_in, p.taps
        )));
    }
    if grad_out.dims() != (batch, p.f_out, n) {
        return Err(Error::StaleCache(format!(
            "filter cache holds a {batch}x{}x{n} forward, upstream gradient is {:?}",
            p.f_out,
            grad_out.dims()
        )));
    }

    let mut grad_h = vec![0.0; p.h.len()];
    for b in 0..batch {
        for g in 0..p.f_out {
            let gy = grad_out.signal(b, g);
            for f in 0..f_in {
                for k in 0..taps {
                    let z = cache.shifted(b, f, k);
                    grad_h[p.index(g, f, k)] += dot(gy, z);
                }
            }
        }
    }

    // grad_x[b,f] = sum_k (S^T)^k u_k with u_k = sum_g h[g,f,k] grad_out[b,g],
    // evaluated by Horner's rule from the highest tap down.
    let mut grad_x = SignalBatch::zeros(batch, f_in, n);
    let mut u = vec![0.0; n];
    let mut acc = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    for b in 0..batch {
        for f in 0..f_in {
            acc.iter_mut().for_each(|v| *v = 0.0);
            for k in (0..taps).rev() {
                u.iter_mut().for_each(|v| *v = 0.0);
                for g in 0..p.f_out {
                    let h = p.coeff(g, f, k);
                    if h == 0.0 {
                        continue;
                    }
                    for (ui, gi) in u.iter_mut().zip(grad_out.signal(b, g)) {
                        *ui += h * gi;
                    }
                }
                if k + 1 < taps {
                    s.apply_transpose(&acc, &mut tmp);
                    std::mem::swap(&mut acc, &mut tmp);
                }
                for (a, ui) in acc.iter_mut().zip(&u) {
                    *a += ui;
                }
            }
            grad_x.signal_mut(b, f).copy_from_slice(&acc);
        }
    }
    Ok((grad_h, grad_x))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
