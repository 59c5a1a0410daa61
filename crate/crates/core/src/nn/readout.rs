//! Fully connected softmax readout and cross-entropy loss.

use rand::Rng;

use super::SignalBatch;
use crate::error::{Error, Result};

/// Probability floor inside the logarithm of the loss.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Readout {
    in_dim: usize,
    classes: usize,
    // [class][input]
    weight: Vec<f64>,
    bias: Vec<f64>,
}

impl Readout {
    pub fn zeros(in_dim: usize, classes: usize) -> Self {
        Readout {
            in_dim,
            classes,
            weight: vec![0.0; in_dim * classes],
            bias: vec![0.0; classes],
        }
    }

    pub fn from_parts(in_dim: usize, classes: usize, weight: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if weight.len() != in_dim * classes || bias.len() != classes {
            return Err(Error::Shape(format!(
                "readout {classes}x{in_dim} given {} weights and {} biases",
                weight.len(),
                bias.len()
            )));
        }
        Ok(Readout {
            in_dim,
            classes,
            weight,
            bias,
        })
    }

    /// Weights and biases uniform in `+-sqrt(1 / in_dim)`.
    pub fn init_uniform<R: Rng>(in_dim: usize, classes: usize, rng: &mut R) -> Self {
        let bound = (1.0 / in_dim.max(1) as f64).sqrt();
        let mut draw = |len: usize| -> Vec<f64> {
            (0..len).map(|_| rng.random_range(-bound..=bound)).collect()
        };
        let weight = draw(in_dim * classes);
        let bias = draw(classes);
        Readout {
            in_dim,
            classes,
            weight,
            bias,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn weight_mut(&mut self) -> &mut [f64] {
        &mut self.weight
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn parts_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.weight, &mut self.bias)
    }

    pub fn param_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }
}

/// Row-stochastic `batch x classes` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassProbs {
    batch: usize,
    classes: usize,
    values: Vec<f64>,
}

impl ClassProbs {
    pub fn from_values(batch: usize, classes: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != batch * classes {
            return Err(Error::Shape(format!(
                "{} probabilities for {batch} samples x {classes} classes",
                values.len()
            )));
        }
        Ok(ClassProbs {
            batch,
            classes,
            values,
        })
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, b: usize) -> &[f64] {
        &self.values[b * self.classes..(b + 1) * self.classes]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Most probable class of sample `b`; the lowest index wins ties.
    pub fn argmax(&self, b: usize) -> usize {
        let row = self.row(b);
        let mut best = 0;
        for (c, &p) in row.iter().enumerate().skip(1) {
            if p > row[best] {
                best = c;
            }
        }
        best
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReadoutCache {
    dims: Option<(usize, usize, usize)>,
    input: Vec<f64>,
}

/// In-place softmax with max subtraction.
pub fn softmax(logits: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in logits.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in logits.iter_mut() {
        *v /= sum;
    }
}

pub fn readout_forward(p: &Readout, x: &SignalBatch, cache: &mut ReadoutCache) -> Result<ClassProbs> {
    let (batch, features, nodes) = x.dims();
    if features * nodes != p.in_dim {
        return Err(Error::Shape(format!(
            "readout expects {} inputs, got {features} features x {nodes} nodes",
            p.in_dim
        )));
    }
    cache.dims = Some(x.dims());
    cache.input.clear();
    cache.input.extend_from_slice(x.values());

    let mut values = Vec::with_capacity(batch * p.classes);
    for b in 0..batch {
        let input = x.sample(b);
        let start = values.len();
        for c in 0..p.classes {
            let w = &p.weight[c * p.in_dim..(c + 1) * p.in_dim];
            let logit: f64 = w.iter().zip(input).map(|(a, b)| a * b).sum::<f64>() + p.bias[c];
            values.push(logit);
        }
        softmax(&mut values[start..]);
    }
    ClassProbs::from_values(batch, p.classes, values)
}

/// Mean negative log-likelihood and its gradient with respect to the logits,
/// `(probs - one_hot) / batch`.
pub fn cross_entropy(probs: &ClassProbs, labels: &[usize]) -> Result<(f64, Vec<f64>)> {
    if labels.len() != probs.batch {
        return Err(Error::Shape(format!(
            "{} labels for a batch of {}",
            labels.len(),
            probs.batch
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= probs.classes) {
        return Err(Error::Validation(format!(
            "label {bad} out of range for {} classes",
            probs.classes
        )));
    }
    let scale = 1.0 / probs.batch as f64;
    let mut loss = 0.0;
    let mut grad = probs.values.clone();
    for (b, &label) in labels.iter().enumerate() {
        loss -= probs.row(b)[label].max(PROB_FLOOR).ln();
        grad[b * probs.classes + label] -= 1.0;
    }
    grad.iter_mut().for_each(|g| *g *= scale);
    Ok((loss * scale, grad))
}

/// Returns `(grad_weight, grad_bias, grad_x)`.
pub fn readout_backward(
    p: &Readout,
    cache: &ReadoutCache,
    grad_logits: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, SignalBatch)> {
    let (batch, features, nodes) = cache
        .dims
        .ok_or_else(|| Error::StaleCache("readout backward before forward".into()))?;
    if features * nodes != p.in_dim || grad_logits.len() != batch * p.classes {
        return Err(Error::StaleCache(format!(
            "readout cache holds {batch}x{features}x{nodes}, gradient has {} entries",
            grad_logits.len()
        )));
    }
    let d = p.in_dim;
    let mut grad_w = vec![0.0; p.weight.len()];
    let mut grad_b = vec![0.0; p.classes];
    let mut grad_x = SignalBatch::zeros(batch, features, nodes);
    for b in 0..batch {
        let input = &cache.input[b * d..(b + 1) * d];
        let gx = &mut grad_x.values_mut()[b * d..(b + 1) * d];
        for c in 0..p.classes {
            let g = grad_logits[b * p.classes + c];
            grad_b[c] += g;
            if g == 0.0 {
                continue;
            }
            let w = &p.weight[c * d..(c + 1) * d];
            let gw = &mut grad_w[c * d..(c + 1) * d];
            for j in 0..d {
                gw[j] += g * input[j];
                gx[j] += g * w[j];
            }
        }
    }
    Ok((grad_w, grad_b, grad_x))
}
