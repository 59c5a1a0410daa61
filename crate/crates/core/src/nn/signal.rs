use crate::error::{Error, Result};

/// Batch of multi-feature graph signals, laid out `batch x features x nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBatch {
    batch: usize,
    features: usize,
    nodes: usize,
    values: Vec<f64>,
}

impl SignalBatch {
    pub fn zeros(batch: usize, features: usize, nodes: usize) -> Self {
        SignalBatch {
            batch,
            features,
            nodes,
            values: vec![0.0; batch * features * nodes],
        }
    }

    pub fn from_values(batch: usize, features: usize, nodes: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != batch * features * nodes {
            return Err(Error::Shape(format!(
                "{} values for a {batch}x{features}x{nodes} signal batch",
                values.len()
            )));
        }
        Ok(SignalBatch {
            batch,
            features,
            nodes,
            values,
        })
    }

    /// Single-feature batch from per-sample node vectors.
    pub fn from_signals<'a, I>(nodes: usize, signals: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut values = Vec::new();
        let mut batch = 0;
        for s in signals {
            if s.len() != nodes {
                return Err(Error::Shape(format!(
                    "signal of length {} on a {nodes}-node graph",
                    s.len()
                )));
            }
            values.extend_from_slice(s);
            batch += 1;
        }
        Ok(SignalBatch {
            batch,
            features: 1,
            nodes,
            values,
        })
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.batch, self.features, self.nodes)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Node vector of feature `f` in sample `b`.
    #[inline]
    pub fn signal(&self, b: usize, f: usize) -> &[f64] {
        let start = (b * self.features + f) * self.nodes;
        &self.values[start..start + self.nodes]
    }

    #[inline]
    pub fn signal_mut(&mut self, b: usize, f: usize) -> &mut [f64] {
        let start = (b * self.features + f) * self.nodes;
        &mut self.values[start..start + self.nodes]
    }

    /// All features of sample `b`, concatenated.
    pub fn sample(&self, b: usize) -> &[f64] {
        let len = self.features * self.nodes;
        &self.values[b * len..(b + 1) * len]
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(pos) => Err(Error::Validation(format!(
                "non-finite signal value at flat index {pos}"
            ))),
        }
    }

    pub(crate) fn expect_dims(&self, dims: (usize, usize, usize), what: &str) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::Shape(format!(
                "{what}: expected {:?}, got {:?}",
                dims,
                self.dims()
            )));
        }
        Ok(())
    }
}
