//! Single graph-convolutional layer followed by a softmax readout.
//!
//! `x -> filter bank -> activation -> fully connected -> softmax`. The filter
//! bank turns each input signal into `filters` features, all of which are
//! concatenated into the readout.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::activation::{
    dynamic_median_backward, dynamic_median_forward, relu_backward, relu_forward,
    static_median_backward, static_median_forward, Activation, DynamicMedian, MedianCache,
    ReluCache,
};
use super::filter::{filter_backward, filter_forward, FilterBank, FilterCache};
use super::readout::{
    cross_entropy, readout_backward, readout_forward, ClassProbs, Readout, ReadoutCache,
};
use super::SignalBatch;
use crate::error::{Error, Result};
use crate::graph::{
    build_neighborhood_table, normalized_adjacency, Direction, Graph, NeighborhoodTable,
    ShiftMatrix,
};

/// Layer sizes and activation choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub nodes: usize,
    pub features_in: usize,
    pub filters: usize,
    pub taps: usize,
    pub classes: usize,
    pub activation: Activation,
}

impl Architecture {
    /// Trainable parameters of the convolutional layer: filter taps plus the
    /// dynamic median weights, if any.
    pub fn conv_param_count(&self) -> usize {
        self.features_in * self.filters * self.taps + self.activation.param_count()
    }

    pub fn readout_param_count(&self) -> usize {
        (self.filters * self.nodes + 1) * self.classes
    }

    pub fn param_count(&self) -> usize {
        self.conv_param_count() + self.readout_param_count()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("nodes", self.nodes),
            ("features_in", self.features_in),
            ("filters", self.filters),
            ("taps", self.taps),
            ("classes", self.classes),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::config(name, "must be positive"));
            }
        }
        Ok(())
    }
}

/// Shift operator and neighborhood table shared by every model on one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphContext {
    shift: ShiftMatrix,
    table: NeighborhoodTable,
}

impl GraphContext {
    pub fn new(shift: ShiftMatrix, table: NeighborhoodTable) -> Result<Self> {
        if shift.n() != table.n_nodes() {
            return Err(Error::Shape(format!(
                "shift operator on {} nodes, neighborhood table on {}",
                shift.n(),
                table.n_nodes()
            )));
        }
        Ok(GraphContext { shift, table })
    }

    /// Eigenvalue-normalized adjacency plus neighborhoods up to `max_hop`.
    pub fn from_graph(g: &Graph, max_hop: usize, direction: Direction, tol: f64) -> Result<Self> {
        let shift = normalized_adjacency(g, tol)?;
        let table = build_neighborhood_table(g, max_hop, direction);
        GraphContext::new(shift, table)
    }

    pub fn shift(&self) -> &ShiftMatrix {
        &self.shift
    }

    pub fn table(&self) -> &NeighborhoodTable {
        &self.table
    }

    pub fn n_nodes(&self) -> usize {
        self.shift.n()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub filter: FilterBank,
    pub median: Option<DynamicMedian>,
    pub readout: Readout,
}

/// Tensor names, in the order used by [`ModelParams::tensors`] and
/// [`Gradients::tensors`].
pub const FILTER: &str = "filter";
pub const OMEGA: &str = "omega";
pub const READOUT_WEIGHT: &str = "readout.weight";
pub const READOUT_BIAS: &str = "readout.bias";

impl ModelParams {
    /// Seeded scaled-uniform filter and readout; dynamic median weights start
    /// at the identity `(1, 0, ..., 0)`.
    pub fn init(arch: &Architecture, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let filter = FilterBank::init_uniform(arch.features_in, arch.filters, arch.taps, &mut rng);
        let readout = Readout::init_uniform(arch.filters * arch.nodes, arch.classes, &mut rng);
        let median = match arch.activation {
            Activation::DynamicMedian { reach } => Some(DynamicMedian::identity(reach)),
            _ => None,
        };
        ModelParams {
            filter,
            median,
            readout,
        }
    }

    pub fn conv_param_count(&self) -> usize {
        self.filter.param_count() + self.median.as_ref().map_or(0, |m| m.weights().len())
    }

    pub fn param_count(&self) -> usize {
        self.conv_param_count() + self.readout.param_count()
    }

    pub fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        let mut out = vec![(FILTER, self.filter.coefficients())];
        if let Some(m) = &self.median {
            out.push((OMEGA, m.weights()));
        }
        out.push((READOUT_WEIGHT, self.readout.weight()));
        out.push((READOUT_BIAS, self.readout.bias()));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        let mut out = vec![(FILTER, self.filter.coefficients_mut())];
        if let Some(m) = &mut self.median {
            out.push((OMEGA, m.weights_mut()));
        }
        let (w, b) = self.readout.parts_mut();
        out.push((READOUT_WEIGHT, w));
        out.push((READOUT_BIAS, b));
        out
    }

    fn check(&self, arch: &Architecture) -> Result<()> {
        let expected_median = arch.activation.param_count();
        let got_median = self.median.as_ref().map_or(0, |m| m.weights().len());
        let f = &self.filter;
        if f.f_in() != arch.features_in
            || f.f_out() != arch.filters
            || f.taps() != arch.taps
            || got_median != expected_median
            || self.readout.in_dim() != arch.filters * arch.nodes
            || self.readout.classes() != arch.classes
        {
            return Err(Error::Shape(format!(
                "parameters do not match architecture {arch:?}"
            )));
        }
        Ok(())
    }
}

/// Gradients of the loss with respect to every trainable tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub filter: Vec<f64>,
    pub omega: Option<Vec<f64>>,
    pub readout_weight: Vec<f64>,
    pub readout_bias: Vec<f64>,
}

impl Gradients {
    pub fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        let mut out = vec![(FILTER, self.filter.as_slice())];
        if let Some(w) = &self.omega {
            out.push((OMEGA, w.as_slice()));
        }
        out.push((READOUT_WEIGHT, self.readout_weight.as_slice()));
        out.push((READOUT_BIAS, self.readout_bias.as_slice()));
        out
    }
}

/// Forward intermediates of every layer.
#[derive(Debug, Clone, Default)]
pub struct ModelCache {
    pub filter: FilterCache,
    pub relu: ReluCache,
    pub median: MedianCache,
    pub readout: ReadoutCache,
    probs: Option<ClassProbs>,
}

impl ModelCache {
    pub fn probs(&self) -> Option<&ClassProbs> {
        self.probs.as_ref()
    }
}

#[derive(Debug, Clone)]
pub struct Model {
    arch: Architecture,
    params: ModelParams,
    context: Arc<GraphContext>,
}

impl Model {
    pub fn new(arch: Architecture, context: Arc<GraphContext>, seed: u64) -> Result<Self> {
        let params = ModelParams::init(&arch, seed);
        Model::from_parts(arch, params, context)
    }

    pub fn from_parts(arch: Architecture, params: ModelParams, context: Arc<GraphContext>) -> Result<Self> {
        arch.validate()?;
        params.check(&arch)?;
        if context.n_nodes() != arch.nodes {
            return Err(Error::Shape(format!(
                "architecture has {} nodes, graph has {}",
                arch.nodes,
                context.n_nodes()
            )));
        }
        if arch.activation.max_hop() > context.table().max_hop() {
            return Err(Error::Validation(format!(
                "activation {} needs {} hops, neighborhood table reaches {}",
                arch.activation,
                arch.activation.max_hop(),
                context.table().max_hop()
            )));
        }
        Ok(Model {
            arch,
            params,
            context,
        })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ModelParams {
        &mut self.params
    }

    pub fn context(&self) -> &GraphContext {
        &self.context
    }

    pub fn forward(&self, x: &SignalBatch, cache: &mut ModelCache) -> Result<ClassProbs> {
        x.expect_dims((x.batch(), self.arch.features_in, self.arch.nodes), "model input")?;
        x.check_finite()?;
        let ctx = &*self.context;
        let filtered = filter_forward(&self.params.filter, ctx.shift(), x, &mut cache.filter)?;
        let activated = match self.arch.activation {
            Activation::Relu => relu_forward(&filtered, &mut cache.relu),
            Activation::StaticMedian { hops } => {
                static_median_forward(&filtered, ctx.table(), hops, &mut cache.median)?
            }
            Activation::DynamicMedian { .. } => {
                let p = self.median_params()?;
                dynamic_median_forward(&filtered, ctx.table(), p, &mut cache.median)?
            }
        };
        let probs = readout_forward(&self.params.readout, &activated, &mut cache.readout)?;
        cache.probs = Some(probs.clone());
        Ok(probs)
    }

    /// Mean cross-entropy of the cached forward pass and its gradients.
    pub fn backward(&self, cache: &ModelCache, labels: &[usize]) -> Result<(f64, Gradients)> {
        let probs = cache
            .probs
            .as_ref()
            .ok_or_else(|| Error::StaleCache("model backward before forward".into()))?;
        let (loss, grad_logits) = cross_entropy(probs, labels)?;
        let (readout_weight, readout_bias, grad_act) =
            readout_backward(&self.params.readout, &cache.readout, &grad_logits)?;
        let (omega, grad_filtered) = match self.arch.activation {
            Activation::Relu => (None, relu_backward(&cache.relu, &grad_act)?),
            Activation::StaticMedian { hops } => {
                (None, static_median_backward(hops, &cache.median, &grad_act)?)
            }
            Activation::DynamicMedian { .. } => {
                let (gw, gx) =
                    dynamic_median_backward(self.median_params()?, &cache.median, &grad_act)?;
                (Some(gw), gx)
            }
        };
        let (filter, _) = filter_backward(
            &self.params.filter,
            self.context.shift(),
            &cache.filter,
            &grad_filtered,
        )?;
        Ok((
            loss,
            Gradients {
                filter,
                omega,
                readout_weight,
                readout_bias,
            },
        ))
    }

    pub fn loss_and_gradients(&self, x: &SignalBatch, labels: &[usize]) -> Result<(f64, Gradients)> {
        let mut cache = ModelCache::default();
        self.forward(x, &mut cache)?;
        self.backward(&cache, labels)
    }

    pub fn loss(&self, x: &SignalBatch, labels: &[usize]) -> Result<f64> {
        let probs = self.predict(x)?;
        Ok(cross_entropy(&probs, labels)?.0)
    }

    pub fn predict(&self, x: &SignalBatch) -> Result<ClassProbs> {
        self.forward(x, &mut ModelCache::default())
    }

    fn median_params(&self) -> Result<&DynamicMedian> {
        self.params
            .median
            .as_ref()
            .ok_or_else(|| Error::Shape("dynamic median activation without weights".into()))
    }
}
