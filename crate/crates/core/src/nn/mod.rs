//! Layers, losses and the single-layer graph convolutional model.
//!
//! Every layer exposes a `*_forward` function that fills a cache and a
//! `*_backward` function that consumes it. Backward calls check the cache
//! against the upstream gradient and fail with [`Error::StaleCache`] when the
//! two come from different forward passes.
//!
//! [`Error::StaleCache`]: crate::error::Error::StaleCache

pub mod activation;
pub mod checkpoint;
pub mod filter;
pub mod model;
pub mod readout;
pub mod select;
mod signal;

pub use activation::{
    dynamic_median_backward, dynamic_median_forward, relu_backward, relu_forward,
    static_median_backward, static_median_forward, Activation, DynamicMedian, MedianCache,
    ReluCache,
};
pub use filter::{filter_backward, filter_forward, FilterBank, FilterCache};
pub use model::{Architecture, Gradients, GraphContext, Model, ModelCache, ModelParams};
pub use readout::{
    cross_entropy, readout_backward, readout_forward, softmax, ClassProbs, Readout, ReadoutCache,
};
pub use signal::SignalBatch;
