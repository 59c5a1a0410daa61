//! Graph neural networks with median activation functions.
//!
//! A single graph convolutional layer (a bank of polynomial graph filters)
//! followed by a pointwise ReLU, a static median over hop neighborhoods, or a
//! trainable mix of medians at several hop radii, then a softmax readout.
//! Forward and backward passes are hand-written and checked against finite
//! differences.
//!
//! - [`graph`]: graphs, shift operators, spectral normalization, hop tables
//! - [`nn`]: layers, model, checkpoints
//! - [`optim`]: ADAM, minibatch training, evaluation
//! - [`data`]: diffusion source-localization data, word adjacency networks
//! - [`experiment`]: JSON-configured multi-round comparisons

pub mod data;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod nn;
pub mod optim;

pub use error::{Error, Result};
