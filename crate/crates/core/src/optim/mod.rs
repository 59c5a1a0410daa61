//! ADAM, the minibatch training loop and evaluation metrics.

mod adam;
mod train;

pub use adam::{AdamConfig, AdamState};
pub use train::{evaluate, train, EpochRecord, Metrics, TrainConfig, TrainReport};
