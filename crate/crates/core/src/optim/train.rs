use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{AdamConfig, AdamState};
use crate::data::{stratified_partition, Dataset};
use crate::error::{Error, Result};
use crate::nn::{Model, ModelCache, ModelParams};

/// Rows per forward pass during evaluation.
const EVAL_CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Seeds the per-epoch shuffles and the validation carve-out.
    pub seed: u64,
    /// Fraction of the training data held out for per-epoch validation.
    pub validation_fraction: Option<f64>,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config("epochs", "must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be positive"));
        }
        if let Some(f) = self.validation_fraction {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::config("validation_fraction", "must lie in (0, 1)"));
            }
        }
        self.adam.validate()
    }
}

/// Mean cross-entropy and accuracy of a model on a dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Sample-weighted mean of the batch losses seen during the epoch.
    pub train_loss: f64,
    pub validation: Option<Metrics>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    /// Metrics of the final parameters on the data actually trained on
    /// (the validation carve-out excluded).
    pub final_train: Metrics,
    pub final_params: ModelParams,
    /// Positions in the input dataset used for training, in dataset order.
    pub train_indices: Vec<usize>,
}

impl TrainReport {
    /// `epoch,train_loss,val_loss,val_acc,seconds`; validation columns are
    /// empty when no validation split was requested.
    pub fn to_csv(&self) -> String {
        self.csv(true)
    }

    /// Loss curves without timing: `epoch,train_loss,val_loss,val_acc`.
    pub fn curves_csv(&self) -> String {
        self.csv(false)
    }

    fn csv(&self, with_seconds: bool) -> String {
        let mut out = String::from("epoch,train_loss,val_loss,val_acc");
        if with_seconds {
            out.push_str(",seconds");
        }
        out.push('\n');
        for r in &self.epochs {
            let _ = write!(out, "{},{}", r.epoch, r.train_loss);
            match r.validation {
                Some(m) => {
                    let _ = write!(out, ",{},{}", m.loss, m.accuracy);
                }
                None => out.push_str(",,"),
            }
            if with_seconds {
                let _ = write!(out, ",{:.6}", r.seconds);
            }
            out.push('\n');
        }
        out
    }

    /// Equality ignoring wall-clock fields.
    pub fn same_trajectory(&self, other: &TrainReport) -> bool {
        self.final_train == other.final_train
            && self.final_params == other.final_params
            && self.train_indices == other.train_indices
            && self.epochs.len() == other.epochs.len()
            && self.epochs.iter().zip(&other.epochs).all(|(a, b)| {
                a.epoch == b.epoch && a.train_loss == b.train_loss && a.validation == b.validation
            })
    }
}

/// Minibatch ADAM on mean cross-entropy.
///
/// Each epoch visits the training samples in a fresh seeded order; the last
/// batch may be smaller than `batch_size`. A non-finite batch loss aborts
/// with [`Error::Diverged`].
pub fn train(model: &mut Model, dataset: &Dataset, cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::Validation("training dataset is empty".into()));
    }
    let (mut train_idx, val) = match cfg.validation_fraction {
        Some(f) => {
            // the carve-out keeps 1 - f for training
            let (tr, va) = stratified_partition(&dataset.labels(), dataset.n_classes(), 1.0 - f, cfg.seed)?;
            (tr, Some(dataset.subset(&va)))
        }
        None => ((0..dataset.len()).collect(), None),
    };
    train_idx.sort_unstable();

    let mut adam = AdamState::new(cfg.adam)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order = train_idx.clone();
    let mut cache = ModelCache::default();
    let mut epochs = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let start = Instant::now();
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let (x, labels) = dataset.batch(chunk);
            model.forward(&x, &mut cache)?;
            let (loss, grads) = model.backward(&cache, &labels)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, loss });
            }
            adam.step_model(model.params_mut(), &grads)?;
            loss_sum += loss * chunk.len() as f64;
        }
        let validation = val.as_ref().map(|v| evaluate(model, v)).transpose()?;
        epochs.push(EpochRecord {
            epoch,
            train_loss: loss_sum / order.len() as f64,
            validation,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    let final_train = evaluate(model, &dataset.subset(&train_idx))?;
    Ok(TrainReport {
        epochs,
        final_train,
        final_params: model.params().clone(),
        train_indices: train_idx,
    })
}

/// Mean cross-entropy and fraction of samples whose highest-probability
/// class (lowest index on ties) equals the label.
pub fn evaluate(model: &Model, dataset: &Dataset) -> Result<Metrics> {
    if dataset.is_empty() {
        return Err(Error::Validation("evaluation dataset is empty".into()));
    }
    let mut loss_sum = 0.0;
    let mut correct = 0usize;
    let indices: Vec<usize> = (0..dataset.len()).collect();
    for chunk in indices.chunks(EVAL_CHUNK) {
        let (x, labels) = dataset.batch(chunk);
        let probs = model.predict(&x)?;
        let (loss, _) = crate::nn::cross_entropy(&probs, &labels)?;
        loss_sum += loss * chunk.len() as f64;
        correct += labels
            .iter()
            .enumerate()
            .filter(|&(b, &y)| probs.argmax(b) == y)
            .count();
    }
    Ok(Metrics {
        loss: loss_sum / dataset.len() as f64,
        accuracy: correct as f64 / dataset.len() as f64,
    })
}
