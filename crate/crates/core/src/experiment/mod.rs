//! Config-driven experiments: data preparation, paired multi-round
//! comparisons and result files.

pub mod config;
mod run;

pub use config::{CorpusConfig, CorpusSource, ExperimentConfig, GraphSource, Task};
pub use run::{
    architecture, emit_curves, mean_std, round_data, run_rounds, train_one, write_atomic,
    Comparison, Resources, RoundData, RoundResult, SummaryRow, TrainedRun,
};
