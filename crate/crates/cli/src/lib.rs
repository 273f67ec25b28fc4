//! Reproducible experiment harness on top of `matchdecay-core`.
//!
//! An [`ExperimentConfig`] fully determines a run. Replicas draw from
//! per-replica ChaCha streams and are merged in replica order, so the CSV
//! produced by [`run_experiment`] is byte-identical for any thread count.
//! Long runs can be checkpointed and resumed in chunks of replicas.

pub mod checkpoint;
pub mod config;
pub mod experiments;
pub mod record;

pub use checkpoint::Checkpoint;
pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::{run_experiment, run_experiment_with_threads};
pub use record::{Binding, Check, Row, RunRecord};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] matchdecay_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("stopped after the chunk budget; {completed} replicas of `{task}` are saved")]
    Interrupted { task: String, completed: usize },
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}
