//! Training loop, greedy evaluation and their logs.

mod eval;
mod log;
mod rollout;
mod train;

pub use eval::{eval_episode_seed, evaluate, EvalReport, EvalRow, MetricSummary, Stat};
pub use log::{read_train_log, write_train_log, TrainLog, TrainLogRow};
pub use rollout::{run_episode, Allocation, EpisodeResult, EvalPolicy, Policy};
pub use train::{run_training, run_training_with, train_episode_seed, TrainConfig, TrainOutcome};

use thiserror::Error;

use crate::agent::AgentError;
use crate::negotiation::NegotiationError;
use crate::replay::ReplayError;
use crate::sim::SimError;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Negotiation(#[from] NegotiationError),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("policy does not fit scenario: {0}")]
    SpecMismatch(String),
    #[error("non-finite {what} at episode {episode}, decision {decision}: {value}")]
    NonFinite { what: &'static str, episode: usize, decision: usize, value: f64 },
    #[error("episode made no progress after {0} steps")]
    Stalled(usize),
    #[error("log io: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
