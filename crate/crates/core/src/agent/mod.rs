//! The learned scheduler: observation encoding, the Q network and the
//! double-DQN update.

mod checkpoint;
mod dqn;
mod network;
mod obs;

pub use checkpoint::CHECKPOINT_SCHEMA;
pub use dqn::{double_dqn_targets, masked_argmax, AgentConfig, EnhancedDqn, LearnReport, Mode};
pub use network::{NetworkShape, QCache, QNetwork};
pub use obs::ObservationSpec;

use thiserror::Error;

use crate::nn::NnError;
use crate::replay::ReplayError;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("no valid action in mask")]
    EmptyMask,
    #[error("empty training batch")]
    EmptyBatch,
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error("non-finite training values: {0}")]
    NonFinite(String),
    #[error("shape mismatch: {0}")]
    SpecMismatch(String),
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error("checkpoint schema mismatch: {0}")]
    SchemaVersionMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
