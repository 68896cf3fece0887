use std::path::PathBuf;

use rms_sched::sim::SimError;
use rms_sched::trainer::TrainError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("missing checkpoint: policy `dqn` needs --checkpoint pointing at a train output directory")]
    MissingCheckpoint,
    #[error("missing log: {0}")]
    MissingLog(PathBuf),
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::MissingCheckpoint | CliError::MissingLog(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn config(msg: impl std::fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::InvalidConfig(_) | TrainError::SpecMismatch(_) | TrainError::Sim(SimError::InvalidConfig(_)) => {
                CliError::config(e)
            }
            other => CliError::Runtime(other.into()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidConfig(_) | SimError::NegativeWeights => CliError::config(e),
            other => CliError::Runtime(other.into()),
        }
    }
}
