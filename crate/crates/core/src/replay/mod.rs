//! Prioritized n-step experience replay and online observation scaling.

mod norm;
mod nstep;
mod per;
mod sumtree;

pub use norm::RunningNorm;
pub use nstep::{NStepAccumulator, Transition};
pub use per::{importance_weight, BufferStats, PerBuffer, PerConfig, Sample};
pub use sumtree::SumTree;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReplayError {
    #[error("replay holds {have} transitions, {need} required")]
    NotEnoughSamples { have: usize, need: usize },
    #[error("replay index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}
