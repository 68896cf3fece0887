//! Discrete-event simulator of a reconfigurable job shop.

mod config;
mod events;
mod metrics;
mod reward;
mod state;

pub use config::{
    ArrivalMode, BreakdownSpec, FourthTerm, JobDef, JobSpec, MachineDef, MachineSpec, ObjectiveWeights,
    RewardConfig, ScenarioConfig, Toggles,
};
pub use events::{write_event_log, Event, EventKind};
pub use metrics::{compute_objective, finalize_metrics, EpisodeMetrics};
pub use reward::{compute_step_reward, RewardSnapshot};
pub use state::{
    Action, ActiveSet, Counters, Feasibility, FeasiblePair, Job, JobStatus, Machine, ProcessId, StepOutcome,
    SystemState,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error("objective weights must be non-negative")]
    NegativeWeights,
    #[error("infeasible assignment of job {job} to machine {machine} at t={clock}")]
    InfeasibleAction { job: usize, machine: usize, clock: f64 },
    #[error("clock {0} is at or beyond the horizon")]
    ClockOverflow(f64),
    #[error("episode already finished")]
    EpisodeFinished,
    #[error("unknown machine {0}")]
    UnknownMachine(usize),
    #[error("episode is not done")]
    EpisodeNotDone,
}

/// Flat action indices: `slot * machines + machine` for view slots, then Idle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionSpace {
    pub view_size: usize,
    pub machines: usize,
}

impl ActionSpace {
    pub fn new(view_size: usize, machines: usize) -> Self {
        Self { view_size, machines }
    }

    pub fn len(&self) -> usize {
        self.view_size * self.machines + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn idle(&self) -> usize {
        self.view_size * self.machines
    }

    pub fn encode(&self, slot: usize, machine: usize) -> usize {
        debug_assert!(slot < self.view_size && machine < self.machines);
        slot * self.machines + machine
    }

    pub fn decode(&self, index: usize) -> Option<(usize, usize)> {
        (index < self.idle()).then(|| (index / self.machines, index % self.machines))
    }
}

/// Builds the initial state of an episode.
pub fn new_scenario(config: &ScenarioConfig, seed: u64) -> Result<SystemState, SimError> {
    SystemState::new(config, seed)
}
