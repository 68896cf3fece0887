//! Dense per-step reward shaping.

use super::config::RewardConfig;
use super::state::{Counters, SystemState};

/// The quantities the reward is a difference of.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardSnapshot {
    pub counters: Counters,
    pub tardiness: f64,
}

impl RewardSnapshot {
    pub fn of(state: &SystemState) -> Self {
        Self { counters: state.counters, tardiness: state.tardiness_to_date() }
    }
}

/// Unclipped shaped reward between two snapshots.
pub fn raw(before: &RewardSnapshot, after: &RewardSnapshot, cfg: &RewardConfig) -> f64 {
    let (b, a) = (&before.counters, &after.counters);
    let processes = (a.processes_completed - b.processes_completed) as f64;
    let jobs = a.completed_priority - b.completed_priority;
    let setup = a.setup_incurred - b.setup_incurred;
    let idle = a.idle_machine_time - b.idle_machine_time;
    let tardiness = after.tardiness - before.tardiness;
    cfg.process_bonus * processes + cfg.job_bonus * jobs
        - cfg.setup_penalty * setup
        - cfg.tardiness_penalty * tardiness
        - cfg.idle_penalty * idle
}

pub fn shaped(before: &RewardSnapshot, after: &RewardSnapshot, cfg: &RewardConfig) -> f64 {
    clip(raw(before, after, cfg), (cfg.clip_min, cfg.clip_max))
}

pub fn clip(value: f64, (lo, hi): (f64, f64)) -> f64 {
    value.clamp(lo, hi)
}

/// Shaped reward of the transition `before -> after`, clipped into `[lo, hi]`.
pub fn compute_step_reward(before: &SystemState, after: &SystemState, clip_range: (f64, f64)) -> f64 {
    let r = raw(&RewardSnapshot::of(before), &RewardSnapshot::of(after), &after.reward_config);
    clip(r, clip_range)
}
