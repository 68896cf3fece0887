use serde::{Deserialize, Serialize};

use super::config::{FourthTerm, ObjectiveWeights};
use super::state::{JobStatus, SystemState};
use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub makespan: f64,
    pub total_tardiness: f64,
    /// Setup plus reconfiguration time.
    pub total_setup_time: f64,
    pub total_reconfig_time: f64,
    pub avg_utilization: f64,
    pub total_wait_time: f64,
    /// Sum over machines of (1 - utilization)^2.
    pub idle_penalty: f64,
    pub reconfig_count: usize,
    pub completion_rate: f64,
    pub objective: f64,
}

/// Weighted objective. The fourth term is wait time or squared idleness.
pub fn compute_objective(
    metrics: &EpisodeMetrics,
    weights: &ObjectiveWeights,
    fourth: FourthTerm,
) -> Result<f64, SimError> {
    if weights.as_array().iter().any(|w| !(*w >= 0.0)) {
        return Err(SimError::NegativeWeights);
    }
    let fourth_value = match fourth {
        FourthTerm::WaitTime => metrics.total_wait_time,
        FourthTerm::SquaredIdle => metrics.idle_penalty,
    };
    Ok(weights.makespan * metrics.makespan
        + weights.tardiness * metrics.total_tardiness
        + weights.setup * metrics.total_setup_time
        + weights.fourth * fourth_value)
}

pub fn finalize_metrics(state: &SystemState) -> Result<EpisodeMetrics, SimError> {
    if !state.is_done() {
        return Err(SimError::EpisodeNotDone);
    }
    let horizon = state.horizon;
    let elapsed = state.clock;
    let makespan = state
        .jobs
        .iter()
        .filter_map(|j| j.completion_time())
        .max_by(f64::total_cmp)
        .unwrap_or(horizon);
    let mut total_tardiness = 0.0;
    let mut total_wait_time = 0.0;
    let mut completed = 0usize;
    for j in &state.jobs {
        let end = match j.status {
            JobStatus::Completed { at } => {
                completed += 1;
                at
            }
            _ => horizon,
        };
        total_tardiness += j.priority as f64 * (end - j.due_date).max(0.0);
        total_wait_time += j.wait_time;
        if j.is_pending() && j.arrival_time <= elapsed {
            total_wait_time += (elapsed - j.ready_since).max(0.0);
        }
    }
    let m = state.machines.len() as f64;
    let utils: Vec<f64> = state.machines.iter().map(|mc| mc.utilization(elapsed)).collect();
    let avg_utilization = utils.iter().sum::<f64>() / m;
    let idle_penalty = utils.iter().map(|u| (1.0 - u).powi(2)).sum();
    let total_reconfig_time: f64 = state.machines.iter().map(|mc| mc.reconfig_time_accum).sum();
    let total_setup_time =
        state.machines.iter().map(|mc| mc.setup_time_accum).sum::<f64>() + total_reconfig_time;
    let mut metrics = EpisodeMetrics {
        makespan,
        total_tardiness,
        total_setup_time,
        total_reconfig_time,
        avg_utilization,
        total_wait_time,
        idle_penalty,
        reconfig_count: state.machines.iter().map(|mc| mc.reconfig_count).sum(),
        completion_rate: completed as f64 / state.jobs.len() as f64,
        objective: 0.0,
    };
    metrics.objective = compute_objective(&metrics, &state.weights, state.fourth_term)?;
    Ok(metrics)
}
