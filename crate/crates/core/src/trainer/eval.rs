use serde::Serialize;

use super::rollout::{run_episode, EvalPolicy, Policy};
use super::TrainError;
use crate::agent::ObservationSpec;
use crate::parallel::{par_map, seq_map};
use crate::sim::{EpisodeMetrics, ScenarioConfig};

/// Seed of evaluation episode `episode` under base `seed`.
pub fn eval_episode_seed(seed: u64, episode: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (0x00e7_a1u64 << 32) ^ episode as u64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub seed: u64,
    pub episode: usize,
    pub metrics: EpisodeMetrics,
    pub negotiation_rounds: Vec<usize>,
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MetricSummary {
    pub makespan: Stat,
    pub total_tardiness: Stat,
    pub avg_utilization: Stat,
    pub total_setup_time: Stat,
    pub total_reconfig_time: Stat,
    pub reconfig_count: Stat,
    pub completion_rate: Stat,
    pub objective: Stat,
}

impl MetricSummary {
    pub fn of(rows: &[EvalRow]) -> Self {
        let col = |f: fn(&EpisodeMetrics) -> f64| Stat::of(&rows.iter().map(|r| f(&r.metrics)).collect::<Vec<_>>());
        Self {
            makespan: col(|m| m.makespan),
            total_tardiness: col(|m| m.total_tardiness),
            avg_utilization: col(|m| m.avg_utilization),
            total_setup_time: col(|m| m.total_setup_time),
            total_reconfig_time: col(|m| m.total_reconfig_time),
            reconfig_count: col(|m| m.reconfig_count as f64),
            completion_rate: col(|m| m.completion_rate),
            objective: col(|m| m.objective),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub policy: String,
    pub rows: Vec<EvalRow>,
    pub summary: MetricSummary,
}

/// Greedy evaluation of a frozen policy over `seeds x episodes` fresh
/// instances. Rows come back in `(seed, episode)` order either way.
pub fn evaluate(
    scenario: &ScenarioConfig,
    policy: &EvalPolicy<'_>,
    seeds: &[u64],
    episodes: usize,
    parallel: bool,
) -> Result<EvalReport, TrainError> {
    if let Policy::Dqn(agent) = policy.policy {
        let probe = crate::sim::new_scenario(scenario, 0)?;
        let spec = ObservationSpec::of(&probe);
        if spec != agent.spec {
            return Err(TrainError::SpecMismatch(format!("agent built for {:?}, scenario is {:?}", agent.spec, spec)));
        }
    }
    let items: Vec<(u64, usize)> = seeds.iter().flat_map(|&s| (0..episodes).map(move |e| (s, e))).collect();
    let run = |(seed, episode): (u64, usize)| -> Result<EvalRow, TrainError> {
        let r = run_episode(scenario, eval_episode_seed(seed, episode), policy, false)?;
        Ok(EvalRow { seed, episode, metrics: r.metrics, negotiation_rounds: r.negotiation_rounds })
    };
    let results = if parallel { par_map(items, run) } else { seq_map(items, run) };
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let summary = MetricSummary::of(&rows);
    Ok(EvalReport { policy: policy.policy.name().to_string(), rows, summary })
}
