use crate::agent::EnhancedDqn;
use crate::baselines::{HeuristicKind, HeuristicPolicy};
use crate::negotiation::{earliest_available, restrict_mask, NegotiationConfig, Negotiator};
use crate::sim::{finalize_metrics, new_scenario, EpisodeMetrics, ScenarioConfig, SystemState};

use super::TrainError;

/// How the action mask handed to a policy is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Allocation {
    /// Every feasible pair.
    Direct,
    /// Only the pairs proposed by negotiation (when the scenario enables it)
    /// or by the earliest-available rule.
    Guided,
}

#[derive(Debug, Clone, Copy)]
pub enum Policy<'a> {
    Heuristic(HeuristicKind),
    Dqn(&'a EnhancedDqn),
}

impl Policy<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::Heuristic(k) => k.name(),
            Policy::Dqn(_) => "enhanced_dqn",
        }
    }
}

/// A frozen policy plus its allocation layer.
#[derive(Debug, Clone, Copy)]
pub struct EvalPolicy<'a> {
    pub policy: Policy<'a>,
    pub allocation: Allocation,
    pub negotiator: Option<&'a Negotiator>,
}

impl<'a> EvalPolicy<'a> {
    pub fn heuristic(kind: HeuristicKind) -> Self {
        Self { policy: Policy::Heuristic(kind), allocation: Allocation::Direct, negotiator: None }
    }

    pub fn dqn(agent: &'a EnhancedDqn, negotiator: Option<&'a Negotiator>) -> Self {
        Self { policy: Policy::Dqn(agent), allocation: Allocation::Guided, negotiator }
    }

    pub fn guided(self) -> Self {
        self.with_allocation(Allocation::Guided)
    }

    pub fn with_allocation(mut self, allocation: Allocation) -> Self {
        self.allocation = allocation;
        self
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub metrics: EpisodeMetrics,
    pub decisions: usize,
    /// Winning round of every negotiated assignment.
    pub negotiation_rounds: Vec<usize>,
    pub state: SystemState,
}

/// Upper bound on environment steps, as a guard against livelock.
pub(crate) fn step_budget(state: &SystemState) -> usize {
    let ops: usize = state.jobs.iter().map(|j| j.process_sequence.len()).sum();
    64 * (ops + state.machines.len() + 16)
}

/// Mask for the current decision, with the proposal pairs when guided.
pub(crate) fn decision_mask(
    state: &SystemState,
    allocation: Allocation,
    negotiator: Option<&Negotiator>,
) -> (Vec<bool>, Option<crate::negotiation::Resolution>) {
    let raw = state.feasible_actions();
    match allocation {
        Allocation::Direct => (raw.mask, None),
        Allocation::Guided => match negotiator.filter(|_| state.toggles.negotiation) {
            Some(n) => {
                let res = n.propose(state);
                (restrict_mask(state, &res.assignments, &raw), Some(res))
            }
            None => (restrict_mask(state, &earliest_available(state), &raw), None),
        },
    }
}

/// Plays one greedy episode of `policy` on a fresh instance of `scenario`.
pub fn run_episode(
    scenario: &ScenarioConfig,
    seed: u64,
    policy: &EvalPolicy<'_>,
    record_events: bool,
) -> Result<EpisodeResult, TrainError> {
    let mut state = new_scenario(scenario, seed)?.with_event_log(record_events);
    let fallback;
    let negotiator = match (policy.negotiator, policy.allocation, scenario.toggles.negotiation) {
        (Some(n), _, _) => Some(n),
        (None, Allocation::Guided, true) => {
            fallback = Negotiator::new(state.machines.len(), NegotiationConfig::default());
            Some(&fallback)
        }
        _ => None,
    };
    let mut heuristic = match policy.policy {
        Policy::Heuristic(k) => Some(HeuristicPolicy::new(k, seed ^ 0x5eed_0f_7a11)),
        Policy::Dqn(_) => None,
    };
    let spec = crate::agent::ObservationSpec::of(&state);
    let mut decisions = 0;
    let mut rounds = Vec::new();
    let budget = step_budget(&state);
    let mut steps = 0;
    while !state.is_done() {
        steps += 1;
        if steps > budget {
            return Err(TrainError::Stalled(steps));
        }
        let (mask, resolution) = decision_mask(&state, policy.allocation, negotiator);
        let idle = state.action_space().idle();
        let index = if mask.iter().filter(|&&b| b).count() == 1 && mask[idle] {
            idle
        } else {
            decisions += 1;
            match (&mut heuristic, policy.policy) {
                (Some(h), _) => h.select(&state, &mask),
                (None, Policy::Dqn(agent)) => {
                    let obs = agent.norm.normalize(&spec.encode(&state))?;
                    agent.act_greedy(&obs, &mask)?
                }
                (None, Policy::Heuristic(_)) => unreachable!("heuristic policy is built above"),
            }
        };
        let action = state.decode_action(index).expect("mask only marks decodable actions");
        if let (Some(res), crate::sim::Action::Assign { job, .. }) = (&resolution, action) {
            if let Some(o) = res.accepted(job) {
                rounds.push(o.round);
            }
        }
        state.step(action)?;
    }
    let metrics = finalize_metrics(&state)?;
    Ok(EpisodeResult { metrics, decisions, negotiation_rounds: rounds, state })
}
