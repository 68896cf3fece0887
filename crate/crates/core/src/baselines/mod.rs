//! Non-learning dispatch rules: earliest due date, uniform random and
//! first-in-first-out.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::sim::{Action, SystemState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeuristicKind {
    Edf,
    Random,
    Fifo,
}

impl HeuristicKind {
    pub fn name(self) -> &'static str {
        match self {
            HeuristicKind::Edf => "edf",
            HeuristicKind::Random => "random",
            HeuristicKind::Fifo => "fifo",
        }
    }
}

#[derive(Debug, Clone)]
pub struct HeuristicPolicy {
    pub kind: HeuristicKind,
    rng: ChaCha8Rng,
}

/// Valid `(index, job, machine)` assignments under `mask`.
pub fn valid_pairs(state: &SystemState, mask: &[bool]) -> Vec<(usize, usize, usize)> {
    mask.iter()
        .enumerate()
        .filter(|(_, &ok)| ok)
        .filter_map(|(i, _)| match state.decode_action(i)? {
            Action::Assign { job, machine } => Some((i, job, machine)),
            Action::Idle => None,
        })
        .collect()
}

/// Time at which the pair's operation would finish if started as soon as the
/// machine frees up.
pub fn completion_estimate(state: &SystemState, job: usize, machine: usize) -> f64 {
    let m = &state.machines[machine];
    let j = &state.jobs[job];
    let p = j.next_process().unwrap_or(0);
    let r = m.reconfig_delay(p, true).unwrap_or(0.0);
    let tau = j.next_processing_time().unwrap_or(0.0);
    m.busy_until.max(state.clock) + m.setup_time + r + tau / m.efficiency
}

impl HeuristicPolicy {
    pub fn new(kind: HeuristicKind, seed: u64) -> Self {
        Self { kind, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn edf() -> Self {
        Self::new(HeuristicKind::Edf, 0)
    }

    pub fn fifo() -> Self {
        Self::new(HeuristicKind::Fifo, 0)
    }

    pub fn random(seed: u64) -> Self {
        Self::new(HeuristicKind::Random, seed)
    }

    /// Picks an action index allowed by `mask`; Idle when no assignment is.
    pub fn select(&mut self, state: &SystemState, mask: &[bool]) -> usize {
        let idle = state.action_space().idle();
        let pairs = valid_pairs(state, mask);
        if pairs.is_empty() {
            return idle;
        }
        let jobs = &state.jobs;
        let by = |a: f64, b: f64| a.total_cmp(&b);
        let pick = match self.kind {
            HeuristicKind::Random => pairs[self.rng.random_range(0..pairs.len())],
            HeuristicKind::Edf => *pairs
                .iter()
                .min_by(|a, b| {
                    by(jobs[a.1].due_date, jobs[b.1].due_date)
                        .then(a.1.cmp(&b.1))
                        .then(by(completion_estimate(state, a.1, a.2), completion_estimate(state, b.1, b.2)))
                        .then(a.2.cmp(&b.2))
                })
                .expect("non-empty"),
            HeuristicKind::Fifo => {
                let free_at = |m: usize| state.machines[m].busy_until.max(state.clock);
                *pairs
                    .iter()
                    .min_by(|a, b| {
                        by(jobs[a.1].arrival_time, jobs[b.1].arrival_time)
                            .then(a.1.cmp(&b.1))
                            .then(by(free_at(a.2), free_at(b.2)))
                            .then(a.2.cmp(&b.2))
                    })
                    .expect("non-empty")
            }
        };
        pick.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{JobDef, JobSpec, MachineDef, MachineSpec, ScenarioConfig};

    fn two_jobs(due: [f64; 2]) -> SystemState {
        let machine = |n: Vec<usize>, r: Vec<usize>, s: f64| MachineDef {
            native: n,
            reconfigurable: r,
            setup_time: s,
            flexibility: 0.9,
            reliability: 0.9,
            efficiency: 1.0,
            reconfig_time: Some(4.0),
        };
        let job = |d: f64| JobDef {
            processes: vec![0, 1, 2],
            times: vec![5.0, 5.0, 5.0],
            priority: 3,
            due_date: Some(d),
            arrival_time: 0.0,
        };
        let cfg = ScenarioConfig {
            machines: MachineSpec::explicit(vec![machine(vec![0, 1], vec![2, 3], 5.0), machine(vec![0, 2], vec![1, 3], 3.0)]),
            jobs: JobSpec { explicit: Some(vec![job(due[0]), job(due[1])]), ..JobSpec::generated(2) },
            process_count: 4,
            view_size: 2,
            horizon: 500.0,
            ..ScenarioConfig::reference()
        };
        SystemState::new(&cfg, 0).unwrap()
    }

    #[test]
    fn edf_prefers_earliest_due() {
        let s = two_jobs([50.0, 10.0]);
        let mask = s.feasible_actions().mask;
        let a = HeuristicPolicy::edf().select(&s, &mask);
        assert_eq!(s.decode_action(a), Some(Action::Assign { job: 1, machine: 1 }));
    }

    #[test]
    fn single_pair_all_agree() {
        let s = two_jobs([50.0, 10.0]);
        let mut mask = vec![false; s.action_space().len()];
        mask[s.action_space().encode(0, 0)] = true;
        mask[s.action_space().idle()] = true;
        let expect = s.action_space().encode(0, 0);
        for kind in [HeuristicKind::Edf, HeuristicKind::Random, HeuristicKind::Fifo] {
            assert_eq!(HeuristicPolicy::new(kind, 7).select(&s, &mask), expect);
        }
    }

    #[test]
    fn random_is_uniform_over_pairs() {
        let s = two_jobs([50.0, 10.0]);
        let space = s.action_space();
        let mut mask = vec![false; space.len()];
        let chosen = [space.encode(0, 0), space.encode(0, 1), space.encode(1, 0)];
        for &i in &chosen {
            mask[i] = true;
        }
        let mut p = HeuristicPolicy::random(11);
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            let a = p.select(&s, &mask);
            counts[chosen.iter().position(|&c| c == a).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 3e4 - 1.0 / 3.0).abs() < 0.02);
        }
    }

    #[test]
    fn nothing_valid_means_idle() {
        let s = two_jobs([50.0, 10.0]);
        let mut mask = vec![false; s.action_space().len()];
        mask[s.action_space().idle()] = true;
        assert_eq!(HeuristicPolicy::fifo().select(&s, &mask), s.action_space().idle());
    }
}
