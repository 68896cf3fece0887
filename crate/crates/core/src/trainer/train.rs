use serde::{Deserialize, Serialize};

use super::eval::evaluate;
use super::log::{TrainLog, TrainLogRow};
use super::rollout::{decision_mask, step_budget, Allocation, EvalPolicy};
use super::TrainError;
use crate::agent::{AgentConfig, EnhancedDqn, Mode, ObservationSpec};
use crate::negotiation::{NegotiationConfig, NegotiationRecord, Negotiator, RoundOutcome};
use crate::nn::PlateauScheduler;
use crate::replay::{NStepAccumulator, PerBuffer, PerConfig};
use crate::sim::{finalize_metrics, new_scenario, Action, JobDef, JobSpec, MachineDef, MachineSpec, ScenarioConfig, SystemState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub episodes: usize,
    /// Seeds the agent, the negotiator and the training job streams.
    pub seed: u64,
    pub agent: AgentConfig,
    pub replay: PerConfig,
    pub n_step: usize,
    pub negotiation: NegotiationConfig,
    pub allocation: Allocation,
    /// Decisions between gradient steps once the buffer is warm.
    pub learn_every: usize,
    /// Gradient steps taken at each learning point.
    pub updates_per_learn: usize,
    pub lr_factor: f64,
    pub lr_patience: usize,
    pub lr_floor: f64,
    /// Episodes between greedy evaluations; 0 disables them.
    pub eval_every: usize,
    pub eval_episodes: usize,
    pub eval_seeds: Vec<u64>,
    /// Episodes between checkpoint hook calls; 0 disables them.
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            episodes: 1000,
            seed: 0,
            agent: AgentConfig::default(),
            replay: PerConfig { beta_steps: 0, ..PerConfig::default() },
            n_step: 3,
            negotiation: NegotiationConfig::default(),
            allocation: Allocation::Guided,
            learn_every: 1,
            updates_per_learn: 1,
            lr_factor: 0.5,
            lr_patience: 50,
            lr_floor: 1e-5,
            eval_every: 0,
            eval_episodes: 20,
            eval_seeds: vec![0],
            checkpoint_every: 0,
        }
    }
}

impl TrainConfig {
    /// Short run with a small warmup and batch, for tests and demos.
    pub fn smoke() -> Self {
        let mut cfg = Self { episodes: 30, ..Self::default() };
        cfg.replay.warmup = 32;
        cfg.agent.batch_size = 16;
        cfg.agent.network.hidden = 32;
        cfg.agent.lr = 1e-3;
        cfg.agent.epsilon_decay = 0.9;
        cfg.updates_per_learn = 2;
        cfg.negotiation.train_every = 8;
        cfg
    }

    /// Two machines and five fixed jobs; reconfiguration is slow, so
    /// avoiding needless switches is what there is to learn.
    pub fn smoke_scenario() -> ScenarioConfig {
        let machine = |native: Vec<usize>, reconf: Vec<usize>, setup: f64| MachineDef {
            native,
            reconfigurable: reconf,
            setup_time: setup,
            flexibility: 0.85,
            reliability: 0.95,
            efficiency: 1.0,
            reconfig_time: Some(20.0),
        };
        let job = |processes: Vec<usize>, times: Vec<f64>, priority: u8, due: f64| JobDef {
            processes,
            times,
            priority,
            due_date: Some(due),
            arrival_time: 0.0,
        };
        ScenarioConfig {
            name: "smoke".into(),
            machines: MachineSpec::explicit(vec![machine(vec![0, 1], vec![2, 3], 2.0), machine(vec![2, 3], vec![0, 1], 3.0)]),
            jobs: JobSpec {
                explicit: Some(vec![
                    job(vec![0, 2, 1], vec![12.0, 8.0, 6.0], 3, 70.0),
                    job(vec![1, 3, 0], vec![10.0, 7.0, 9.0], 5, 50.0),
                    job(vec![2, 0, 3], vec![10.0, 15.0, 5.0], 2, 110.0),
                    job(vec![0, 1, 3], vec![6.0, 9.0, 7.0], 4, 80.0),
                    job(vec![3, 2, 1], vec![14.0, 6.0, 8.0], 1, 140.0),
                ]),
                ..JobSpec::generated(5)
            },
            process_count: 4,
            view_size: 5,
            horizon: 600.0,
            ..ScenarioConfig::reference()
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.into()));
        let a = &self.agent;
        if self.n_step == 0 || self.learn_every == 0 || self.updates_per_learn == 0 || a.batch_size == 0 || self.replay.capacity == 0 {
            return bad("n_step, learn_every, updates_per_learn, batch_size and replay capacity must be positive");
        }
        if !(a.lr > 0.0 && a.gamma > 0.0 && a.gamma <= 1.0 && a.tau > 0.0 && a.tau <= 1.0 && a.grad_clip > 0.0) {
            return bad("lr, gamma, tau and grad_clip must be positive (gamma, tau at most 1)");
        }
        if self.eval_every > 0 && (self.eval_episodes == 0 || self.eval_seeds.is_empty()) {
            return bad("periodic evaluation needs episodes and seeds");
        }
        if !(self.lr_factor > 0.0 && self.lr_factor <= 1.0) || self.lr_patience == 0 {
            return bad("lr_factor must lie in (0, 1] and lr_patience be positive");
        }
        Ok(())
    }
}

/// Job-stream seed of training episode `episode`.
pub fn train_episode_seed(seed: u64, episode: usize) -> u64 {
    seed.wrapping_mul(0xd1b5_4a32_d192_ed03).wrapping_add(episode as u64)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub agent: EnhancedDqn,
    /// Present when the scenario negotiates and allocation is guided.
    pub negotiator: Option<Negotiator>,
    pub log: TrainLog,
    pub negotiation_records: Vec<NegotiationRecord>,
}

struct PendingDecision {
    obs: Vec<f64>,
    action: usize,
    reward: f64,
    aux: f64,
    negotiation: Option<(RoundOutcome, usize)>,
}

#[derive(Default)]
struct EpisodeStats {
    learn_steps: usize,
    loss_sum: f64,
    grad_sum: f64,
    negotiations: usize,
    rounds_sum: usize,
    updates: usize,
    l_n: f64,
    l_m: f64,
}

fn mean_utilization(state: &SystemState) -> f64 {
    if state.machines.is_empty() || state.clock <= 0.0 {
        return 0.0;
    }
    state.machines.iter().map(|m| m.utilization(state.clock)).sum::<f64>() / state.machines.len() as f64
}

pub fn run_training(scenario: &ScenarioConfig, config: &TrainConfig) -> Result<TrainOutcome, TrainError> {
    run_training_with(scenario, config, |_, _| Ok(()))
}

/// Trains with `checkpoint(episode, agent)` called every
/// `config.checkpoint_every` episodes.
pub fn run_training_with(
    scenario: &ScenarioConfig,
    config: &TrainConfig,
    mut checkpoint: impl FnMut(usize, &EnhancedDqn) -> Result<(), TrainError>,
) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    scenario.validate()?;
    let probe = new_scenario(scenario, 0)?;
    let spec = ObservationSpec::of(&probe);
    let mut agent = EnhancedDqn::new(spec, AgentConfig { seed: config.seed, ..config.agent });
    let mut negotiator = (config.allocation == Allocation::Guided && scenario.toggles.negotiation).then(|| {
        Negotiator::new(probe.machines.len(), NegotiationConfig { seed: config.seed, ..config.negotiation })
    });
    let mut buffer = PerBuffer::new(config.replay);
    let mut scheduler = PlateauScheduler::new(config.lr_factor, config.lr_patience, config.lr_floor);
    let mut log = TrainLog::default();
    let mut records = Vec::new();
    let batch = config.agent.batch_size;

    for episode in 0..config.episodes {
        let seed = train_episode_seed(config.seed, episode);
        let mut state = new_scenario(scenario, seed)?.with_event_log(false);
        let mut acc = NStepAccumulator::new(config.n_step, config.agent.gamma);
        let mut pending: Option<PendingDecision> = None;
        let mut stats = EpisodeStats::default();
        let mut total_reward = 0.0;
        let mut decisions = 0usize;
        let epsilon = agent.epsilon;
        let budget = step_budget(&state);
        let mut steps = 0usize;

        let mut finish = |p: PendingDecision,
                          next_obs: &[f64],
                          next_mask: &[bool],
                          done: bool,
                          buffer: &mut PerBuffer,
                          negotiator: &mut Option<Negotiator>,
                          stats: &mut EpisodeStats|
         -> Result<(), TrainError> {
            for t in acc.push(p.obs, p.action, p.reward, next_obs, next_mask, done, p.aux) {
                buffer.push(t);
            }
            if let (Some(n), Some((outcome, rounds))) = (negotiator.as_mut(), p.negotiation) {
                let record = NegotiationRecord::from_outcome(&outcome, rounds, p.reward);
                stats.negotiations += 1;
                stats.rounds_sum += record.round;
                records.push(record.clone());
                if let Some(l) = n.push(record)? {
                    stats.updates += 1;
                    stats.l_n += l.l_n;
                    stats.l_m += l.l_m;
                }
            }
            Ok(())
        };

        loop {
            steps += 1;
            if steps > budget {
                return Err(TrainError::Stalled(steps));
            }
            if state.is_done() {
                if let Some(p) = pending.take() {
                    let obs = agent.prepare(&spec.encode(&state), false)?;
                    let mask = vec![false; spec.actions()];
                    finish(p, &obs, &mask, true, &mut buffer, &mut negotiator, &mut stats)?;
                }
                break;
            }
            let (mask, resolution) = decision_mask(&state, config.allocation, negotiator.as_ref());
            let idle = state.action_space().idle();
            if mask[idle] && mask.iter().filter(|&&b| b).count() == 1 {
                let out = state.step(Action::Idle)?;
                total_reward += out.reward;
                if let Some(p) = pending.as_mut() {
                    p.reward += out.reward;
                }
                continue;
            }
            let obs = agent.prepare(&spec.encode(&state), true)?;
            if let Some(p) = pending.take() {
                finish(p, &obs, &mask, false, &mut buffer, &mut negotiator, &mut stats)?;
            }
            let index = agent.act(&obs, &mask, Mode::Train)?;
            let action = state.decode_action(index).expect("mask only marks decodable actions");
            let negotiation = match (&resolution, action) {
                (Some(res), Action::Assign { job, .. }) => res.accepted(job).map(|o| (o.clone(), res.rounds)),
                _ => None,
            };
            let out = state.step(action)?;
            total_reward += out.reward;
            decisions += 1;
            pending = Some(PendingDecision { obs, action: index, reward: out.reward, aux: mean_utilization(&state), negotiation });

            let learn = decisions % config.learn_every == 0 && buffer.ready(batch);
            for _ in 0..if learn { config.updates_per_learn } else { 0 } {
                let report = agent.learn_from(&mut buffer)?;
                if !report.loss.is_finite() {
                    return Err(TrainError::NonFinite { what: "loss", episode, decision: decisions, value: report.loss });
                }
                stats.learn_steps += 1;
                stats.loss_sum += report.loss;
                stats.grad_sum += report.grad_norm;
            }
        }

        let metrics = finalize_metrics(&state)?;
        if !total_reward.is_finite() {
            return Err(TrainError::NonFinite { what: "episode reward", episode, decision: decisions, value: total_reward });
        }
        let lr = agent.lr();
        let beta = buffer.beta();
        agent.decay_epsilon();
        agent.set_lr(scheduler.observe(total_reward, lr));
        buffer.set_progress((episode + 1) as f64 / config.episodes as f64);

        let (eval_makespan, eval_tardiness) = if config.eval_every > 0 && (episode + 1) % config.eval_every == 0 {
            let policy = EvalPolicy::dqn(&agent, negotiator.as_ref()).with_allocation(config.allocation);
            let report = evaluate(scenario, &policy, &config.eval_seeds, config.eval_episodes, true)?;
            (Some(report.summary.makespan.mean), Some(report.summary.total_tardiness.mean))
        } else {
            (None, None)
        };
        let mean = |sum: f64, n: usize| if n == 0 { 0.0 } else { sum / n as f64 };
        log.push(TrainLogRow {
            episode,
            seed,
            reward: total_reward,
            decisions,
            learn_steps: stats.learn_steps,
            loss_mean: mean(stats.loss_sum, stats.learn_steps),
            nonfinite_losses: 0,
            grad_norm_mean: mean(stats.grad_sum, stats.learn_steps),
            epsilon,
            lr,
            beta,
            negotiations: stats.negotiations,
            rounds_mean: mean(stats.rounds_sum as f64, stats.negotiations),
            negotiation_updates: stats.updates,
            l_n: mean(stats.l_n, stats.updates),
            l_m: mean(stats.l_m, stats.updates),
            makespan: metrics.makespan,
            total_tardiness: metrics.total_tardiness,
            completion_rate: metrics.completion_rate,
            objective: metrics.objective,
            eval_makespan,
            eval_tardiness,
        });
        ::log::debug!("episode {episode}: reward {total_reward:.3}, makespan {:.1}", metrics.makespan);
        if config.checkpoint_every > 0 && (episode + 1) % config.checkpoint_every == 0 {
            checkpoint(episode, &agent)?;
        }
    }
    Ok(TrainOutcome { agent, negotiator, log, negotiation_records: records })
}
