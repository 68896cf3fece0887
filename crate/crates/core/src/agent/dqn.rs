use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{NetworkShape, QNetwork};
use super::obs::ObservationSpec;
use super::AgentError;
use crate::nn::{
    clip_gradients, param_checksum, soft_update, Adam, DynamicLossWeights, LossKind, Matrix, Module, NoiseMode,
};
use crate::replay::{PerBuffer, RunningNorm, Transition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub network: NetworkShape,
    pub lr: f64,
    pub gamma: f64,
    pub batch_size: usize,
    pub tau: f64,
    pub epsilon_start: f64,
    pub epsilon_decay: f64,
    pub epsilon_min: f64,
    pub epsilon_greedy: bool,
    pub noisy: bool,
    pub loss: LossKind,
    pub huber_kappa: f64,
    pub grad_clip: f64,
    /// Weight of the auxiliary utilization loss; the head exists only when
    /// `network.aux_head` is set.
    pub aux_weight: f64,
    pub l2: f64,
    pub dynamic_loss_weights: bool,
    pub norm_clip: f64,
    pub seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            network: NetworkShape::default(),
            lr: 1e-4,
            gamma: 0.99,
            batch_size: 64,
            tau: 0.005,
            epsilon_start: 1.0,
            epsilon_decay: 0.995,
            epsilon_min: 0.05,
            epsilon_greedy: true,
            noisy: true,
            loss: LossKind::Huber,
            huber_kappa: 1.0,
            grad_clip: 10.0,
            aux_weight: 0.1,
            l2: 0.0,
            dynamic_loss_weights: false,
            norm_clip: 5.0,
            seed: 0,
        }
    }
}

/// Outcome of one gradient step.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnReport {
    pub loss: f64,
    pub td_errors: Vec<f64>,
    pub targets: Vec<f64>,
    pub q_taken: Vec<f64>,
    pub grad_norm: f64,
    pub loss_weights: [f64; 3],
}

/// Masked argmax with lowest-index ties. `None` when nothing is valid.
pub fn masked_argmax(values: &[f64], mask: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, (&v, &ok)) in values.iter().zip(mask).enumerate() {
        if ok && best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Double-DQN targets: the online values pick the bootstrap action, the
/// target values price it. Returns `(targets, chosen actions)`.
pub fn double_dqn_targets(
    batch: &[&Transition],
    online_next: &Matrix,
    target_next: &Matrix,
) -> (Vec<f64>, Vec<Option<usize>>) {
    batch
        .iter()
        .enumerate()
        .map(|(r, t)| {
            if t.done {
                return (t.n_step_return, None);
            }
            match masked_argmax(online_next.row(r), &t.boot_mask) {
                Some(a) => (t.n_step_return + t.gamma_n * target_next.get(r, a), Some(a)),
                None => (t.n_step_return, None),
            }
        })
        .unzip()
}

/// Dueling/attention double DQN with noisy heads, epsilon-greedy exploration
/// and an online observation normalizer.
#[derive(Debug, Clone)]
pub struct EnhancedDqn {
    pub config: AgentConfig,
    pub spec: ObservationSpec,
    pub online: QNetwork,
    pub target: QNetwork,
    pub norm: RunningNorm,
    pub epsilon: f64,
    pub optimizer: Adam,
    pub loss_weights: DynamicLossWeights,
    pub learn_steps: u64,
    rng: ChaCha8Rng,
}

impl EnhancedDqn {
    pub fn new(spec: ObservationSpec, config: AgentConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let online = QNetwork::new(spec, config.network, &mut rng);
        let target = online.clone();
        let aux = if config.network.aux_head { config.aux_weight } else { 0.0 };
        Self {
            spec,
            online,
            target,
            norm: RunningNorm::new(spec.dim(), config.norm_clip),
            epsilon: if config.epsilon_greedy { config.epsilon_start } else { 0.0 },
            optimizer: Adam::new(config.lr),
            loss_weights: DynamicLossWeights::new(config.dynamic_loss_weights, [1.0, aux, config.l2]),
            learn_steps: 0,
            rng,
            config,
        }
    }

    pub fn actions(&self) -> usize {
        self.spec.actions()
    }

    /// Standardizes a raw observation with the current statistics, updating
    /// them first when `observe` is set.
    pub fn prepare(&mut self, raw: &[f64], observe: bool) -> Result<Vec<f64>, AgentError> {
        if observe {
            self.norm.observe(raw)?;
        }
        Ok(self.norm.normalize(raw)?)
    }

    pub fn q_values(&self, obs: &[f64]) -> Result<Vec<f64>, AgentError> {
        Ok(self.online.q_values(obs, NoiseMode::Off)?)
    }

    /// Greedy action on the noise-free network. Never mutates the agent.
    pub fn act_greedy(&self, obs: &[f64], mask: &[bool]) -> Result<usize, AgentError> {
        self.check_mask(mask)?;
        let q = self.q_values(obs)?;
        masked_argmax(&q, mask).ok_or(AgentError::EmptyMask)
    }

    pub fn act(&mut self, obs: &[f64], mask: &[bool], mode: Mode) -> Result<usize, AgentError> {
        if mode == Mode::Eval {
            return self.act_greedy(obs, mask);
        }
        self.check_mask(mask)?;
        let valid: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
        if valid.is_empty() {
            return Err(AgentError::EmptyMask);
        }
        if self.config.epsilon_greedy && self.rng.random::<f64>() < self.epsilon {
            return Ok(valid[self.rng.random_range(0..valid.len())]);
        }
        let noise = if self.config.noisy {
            self.online.resample_noise(&mut self.rng);
            NoiseMode::Sampled
        } else {
            NoiseMode::Off
        };
        let q = self.online.q_values(obs, noise)?;
        masked_argmax(&q, mask).ok_or(AgentError::EmptyMask)
    }

    fn check_mask(&self, mask: &[bool]) -> Result<(), AgentError> {
        if mask.len() != self.actions() {
            return Err(AgentError::SpecMismatch(format!(
                "mask has {} entries, agent expects {}",
                mask.len(),
                self.actions()
            )));
        }
        Ok(())
    }

    /// Multiplies epsilon by the decay factor, down to the floor.
    pub fn decay_epsilon(&mut self) {
        if self.config.epsilon_greedy {
            self.epsilon = (self.epsilon * self.config.epsilon_decay).max(self.config.epsilon_min);
        }
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.optimizer.lr = lr;
    }

    pub fn lr(&self) -> f64 {
        self.optimizer.lr
    }

    pub fn checksum(&self) -> u64 {
        param_checksum(&self.online) ^ param_checksum(&self.target).rotate_left(17)
    }

    /// Samples a batch, learns from it and writes back the new priorities.
    pub fn learn_from(&mut self, buffer: &mut PerBuffer) -> Result<LearnReport, AgentError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng.random());
        let batch = self.config.batch_size;
        let sample = buffer.sample(batch, &mut rng)?;
        let indices = sample.indices.clone();
        let owned: Vec<Transition> = sample.transitions.into_iter().cloned().collect();
        let refs: Vec<&Transition> = owned.iter().collect();
        let report = self.learn_step(&refs, &sample.weights)?;
        buffer.update_priorities(&indices, &report.td_errors)?;
        Ok(report)
    }

    /// One double-DQN gradient step on `batch` with importance `weights`,
    /// followed by a soft target update.
    pub fn learn_step(&mut self, batch: &[&Transition], weights: &[f64]) -> Result<LearnReport, AgentError> {
        let n = batch.len();
        if n == 0 {
            return Err(AgentError::EmptyBatch);
        }
        let d = self.spec.dim();
        let noise = if self.config.noisy {
            self.online.resample_noise(&mut self.rng);
            NoiseMode::Sampled
        } else {
            NoiseMode::Off
        };
        // s and s' share one pass through the online net
        let mut rows = Vec::with_capacity(2 * n * d);
        for t in batch {
            rows.extend_from_slice(&t.obs);
        }
        for t in batch {
            if t.boot_obs.len() == d {
                rows.extend_from_slice(&t.boot_obs);
            } else {
                rows.extend(std::iter::repeat_n(0.0, d));
            }
        }
        let both = Matrix::from_vec(2 * n, d, rows);
        let (q_both, cache) = self.online.forward(&both, noise)?;
        let online_next = Matrix::from_vec(n, q_both.cols, q_both.data[n * q_both.cols..].to_vec());
        let next_obs = Matrix::from_vec(n, d, both.data[n * d..].to_vec());
        let (target_next, _) = self.target.forward(&next_obs, NoiseMode::Off)?;
        let (targets, _) = double_dqn_targets(batch, &online_next, &target_next);

        let a_dim = q_both.cols;
        let q_taken: Vec<f64> = batch.iter().enumerate().map(|(r, t)| q_both.get(r, t.action)).collect();
        let td_errors: Vec<f64> = q_taken.iter().zip(&targets).map(|(q, y)| (q - y).abs()).collect();
        let (q_loss, dq_taken) = self.config.loss.weighted(&q_taken, &targets, weights, self.config.huber_kappa);

        let (aux_loss, daux_raw) = match &cache.aux_out {
            Some(out) => {
                let pred = &out.data[..n];
                let tgt: Vec<f64> = batch.iter().map(|t| t.aux_target).collect();
                let (l, g) = LossKind::Mse.weighted(pred, &tgt, &vec![1.0; n], 1.0);
                (l, Some(g))
            }
            None => (0.0, None),
        };
        let params_sq: f64 = self.online.params().iter().flat_map(|p| p.data.iter()).map(|x| x * x).sum();
        let norms = [
            dq_taken.iter().map(|g| g * g).sum::<f64>().sqrt(),
            daux_raw.as_ref().map_or(0.0, |g| g.iter().map(|x| x * x).sum::<f64>().sqrt()),
            2.0 * params_sq.sqrt(),
        ];
        let lambda = self.loss_weights.update(norms);

        let mut dq = Matrix::zeros(2 * n, a_dim);
        for (r, t) in batch.iter().enumerate() {
            dq.data[r * a_dim + t.action] = lambda[0] * dq_taken[r];
        }
        let daux = daux_raw.map(|g| {
            let mut m = Matrix::zeros(2 * n, 1);
            for (r, v) in g.iter().enumerate() {
                m.data[r] = lambda[1] * v;
            }
            m
        });
        self.online.zero_grad();
        self.online.backward(&cache, &dq, daux.as_ref())?;
        if lambda[2] > 0.0 {
            for p in self.online.params_mut() {
                for (g, x) in p.grad.iter_mut().zip(&p.data) {
                    *g += 2.0 * lambda[2] * x;
                }
            }
        }
        let grad_norm = crate::nn::grad_norm(&self.online.params());
        if !grad_norm.is_finite() || !q_loss.is_finite() {
            return Err(AgentError::NonFinite(format!("loss {q_loss}, gradient norm {grad_norm}")));
        }
        clip_gradients(self.online.params_mut(), self.config.grad_clip);
        self.optimizer.step(&mut self.online);
        self.online.clamp_sigma();
        soft_update(self.target.params_mut(), self.online.params(), self.config.tau)?;
        self.learn_steps += 1;
        let loss = lambda[0] * q_loss + lambda[1] * aux_loss + lambda[2] * params_sq;
        Ok(LearnReport { loss, td_errors, targets, q_taken, grad_norm, loss_weights: lambda })
    }
}
