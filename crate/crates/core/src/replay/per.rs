use rand::Rng;
use serde::{Deserialize, Serialize};

use super::nstep::Transition;
use super::sumtree::SumTree;
use super::ReplayError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerConfig {
    pub capacity: usize,
    pub alpha: f64,
    pub beta_start: f64,
    pub beta_end: f64,
    /// Number of `sample` calls over which beta reaches `beta_end`. With 0,
    /// beta follows [`PerBuffer::set_progress`] instead.
    pub beta_steps: u64,
    pub priority_eps: f64,
    pub warmup: usize,
}

impl Default for PerConfig {
    fn default() -> Self {
        Self {
            capacity: 50_000,
            alpha: 0.6,
            beta_start: 0.4,
            beta_end: 1.0,
            beta_steps: 100_000,
            priority_eps: 1e-3,
            warmup: 1_000,
        }
    }
}

/// `(1 / (n * p))^beta`, before normalization by the batch maximum.
pub fn importance_weight(n: usize, p: f64, beta: f64) -> f64 {
    (1.0 / (n as f64 * p)).powf(beta)
}

#[derive(Debug, Clone)]
pub struct Sample<'a> {
    pub indices: Vec<usize>,
    /// Importance weights divided by the batch maximum.
    pub weights: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub transitions: Vec<&'a Transition>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BufferStats {
    pub size: usize,
    pub mean_priority: f64,
    pub beta: f64,
}

/// Proportional prioritized replay with FIFO eviction.
#[derive(Debug, Clone)]
pub struct PerBuffer {
    pub config: PerConfig,
    data: Vec<Transition>,
    /// Raw priorities `|delta| + eps`.
    priorities: Vec<f64>,
    tree: SumTree,
    next: usize,
    max_priority: f64,
    samples_drawn: u64,
    progress: f64,
}

impl PerBuffer {
    pub fn new(config: PerConfig) -> Self {
        assert!(config.capacity > 0, "capacity must be positive");
        Self {
            config,
            data: Vec::with_capacity(config.capacity.min(4096)),
            priorities: Vec::with_capacity(config.capacity.min(4096)),
            tree: SumTree::new(config.capacity),
            next: 0,
            max_priority: 1.0,
            samples_drawn: 0,
            progress: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.data.get(i)
    }

    pub fn ready(&self, batch: usize) -> bool {
        self.len() >= batch.max(self.config.warmup)
    }

    pub fn beta(&self) -> f64 {
        let c = &self.config;
        let frac = if c.beta_steps == 0 {
            self.progress
        } else {
            (self.samples_drawn as f64 / c.beta_steps as f64).min(1.0)
        };
        c.beta_start + frac * (c.beta_end - c.beta_start)
    }

    /// Sets the annealing fraction used when `beta_steps` is 0. It never
    /// moves backwards.
    pub fn set_progress(&mut self, fraction: f64) {
        self.progress = self.progress.max(fraction.clamp(0.0, 1.0));
    }

    /// Stores a transition with the current maximum priority.
    pub fn push(&mut self, t: Transition) {
        let p = self.max_priority;
        if self.data.len() < self.config.capacity {
            self.data.push(t);
            self.priorities.push(p);
        } else {
            self.data[self.next] = t;
            self.priorities[self.next] = p;
        }
        self.tree.set(self.next, p.powf(self.config.alpha));
        self.next = (self.next + 1) % self.config.capacity;
    }

    pub fn probability(&self, i: usize) -> f64 {
        self.tree.get(i) / self.tree.total()
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, batch: usize, rng: &mut R) -> Result<Sample<'_>, ReplayError> {
        let need = batch.max(self.config.warmup).max(1);
        if self.len() < need {
            return Err(ReplayError::NotEnoughSamples { have: self.len(), need });
        }
        let beta = self.beta();
        self.samples_drawn += 1;
        let total = self.tree.total();
        let n = self.len();
        let mut indices = Vec::with_capacity(batch);
        let mut probabilities = Vec::with_capacity(batch);
        let mut weights = Vec::with_capacity(batch);
        for _ in 0..batch {
            let i = self.tree.find(rng.random::<f64>() * total).min(n - 1);
            let p = self.tree.get(i) / total;
            indices.push(i);
            probabilities.push(p);
            weights.push(importance_weight(n, p, beta));
        }
        let max = weights.iter().copied().fold(0.0, f64::max);
        weights.iter_mut().for_each(|w| *w /= max);
        let transitions = indices.iter().map(|&i| &self.data[i]).collect();
        Ok(Sample { indices, weights, probabilities, transitions })
    }

    pub fn update_priorities(&mut self, indices: &[usize], td_errors: &[f64]) -> Result<(), ReplayError> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(ReplayError::IndexOutOfRange(bad));
        }
        for (&i, &d) in indices.iter().zip(td_errors) {
            let p = d.abs() + self.config.priority_eps;
            self.priorities[i] = p;
            self.max_priority = self.max_priority.max(p);
            self.tree.set(i, p.powf(self.config.alpha));
        }
        Ok(())
    }

    pub fn priority(&self, i: usize) -> f64 {
        self.priorities[i]
    }

    pub fn tree_total(&self) -> f64 {
        self.tree.total()
    }

    pub fn tree_leaf_sum(&self) -> f64 {
        self.tree.leaf_sum()
    }

    pub fn stats(&self) -> BufferStats {
        let mean = if self.is_empty() { 0.0 } else { self.priorities.iter().sum::<f64>() / self.len() as f64 };
        BufferStats { size: self.len(), mean_priority: mean, beta: self.beta() }
    }
}
