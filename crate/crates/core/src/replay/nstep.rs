use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// A stored replay record. The bootstrap term is added at training time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub action: usize,
    pub n_step_return: f64,
    pub boot_obs: Vec<f64>,
    /// Valid actions at `boot_obs`.
    pub boot_mask: Vec<bool>,
    pub done: bool,
    pub gamma_n: f64,
    /// Target for the optional auxiliary utilization head.
    pub aux_target: f64,
}

#[derive(Debug, Clone)]
struct Pending {
    obs: Vec<f64>,
    action: usize,
    reward: f64,
    aux: f64,
}

/// Folds consecutive rewards into n-step returns.
#[derive(Debug, Clone)]
pub struct NStepAccumulator {
    pub n: usize,
    pub gamma: f64,
    window: VecDeque<Pending>,
}

impl NStepAccumulator {
    pub fn new(n: usize, gamma: f64) -> Self {
        assert!(n >= 1, "n must be at least 1");
        Self { n, gamma, window: VecDeque::with_capacity(n) }
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn clear(&mut self) {
        self.window.clear();
    }

    /// Adds one step. Returns the transitions that became complete: one when
    /// the window is full, or the whole remaining window when `done`.
    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        obs: Vec<f64>,
        action: usize,
        reward: f64,
        next_obs: &[f64],
        next_mask: &[bool],
        done: bool,
        aux: f64,
    ) -> Vec<Transition> {
        self.window.push_back(Pending { obs, action, reward, aux });
        let mut out = Vec::new();
        if done {
            while !self.window.is_empty() {
                out.push(self.fold(next_obs, next_mask, true));
                self.window.pop_front();
            }
        } else if self.window.len() == self.n {
            out.push(self.fold(next_obs, next_mask, false));
            self.window.pop_front();
        }
        out
    }

    fn fold(&self, next_obs: &[f64], next_mask: &[bool], done: bool) -> Transition {
        let mut g = 0.0;
        let mut discount = 1.0;
        for p in &self.window {
            g += discount * p.reward;
            discount *= self.gamma;
        }
        let head = self.window.front().expect("non-empty window");
        Transition {
            obs: head.obs.clone(),
            action: head.action,
            n_step_return: g,
            boot_obs: next_obs.to_vec(),
            boot_mask: next_mask.to_vec(),
            done,
            gamma_n: discount,
            aux_target: head.aux,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(acc: &mut NStepAccumulator, r: f64, done: bool) -> Vec<Transition> {
        acc.push(vec![r], 0, r, &[0.0], &[true], done, 0.0)
    }

    #[test]
    fn three_unit_rewards() {
        let mut acc = NStepAccumulator::new(3, 0.9);
        assert!(step(&mut acc, 1.0, false).is_empty());
        assert!(step(&mut acc, 1.0, false).is_empty());
        let t = step(&mut acc, 1.0, false);
        assert_eq!(t.len(), 1);
        assert!((t[0].n_step_return - 2.71).abs() < 1e-12);
        assert!((t[0].gamma_n - 0.729).abs() < 1e-12);
        assert!(!t[0].done);
    }

    #[test]
    fn one_step_episode() {
        let mut acc = NStepAccumulator::new(3, 0.9);
        let t = step(&mut acc, 4.0, true);
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].n_step_return, 4.0);
        assert_eq!(t[0].gamma_n, 0.9);
        assert!(t[0].done);
        assert!(acc.is_empty());
    }
}
