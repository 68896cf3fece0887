use serde::{Deserialize, Serialize};

use super::layers::Module;
use super::tensor::{shape_check, NnError, Tensor2};

/// Adam with bias correction. Moments are kept in parameter visiting order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, step: 0, m: Vec::new(), v: Vec::new() }
    }

    pub fn step<M: Module + ?Sized>(&mut self, module: &mut M) {
        self.apply(module.params_mut());
    }

    pub fn apply(&mut self, params: Vec<&mut Tensor2>) {
        if self.m.len() != params.len() {
            self.m = params.iter().map(|p| vec![0.0; p.len()]).collect();
            self.v = self.m.clone();
        }
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for ((p, m), v) in params.into_iter().zip(&mut self.m).zip(&mut self.v) {
            debug_assert_eq!(p.len(), m.len());
            for i in 0..p.len() {
                let g = p.grad[i];
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g;
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g * g;
                let mhat = m[i] / bc1;
                let vhat = v[i] / bc2;
                p.data[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
            }
        }
    }
}

pub fn grad_norm(params: &[&Tensor2]) -> f64 {
    params.iter().flat_map(|p| p.grad.iter()).map(|g| g * g).sum::<f64>().sqrt()
}

/// Rescales all gradients so their global L2 norm is at most `max_norm`.
/// Returns the factor applied.
pub fn clip_gradients(params: Vec<&mut Tensor2>, max_norm: f64) -> f64 {
    assert!(max_norm > 0.0, "max_norm must be positive");
    let norm = params.iter().flat_map(|p| p.grad.iter()).map(|g| g * g).sum::<f64>().sqrt();
    let scale = if norm > max_norm { max_norm / norm } else { 1.0 };
    if scale < 1.0 {
        for p in params {
            p.grad.iter_mut().for_each(|g| *g *= scale);
        }
    }
    scale
}

/// `target <- tau * online + (1 - tau) * target`.
pub fn soft_update(target: Vec<&mut Tensor2>, online: Vec<&Tensor2>, tau: f64) -> Result<(), NnError> {
    shape_check(target.len() == online.len(), || {
        format!("{} target tensors vs {} online", target.len(), online.len())
    })?;
    for (t, o) in target.iter().zip(&online) {
        shape_check(t.rows == o.rows && t.cols == o.cols, || {
            format!("target {}x{} vs online {}x{}", t.rows, t.cols, o.rows, o.cols)
        })?;
    }
    for (t, o) in target.into_iter().zip(online) {
        if tau == 1.0 {
            t.data.copy_from_slice(&o.data);
        } else {
            for (a, b) in t.data.iter_mut().zip(&o.data) {
                *a = tau * b + (1.0 - tau) * *a;
            }
        }
    }
    Ok(())
}

/// Weights proportional to `1 / norm`, rescaled to sum to `budget`. Terms with
/// a non-positive norm get weight 0.
pub fn inverse_norm_weights(norms: &[f64], budget: f64) -> Vec<f64> {
    let raw: Vec<f64> = norms.iter().map(|&n| if n > 0.0 { 1.0 / n } else { 0.0 }).collect();
    let sum: f64 = raw.iter().sum();
    if sum <= 0.0 {
        return vec![0.0; norms.len()];
    }
    raw.iter().map(|r| budget * r / sum).collect()
}

/// Loss-term balancing by gradient-norm moving averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicLossWeights {
    pub enabled: bool,
    /// `(lambda_q, lambda_u, lambda_reg)` used verbatim when disabled.
    pub base: [f64; 3],
    pub decay: f64,
    ema: [f64; 3],
    seen: bool,
}

impl DynamicLossWeights {
    pub fn new(enabled: bool, base: [f64; 3]) -> Self {
        Self { enabled, base, decay: 0.9, ema: [0.0; 3], seen: false }
    }

    /// Feeds the latest gradient norms and returns the weights to use.
    ///
    /// Only terms whose base weight is positive take part; the others keep
    /// weight 0. The active weights sum to the sum of their base weights.
    pub fn update(&mut self, norms: [f64; 3]) -> [f64; 3] {
        if !self.enabled {
            return self.base;
        }
        for k in 0..3 {
            let n = norms[k].max(0.0);
            self.ema[k] = if self.seen { self.decay * self.ema[k] + (1.0 - self.decay) * n } else { n };
        }
        self.seen = true;
        let active: Vec<usize> = (0..3).filter(|&k| self.base[k] > 0.0).collect();
        let budget: f64 = active.iter().map(|&k| self.base[k]).sum();
        let norms: Vec<f64> = active.iter().map(|&k| self.ema[k]).collect();
        if norms.iter().any(|&n| n <= 0.0) {
            return self.base;
        }
        let w = inverse_norm_weights(&norms, budget);
        let mut out = [0.0; 3];
        for (i, &k) in active.iter().enumerate() {
            out[k] = w[i];
        }
        out
    }
}

/// Halves the learning rate when the tracked metric has not improved for
/// `patience` observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauScheduler {
    pub factor: f64,
    pub patience: usize,
    pub floor: f64,
    best: f64,
    since_best: usize,
}

impl Default for PlateauScheduler {
    fn default() -> Self {
        Self::new(0.5, 50, 1e-5)
    }
}

impl PlateauScheduler {
    pub fn new(factor: f64, patience: usize, floor: f64) -> Self {
        Self { factor, patience, floor, best: f64::NEG_INFINITY, since_best: 0 }
    }

    /// Records a metric where larger is better and returns the new rate.
    pub fn observe(&mut self, metric: f64, lr: f64) -> f64 {
        if metric > self.best {
            self.best = metric;
            self.since_best = 0;
            return lr;
        }
        self.since_best += 1;
        if self.since_best >= self.patience {
            self.since_best = 0;
            return (lr * self.factor).max(self.floor);
        }
        lr
    }
}

/// Layer shapes plus flat parameter values, in visiting order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSnapshot {
    pub shapes: Vec<(usize, usize)>,
    pub values: Vec<Vec<f64>>,
}

impl ParamSnapshot {
    pub fn of<M: Module + ?Sized>(module: &M) -> Self {
        let params = module.params();
        Self {
            shapes: params.iter().map(|p| (p.rows, p.cols)).collect(),
            values: params.iter().map(|p| p.data.clone()).collect(),
        }
    }

    pub fn restore<M: Module + ?Sized>(&self, module: &mut M) -> Result<(), NnError> {
        let params = module.params_mut();
        shape_check(params.len() == self.shapes.len() && self.values.len() == self.shapes.len(), || {
            format!("snapshot holds {} tensors, module has {}", self.shapes.len(), params.len())
        })?;
        for ((p, &(r, c)), v) in params.iter().zip(&self.shapes).zip(&self.values) {
            shape_check(p.rows == r && p.cols == c && v.len() == r * c, || {
                format!("snapshot tensor {r}x{c} vs module {}x{}", p.rows, p.cols)
            })?;
        }
        for (p, v) in params.into_iter().zip(&self.values) {
            p.data.copy_from_slice(v);
        }
        Ok(())
    }
}

/// Order-sensitive hash of all parameter bits, for change detection.
pub fn param_checksum<M: Module + ?Sized>(module: &M) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in module.params() {
        for x in &p.data {
            h ^= x.to_bits();
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tensor(vals: &[f64]) -> Tensor2 {
        Tensor2::from_vec(1, vals.len(), vals.to_vec())
    }

    #[test]
    fn clipping_examples() {
        let mut a = tensor(&[0.0, 0.0]);
        a.grad = vec![0.3, 0.4];
        assert_eq!(clip_gradients(vec![&mut a], 1.0), 1.0);
        assert_eq!(a.grad, vec![0.3, 0.4]);

        let mut b = tensor(&[0.0, 0.0]);
        b.grad = vec![6.0, 8.0];
        let s = clip_gradients(vec![&mut b], 1.0);
        assert!((s - 0.1).abs() < 1e-15);
        assert!((grad_norm(&[&b]) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn soft_update_examples() {
        let online = tensor(&[1.0, -2.0]);
        let mut target = tensor(&[0.0, 0.0]);
        soft_update(vec![&mut target], vec![&online], 0.005).unwrap();
        assert_eq!(target.data[0], 0.005);
        soft_update(vec![&mut target], vec![&online], 1.0).unwrap();
        assert_eq!(target.data, online.data);
    }

    #[test]
    fn soft_update_decays_geometrically() {
        let tau = 0.05;
        let online = tensor(&[1.0]);
        let mut target = tensor(&[0.0]);
        for k in 1..=100 {
            soft_update(vec![&mut target], vec![&online], tau).unwrap();
            let expected = 1.0 - (1.0 - tau).powi(k);
            assert!((target.data[0] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn soft_update_shape_mismatch() {
        let online = tensor(&[1.0, 2.0, 3.0]);
        let mut target = tensor(&[0.0]);
        assert!(soft_update(vec![&mut target], vec![&online], 0.5).is_err());
    }

    #[test]
    fn inverse_weights_by_hand() {
        let w = inverse_norm_weights(&[2.0, 1.0], 1.5);
        assert!((w[0] / w[1] - 0.5).abs() < 1e-12);
        assert!((w[0] + w[1] - 1.5).abs() < 1e-12);
        let eq = inverse_norm_weights(&[3.0, 3.0], 2.0);
        assert_eq!(eq[0], eq[1]);
    }

    #[test]
    fn disabled_weights_are_verbatim() {
        let mut d = DynamicLossWeights::new(false, [1.0, 0.3, 1e-4]);
        assert_eq!(d.update([5.0, 0.1, 2.0]), [1.0, 0.3, 1e-4]);
        let mut on = DynamicLossWeights::new(true, [1.0, 1.0, 0.0]);
        let w = on.update([4.0, 4.0, 0.0]);
        assert_eq!(w[0], w[1]);
        assert_eq!(w[2], 0.0);
    }

    #[test]
    fn adam_minimizes_a_quadratic() {
        let mut x = tensor(&[3.0, -4.0]);
        let mut opt = Adam::new(0.1);
        for _ in 0..2000 {
            x.grad = x.data.iter().map(|v| 2.0 * v).collect();
            opt.apply(vec![&mut x]);
        }
        assert!(x.data.iter().all(|v| v.abs() < 1e-3), "{:?}", x.data);
    }

    #[test]
    fn plateau_halves_and_floors() {
        let mut s = PlateauScheduler::new(0.5, 3, 1e-5);
        let mut lr = 1e-4;
        lr = s.observe(1.0, lr);
        for _ in 0..3 {
            lr = s.observe(0.5, lr);
        }
        assert_eq!(lr, 5e-5);
        for _ in 0..30 {
            lr = s.observe(0.0, lr);
        }
        assert_eq!(lr, 1e-5);
    }
}
