/// Elementwise Huber value and derivative for residual `delta`.
pub fn huber(delta: f64, kappa: f64) -> (f64, f64) {
    if delta.abs() <= kappa {
        (0.5 * delta * delta, delta)
    } else {
        (kappa * (delta.abs() - 0.5 * kappa), kappa * delta.signum())
    }
}

/// Mean Huber loss and its gradient wrt `pred`.
pub fn huber_loss(pred: &[f64], target: &[f64], kappa: f64) -> (f64, Vec<f64>) {
    weighted_loss(pred, target, None, |d| huber(d, kappa))
}

pub fn mse_loss(pred: &[f64], target: &[f64]) -> (f64, Vec<f64>) {
    weighted_loss(pred, target, None, squared)
}

fn squared(delta: f64) -> (f64, f64) {
    (delta * delta, 2.0 * delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    #[default]
    Huber,
    Mse,
}

impl LossKind {
    /// `mean(w_i * l(pred_i - target_i))` and its gradient wrt `pred`.
    pub fn weighted(self, pred: &[f64], target: &[f64], weights: &[f64], kappa: f64) -> (f64, Vec<f64>) {
        match self {
            LossKind::Huber => weighted_loss(pred, target, Some(weights), |d| huber(d, kappa)),
            LossKind::Mse => weighted_loss(pred, target, Some(weights), squared),
        }
    }
}

fn weighted_loss(
    pred: &[f64],
    target: &[f64],
    weights: Option<&[f64]>,
    f: impl Fn(f64) -> (f64, f64),
) -> (f64, Vec<f64>) {
    assert_eq!(pred.len(), target.len());
    let n = pred.len().max(1) as f64;
    let mut total = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .enumerate()
        .map(|(i, (p, t))| {
            let w = weights.map_or(1.0, |w| w[i]);
            let (l, g) = f(p - t);
            total += w * l;
            w * g / n
        })
        .collect();
    (total / n, grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn huber_examples() {
        assert_eq!(huber_loss(&[0.5], &[0.0], 1.0).0, 0.125);
        assert_eq!(huber_loss(&[2.0], &[0.0], 1.0).0, 1.5);
        let (_, g) = huber_loss(&[-7.0, 9.0], &[0.0, 0.0], 1.0);
        assert_eq!(g, vec![-0.5, 0.5]);
    }

    #[test]
    fn huber_is_continuous_at_kappa() {
        let k = 1.3;
        let (a, _) = huber(k, k);
        let (b, _) = huber(k + 1e-12, k);
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn weighted_gradient_matches_difference() {
        let pred = [0.3, -2.5, 1.1];
        let target = [0.0, 0.0, 2.0];
        let w = [1.0, 0.5, 0.25];
        for kind in [LossKind::Huber, LossKind::Mse] {
            let (_, g) = kind.weighted(&pred, &target, &w, 1.0);
            for i in 0..3 {
                let mut up = pred;
                up[i] += 1e-6;
                let mut down = pred;
                down[i] -= 1e-6;
                let n = (kind.weighted(&up, &target, &w, 1.0).0 - kind.weighted(&down, &target, &w, 1.0).0) / 2e-6;
                assert!((n - g[i]).abs() < 1e-6);
            }
        }
    }
}
