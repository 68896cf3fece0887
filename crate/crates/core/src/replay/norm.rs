use serde::{Deserialize, Serialize};

use super::ReplayError;

/// Online per-feature mean/std (Welford), with clipped standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunningNorm {
    pub count: u64,
    pub mean: Vec<f64>,
    m2: Vec<f64>,
    pub clip: f64,
}

impl RunningNorm {
    pub fn new(dim: usize, clip: f64) -> Self {
        Self { count: 0, mean: vec![0.0; dim], m2: vec![0.0; dim], clip }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn check(&self, x: &[f64]) -> Result<(), ReplayError> {
        if x.len() != self.dim() {
            return Err(ReplayError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    pub fn observe(&mut self, x: &[f64]) -> Result<(), ReplayError> {
        self.check(x)?;
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let d = v - *m;
            *m += d / n;
            *s += d * (v - *m);
        }
        Ok(())
    }

    /// Population variance per feature.
    pub fn variance(&self) -> Vec<f64> {
        if self.count == 0 {
            return vec![0.0; self.dim()];
        }
        self.m2.iter().map(|s| (s / self.count as f64).max(0.0)).collect()
    }

    pub fn normalize(&self, x: &[f64]) -> Result<Vec<f64>, ReplayError> {
        self.check(x)?;
        let var = self.variance();
        Ok(x.iter()
            .zip(&self.mean)
            .zip(&var)
            .map(|((v, m), s)| ((v - m) / (s.sqrt() + 1e-8)).clamp(-self.clip, self.clip))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_stream_normalizes_to_zero() {
        let mut n = RunningNorm::new(3, 5.0);
        for _ in 0..10 {
            n.observe(&[1.5, -2.0, 0.0]).unwrap();
        }
        assert_eq!(n.normalize(&[1.5, -2.0, 0.0]).unwrap(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn two_points_by_hand() {
        let mut n = RunningNorm::new(1, 5.0);
        n.observe(&[0.0]).unwrap();
        n.observe(&[2.0]).unwrap();
        assert_eq!(n.mean, vec![1.0]);
        assert_eq!(n.variance(), vec![1.0]);
        let z = n.normalize(&[2.0]).unwrap()[0];
        assert!(z > 0.0 && z <= 5.0 && (z - 1.0).abs() < 1e-7);
    }

    #[test]
    fn normalize_is_pure_and_clipped() {
        let mut n = RunningNorm::new(1, 5.0);
        n.observe(&[0.0]).unwrap();
        n.observe(&[1.0]).unwrap();
        let snapshot = n.clone();
        assert_eq!(n.normalize(&[1000.0]).unwrap(), vec![5.0]);
        assert_eq!(n, snapshot);
        assert!(matches!(n.normalize(&[1.0, 2.0]), Err(ReplayError::DimensionMismatch { .. })));
    }
}
