use rand::Rng;

use super::layers::{Activation, Module, NoiseMode, NoisyCache, NoisyLayer};
use super::tensor::{shape_check, Matrix, NnError, Tensor2};

/// `Q = V + A - mean(A)` per row.
pub fn dueling_combine(value: &Matrix, advantage: &Matrix) -> Result<Matrix, NnError> {
    shape_check(value.cols == 1 && value.rows == advantage.rows, || {
        format!("value {}x{} vs advantage {}x{}", value.rows, value.cols, advantage.rows, advantage.cols)
    })?;
    let mut q = advantage.clone();
    for r in 0..q.rows {
        let v = value.data[r];
        let row = q.row_mut(r);
        let mean = row.iter().sum::<f64>() / row.len() as f64;
        row.iter_mut().for_each(|a| *a += v - mean);
    }
    Ok(q)
}

/// Gradients of the dueling combination: returns `(dV, dA)`.
pub fn dueling_backward(dq: &Matrix) -> (Matrix, Matrix) {
    let mut dv = Matrix::zeros(dq.rows, 1);
    let mut da = dq.clone();
    for r in 0..dq.rows {
        let row = da.row_mut(r);
        let sum: f64 = row.iter().sum();
        let mean = sum / row.len() as f64;
        row.iter_mut().for_each(|g| *g -= mean);
        dv.data[r] = sum;
    }
    (dv, da)
}

/// Noisy value and advantage streams, one hidden layer each.
#[derive(Debug, Clone, PartialEq)]
pub struct DuelingHead {
    pub value_stream: Vec<NoisyLayer>,
    pub advantage_stream: Vec<NoisyLayer>,
}

#[derive(Debug, Clone)]
pub struct DuelingCache {
    value: Vec<NoisyCache>,
    advantage: Vec<NoisyCache>,
}

impl DuelingHead {
    pub fn new<R: Rng + ?Sized>(in_dim: usize, hidden: usize, actions: usize, rng: &mut R) -> Self {
        Self {
            value_stream: vec![
                NoisyLayer::new(in_dim, hidden, Activation::ReLU, rng),
                NoisyLayer::new(hidden, 1, Activation::Identity, rng),
            ],
            advantage_stream: vec![
                NoisyLayer::new(in_dim, hidden, Activation::ReLU, rng),
                NoisyLayer::new(hidden, actions, Activation::Identity, rng),
            ],
        }
    }

    pub fn actions(&self) -> usize {
        self.advantage_stream.last().map_or(0, NoisyLayer::out_dim)
    }

    pub fn resample_noise<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for l in self.value_stream.iter_mut().chain(self.advantage_stream.iter_mut()) {
            l.resample_noise(rng);
        }
    }

    pub fn clamp_sigma(&mut self) {
        for l in self.value_stream.iter_mut().chain(self.advantage_stream.iter_mut()) {
            l.clamp_sigma();
        }
    }

    pub fn forward(&self, x: &Matrix, mode: NoiseMode) -> Result<(Matrix, DuelingCache), NnError> {
        let (v, value) = run_stream(&self.value_stream, x, mode)?;
        let (a, advantage) = run_stream(&self.advantage_stream, x, mode)?;
        Ok((dueling_combine(&v, &a)?, DuelingCache { value, advantage }))
    }

    pub fn backward(&mut self, cache: &DuelingCache, dq: &Matrix) -> Result<Matrix, NnError> {
        let (dv, da) = dueling_backward(dq);
        let mut dx = back_stream(&mut self.value_stream, &cache.value, dv)?;
        let dxa = back_stream(&mut self.advantage_stream, &cache.advantage, da)?;
        dx.data.iter_mut().zip(&dxa.data).for_each(|(a, b)| *a += b);
        Ok(dx)
    }
}

fn run_stream(layers: &[NoisyLayer], x: &Matrix, mode: NoiseMode) -> Result<(Matrix, Vec<NoisyCache>), NnError> {
    let mut caches = Vec::with_capacity(layers.len());
    let mut h = x.clone();
    for l in layers {
        let (y, c) = l.forward(&h, mode)?;
        caches.push(c);
        h = y;
    }
    Ok((h, caches))
}

fn back_stream(layers: &mut [NoisyLayer], caches: &[NoisyCache], mut g: Matrix) -> Result<Matrix, NnError> {
    for (l, c) in layers.iter_mut().zip(caches).rev() {
        g = l.backward(c, &g)?;
    }
    Ok(g)
}

impl Module for DuelingHead {
    fn params(&self) -> Vec<&Tensor2> {
        self.value_stream.iter().chain(&self.advantage_stream).flat_map(|l| l.params()).collect()
    }
    fn params_mut(&mut self) -> Vec<&mut Tensor2> {
        self.value_stream.iter_mut().chain(self.advantage_stream.iter_mut()).flat_map(|l| l.params_mut()).collect()
    }
}
