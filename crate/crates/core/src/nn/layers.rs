use rand::Rng;
use rand_distr::StandardNormal;

use super::tensor::{gemm, matmul, shape_check, sigmoid, Matrix, NnError, Tensor2};

/// Anything holding trainable parameters, visited in a fixed order.
pub trait Module {
    fn params(&self) -> Vec<&Tensor2>;
    fn params_mut(&mut self) -> Vec<&mut Tensor2>;

    fn zero_grad(&mut self) {
        for p in self.params_mut() {
            p.zero_grad();
        }
    }

    fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    ReLU,
    Identity,
    Sigmoid,
}

impl Activation {
    fn apply(self, x: &mut [f64]) {
        match self {
            Activation::ReLU => x.iter_mut().for_each(|v| *v = v.max(0.0)),
            Activation::Identity => {}
            Activation::Sigmoid => x.iter_mut().for_each(|v| *v = sigmoid(*v)),
        }
    }

    /// Turns `dy` (gradient wrt the output) into the gradient wrt the
    /// pre-activation, given the activation output `y`.
    fn backprop(self, y: &[f64], dy: &mut [f64]) {
        match self {
            Activation::ReLU => {
                for (d, &v) in dy.iter_mut().zip(y) {
                    if v <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            Activation::Identity => {}
            Activation::Sigmoid => {
                for (d, &v) in dy.iter_mut().zip(y) {
                    *d *= v * (1.0 - v);
                }
            }
        }
    }
}

/// Saved forward values needed by the backward pass.
#[derive(Debug, Clone)]
pub struct LayerCache {
    pub input: Matrix,
    pub output: Matrix,
}

fn affine_forward(
    x: &Matrix,
    w: &[f64],
    b: &[f64],
    in_dim: usize,
    out_dim: usize,
    act: Activation,
) -> Result<(Matrix, LayerCache), NnError> {
    shape_check(x.cols == in_dim, || format!("input has {} columns, layer expects {in_dim}", x.cols))?;
    let mut y = matmul(x, w, out_dim);
    for r in 0..y.rows {
        for (v, bias) in y.row_mut(r).iter_mut().zip(b) {
            *v += bias;
        }
    }
    act.apply(&mut y.data);
    let cache = LayerCache { input: x.clone(), output: y.clone() };
    Ok((y, cache))
}

/// Returns (dW, db, dx) for `y = act(x W + b)`.
fn affine_backward(
    cache: &LayerCache,
    dy: &Matrix,
    w: &[f64],
    in_dim: usize,
    out_dim: usize,
    act: Activation,
) -> Result<(Vec<f64>, Vec<f64>, Matrix), NnError> {
    shape_check(dy.rows == cache.output.rows && dy.cols == out_dim, || {
        format!("upstream gradient {}x{} vs output {}x{out_dim}", dy.rows, dy.cols, cache.output.rows)
    })?;
    let mut dpre = dy.data.clone();
    act.backprop(&cache.output.data, &mut dpre);
    let batch = dy.rows;
    let mut dw = vec![0.0; in_dim * out_dim];
    gemm(true, false, in_dim, out_dim, batch, 1.0, &cache.input.data, &dpre, 0.0, &mut dw);
    let mut db = vec![0.0; out_dim];
    for r in 0..batch {
        for (acc, v) in db.iter_mut().zip(&dpre[r * out_dim..(r + 1) * out_dim]) {
            *acc += v;
        }
    }
    let mut dx = Matrix::zeros(batch, in_dim);
    gemm(false, true, batch, in_dim, out_dim, 1.0, &dpre, w, 0.0, &mut dx.data);
    Ok((dw, db, dx))
}

/// `y = act(x W + b)` with `W` stored `in x out`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub w: Tensor2,
    pub b: Tensor2,
    pub activation: Activation,
}

impl DenseLayer {
    /// Uniform fan-in initialization.
    pub fn new<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut R) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        Self {
            w: Tensor2::uniform(in_dim, out_dim, bound, rng),
            b: Tensor2::uniform(1, out_dim, bound, rng),
            activation,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.w.rows
    }

    pub fn out_dim(&self) -> usize {
        self.w.cols
    }

    pub fn forward(&self, x: &Matrix) -> Result<(Matrix, LayerCache), NnError> {
        affine_forward(x, &self.w.data, &self.b.data, self.in_dim(), self.out_dim(), self.activation)
    }

    /// Accumulates parameter gradients and returns the input gradient.
    pub fn backward(&mut self, cache: &LayerCache, dy: &Matrix) -> Result<Matrix, NnError> {
        let (dw, db, dx) =
            affine_backward(cache, dy, &self.w.data, self.in_dim(), self.out_dim(), self.activation)?;
        add_into(&mut self.w.grad, &dw);
        add_into(&mut self.b.grad, &db);
        Ok(dx)
    }
}

impl Module for DenseLayer {
    fn params(&self) -> Vec<&Tensor2> {
        vec![&self.w, &self.b]
    }
    fn params_mut(&mut self) -> Vec<&mut Tensor2> {
        vec![&mut self.w, &mut self.b]
    }
}

/// How noisy layers treat their perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    /// Use the currently stored noise draw.
    Sampled,
    /// Use the means only.
    Off,
}

/// Dense layer with learned Gaussian weight noise: `W = mu + sigma * eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyLayer {
    pub mu_w: Tensor2,
    pub sigma_w: Tensor2,
    pub mu_b: Tensor2,
    pub sigma_b: Tensor2,
    pub eps_w: Vec<f64>,
    pub eps_b: Vec<f64>,
    pub activation: Activation,
}

pub const SIGMA_INIT: f64 = 0.017;

impl NoisyLayer {
    pub fn new<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut R) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        Self {
            mu_w: Tensor2::uniform(in_dim, out_dim, bound, rng),
            sigma_w: Tensor2::filled(in_dim, out_dim, SIGMA_INIT),
            mu_b: Tensor2::uniform(1, out_dim, bound, rng),
            sigma_b: Tensor2::filled(1, out_dim, SIGMA_INIT),
            eps_w: vec![0.0; in_dim * out_dim],
            eps_b: vec![0.0; out_dim],
            activation,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.mu_w.rows
    }

    pub fn out_dim(&self) -> usize {
        self.mu_w.cols
    }

    /// Draws independent standard normal noise for every weight and bias.
    pub fn resample_noise<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.eps_w.iter_mut().for_each(|e| *e = rng.sample(StandardNormal));
        self.eps_b.iter_mut().for_each(|e| *e = rng.sample(StandardNormal));
    }

    pub fn effective_weights(&self, mode: NoiseMode) -> (Vec<f64>, Vec<f64>) {
        match mode {
            NoiseMode::Off => (self.mu_w.data.clone(), self.mu_b.data.clone()),
            NoiseMode::Sampled => {
                let w = combine(&self.mu_w.data, &self.sigma_w.data, &self.eps_w);
                let b = combine(&self.mu_b.data, &self.sigma_b.data, &self.eps_b);
                (w, b)
            }
        }
    }

    pub fn forward(&self, x: &Matrix, mode: NoiseMode) -> Result<(Matrix, NoisyCache), NnError> {
        let (w, b) = self.effective_weights(mode);
        let (y, layer) = affine_forward(x, &w, &b, self.in_dim(), self.out_dim(), self.activation)?;
        Ok((y, NoisyCache { layer, weights: w, mode }))
    }

    pub fn backward(&mut self, cache: &NoisyCache, dy: &Matrix) -> Result<Matrix, NnError> {
        let (dw, db, dx) =
            affine_backward(&cache.layer, dy, &cache.weights, self.in_dim(), self.out_dim(), self.activation)?;
        add_into(&mut self.mu_w.grad, &dw);
        add_into(&mut self.mu_b.grad, &db);
        if cache.mode == NoiseMode::Sampled {
            for ((g, d), e) in self.sigma_w.grad.iter_mut().zip(&dw).zip(&self.eps_w) {
                *g += d * e;
            }
            for ((g, d), e) in self.sigma_b.grad.iter_mut().zip(&db).zip(&self.eps_b) {
                *g += d * e;
            }
        }
        Ok(dx)
    }

    /// Keeps noise scales non-negative.
    pub fn clamp_sigma(&mut self) {
        for s in self.sigma_w.data.iter_mut().chain(self.sigma_b.data.iter_mut()) {
            *s = s.max(0.0);
        }
    }
}

impl Module for NoisyLayer {
    fn params(&self) -> Vec<&Tensor2> {
        vec![&self.mu_w, &self.sigma_w, &self.mu_b, &self.sigma_b]
    }
    fn params_mut(&mut self) -> Vec<&mut Tensor2> {
        vec![&mut self.mu_w, &mut self.sigma_w, &mut self.mu_b, &mut self.sigma_b]
    }
}

#[derive(Debug, Clone)]
pub struct NoisyCache {
    pub layer: LayerCache,
    weights: Vec<f64>,
    mode: NoiseMode,
}

fn combine(mu: &[f64], sigma: &[f64], eps: &[f64]) -> Vec<f64> {
    mu.iter().zip(sigma).zip(eps).map(|((m, s), e)| m + s * e).collect()
}

pub(crate) fn add_into(acc: &mut [f64], delta: &[f64]) {
    for (a, d) in acc.iter_mut().zip(delta) {
        *a += d;
    }
}
