use rand::Rng;

use crate::nn::{Activation, DenseLayer, LayerCache, Matrix, Module, NnError, Tensor2};

/// Fixed per-feature scale applied to bid vectors before scoring, so that
/// time-valued entries sit near the unit range.
pub const BID_SCALE: [f64; 5] = [1.0, 1.0, 1.0, 0.1, 0.1];

/// `h(y) = sigmoid(W2 relu(W1 y + b1) + b2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringNet {
    pub l1: DenseLayer,
    pub l2: DenseLayer,
}

#[derive(Debug, Clone)]
pub struct ScoringCache {
    c1: LayerCache,
    c2: LayerCache,
}

impl ScoringNet {
    pub fn new<R: Rng + ?Sized>(hidden: usize, rng: &mut R) -> Self {
        Self {
            l1: DenseLayer::new(5, hidden, Activation::ReLU, rng),
            l2: DenseLayer::new(hidden, 1, Activation::Sigmoid, rng),
        }
    }

    /// Scores rows of (already scaled) bid vectors.
    pub fn forward(&self, y: &Matrix) -> Result<(Vec<f64>, ScoringCache), NnError> {
        let (h, c1) = self.l1.forward(y)?;
        let (s, c2) = self.l2.forward(&h)?;
        Ok((s.data, ScoringCache { c1, c2 }))
    }

    /// Returns the gradient wrt the scored bid rows.
    pub fn backward(&mut self, cache: &ScoringCache, dh: &[f64]) -> Result<Matrix, NnError> {
        let g = Matrix::from_vec(dh.len(), 1, dh.to_vec());
        let d1 = self.l2.backward(&cache.c2, &g)?;
        self.l1.backward(&cache.c1, &d1)
    }
}

impl Module for ScoringNet {
    fn params(&self) -> Vec<&Tensor2> {
        let mut v = self.l1.params();
        v.extend(self.l2.params());
        v
    }
    fn params_mut(&mut self) -> Vec<&mut Tensor2> {
        let mut v = self.l1.params_mut();
        v.extend(self.l2.params_mut());
        v
    }
}

/// Shared bid-adjustment policy: `y' = y + W2 relu(W1 y + b1 + e_m) + b2`,
/// where `e_m` is a learned embedding of the bidding machine.
#[derive(Debug, Clone, PartialEq)]
pub struct BidHead {
    pub w1: Tensor2,
    pub b1: Tensor2,
    pub embed: Tensor2,
    pub w2: Tensor2,
    pub b2: Tensor2,
}

#[derive(Debug, Clone)]
pub struct BidHeadCache {
    y: Matrix,
    machines: Vec<usize>,
    hidden: Matrix,
}

impl BidHead {
    pub fn new<R: Rng + ?Sized>(machines: usize, hidden: usize, rng: &mut R) -> Self {
        let bound = 1.0 / 5f64.sqrt();
        Self {
            w1: Tensor2::uniform(5, hidden, bound, rng),
            b1: Tensor2::zeros(1, hidden),
            embed: Tensor2::uniform(machines, hidden, 0.1, rng),
            w2: Tensor2::uniform(hidden, 5, 0.01, rng),
            b2: Tensor2::zeros(1, 5),
        }
    }

    pub fn hidden(&self) -> usize {
        self.w1.cols
    }

    pub fn forward(&self, y: &Matrix, machines: &[usize]) -> Result<(Matrix, BidHeadCache), NnError> {
        if y.cols != 5 || machines.len() != y.rows || machines.iter().any(|&m| m >= self.embed.rows) {
            return Err(NnError::ShapeMismatch(format!(
                "bid head got {}x{} bids for {} machines",
                y.rows,
                y.cols,
                machines.len()
            )));
        }
        let h = self.hidden();
        let mut hidden = crate::nn::matmul(y, &self.w1.data, h);
        for (r, &m) in machines.iter().enumerate() {
            let e = &self.embed.data[m * h..(m + 1) * h];
            for ((v, b), e) in hidden.row_mut(r).iter_mut().zip(&self.b1.data).zip(e) {
                *v = (*v + b + e).max(0.0);
            }
        }
        let mut out = crate::nn::matmul(&hidden, &self.w2.data, 5);
        for r in 0..out.rows {
            for ((o, b), yv) in out.row_mut(r).iter_mut().zip(&self.b2.data).zip(y.row(r)) {
                *o += b + yv;
            }
        }
        Ok((out, BidHeadCache { y: y.clone(), machines: machines.to_vec(), hidden }))
    }

    pub fn backward(&mut self, cache: &BidHeadCache, dout: &Matrix) -> Result<Matrix, NnError> {
        let h = self.hidden();
        let n = dout.rows;
        let mut dw2 = vec![0.0; h * 5];
        crate::nn::gemm(true, false, h, 5, n, 1.0, &cache.hidden.data, &dout.data, 0.0, &mut dw2);
        let mut dhid = Matrix::zeros(n, h);
        crate::nn::gemm(false, true, n, h, 5, 1.0, &dout.data, &self.w2.data, 0.0, &mut dhid.data);
        for (g, v) in dhid.data.iter_mut().zip(&cache.hidden.data) {
            if *v <= 0.0 {
                *g = 0.0;
            }
        }
        let mut dw1 = vec![0.0; 5 * h];
        crate::nn::gemm(true, false, 5, h, n, 1.0, &cache.y.data, &dhid.data, 0.0, &mut dw1);
        let mut dy = dout.clone();
        crate::nn::gemm(false, true, n, 5, h, 1.0, &dhid.data, &self.w1.data, 1.0, &mut dy.data);
        for (a, d) in self.w2.grad.iter_mut().zip(&dw2) {
            *a += d;
        }
        for (a, d) in self.w1.grad.iter_mut().zip(&dw1) {
            *a += d;
        }
        for r in 0..n {
            let m = cache.machines[r];
            for (c, g) in dhid.row(r).iter().enumerate() {
                self.b1.grad[c] += g;
                self.embed.grad[m * h + c] += g;
            }
            for (c, g) in dout.row(r).iter().enumerate() {
                self.b2.grad[c] += g;
            }
        }
        Ok(dy)
    }
}

impl Module for BidHead {
    fn params(&self) -> Vec<&Tensor2> {
        vec![&self.w1, &self.b1, &self.embed, &self.w2, &self.b2]
    }
    fn params_mut(&mut self) -> Vec<&mut Tensor2> {
        vec![&mut self.w1, &mut self.b1, &mut self.embed, &mut self.w2, &mut self.b2]
    }
}

pub fn scale_bids(bids: &[[f64; 5]]) -> Matrix {
    let mut m = Matrix::zeros(bids.len(), 5);
    for (r, y) in bids.iter().enumerate() {
        for (c, v) in m.row_mut(r).iter_mut().enumerate() {
            *v = y[c] * BID_SCALE[c];
        }
    }
    m
}
