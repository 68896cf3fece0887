use rand::Rng;

use super::layers::{add_into, Module};
use super::tensor::{gemm, matmul, shape_check, softmax_in_place, Matrix, NnError, Tensor2};

/// Single-head scaled dot-product self-attention over a fixed number of
/// tokens per sample.
///
/// Input rows hold `tokens * token_dim` features; output rows hold
/// `tokens * d_v`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionBlock {
    pub wq: Tensor2,
    pub wk: Tensor2,
    pub wv: Tensor2,
    pub tokens: usize,
    pub d_k: usize,
}

#[derive(Debug, Clone)]
pub struct AttentionCache {
    x: Matrix,
    q: Vec<f64>,
    k: Vec<f64>,
    v: Vec<f64>,
    /// `batch * tokens * tokens` attention probabilities.
    pub weights: Vec<f64>,
}

impl AttentionBlock {
    pub fn new<R: Rng + ?Sized>(tokens: usize, token_dim: usize, d_k: usize, d_v: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (token_dim as f64).sqrt();
        Self {
            wq: Tensor2::uniform(token_dim, d_k, bound, rng),
            wk: Tensor2::uniform(token_dim, d_k, bound, rng),
            wv: Tensor2::uniform(token_dim, d_v, bound, rng),
            tokens,
            d_k,
        }
    }

    pub fn token_dim(&self) -> usize {
        self.wq.rows
    }

    pub fn d_v(&self) -> usize {
        self.wv.cols
    }

    pub fn in_dim(&self) -> usize {
        self.tokens * self.token_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.tokens * self.d_v()
    }

    pub fn forward(&self, x: &Matrix) -> Result<(Matrix, AttentionCache), NnError> {
        shape_check(x.cols == self.in_dim(), || {
            format!("attention input has {} columns, expected {}", x.cols, self.in_dim())
        })?;
        let (t, dk, dv) = (self.tokens, self.d_k, self.d_v());
        let batch = x.rows;
        let xt = x.clone().reshape(batch * t, self.token_dim());
        let q = matmul(&xt, &self.wq.data, dk).data;
        let k = matmul(&xt, &self.wk.data, dk).data;
        let v = matmul(&xt, &self.wv.data, dv).data;
        let scale = 1.0 / (dk as f64).sqrt();
        let mut weights = vec![0.0; batch * t * t];
        let mut out = Matrix::zeros(batch, t * dv);
        for b in 0..batch {
            let qb = &q[b * t * dk..(b + 1) * t * dk];
            let kb = &k[b * t * dk..(b + 1) * t * dk];
            let vb = &v[b * t * dv..(b + 1) * t * dv];
            let a = &mut weights[b * t * t..(b + 1) * t * t];
            gemm(false, true, t, t, dk, scale, qb, kb, 0.0, a);
            for row in a.chunks_mut(t) {
                softmax_in_place(row);
            }
            gemm(false, false, t, dv, t, 1.0, a, vb, 0.0, out.row_mut(b));
        }
        Ok((out, AttentionCache { x: xt, q, k, v, weights }))
    }

    pub fn backward(&mut self, cache: &AttentionCache, dy: &Matrix) -> Result<Matrix, NnError> {
        let (t, dk, dv) = (self.tokens, self.d_k, self.d_v());
        let batch = cache.x.rows / t;
        shape_check(dy.rows == batch && dy.cols == t * dv, || {
            format!("attention upstream gradient {}x{}", dy.rows, dy.cols)
        })?;
        let scale = 1.0 / (dk as f64).sqrt();
        let mut dq = vec![0.0; batch * t * dk];
        let mut dk_all = vec![0.0; batch * t * dk];
        let mut dv_all = vec![0.0; batch * t * dv];
        let mut da = vec![0.0; t * t];
        for b in 0..batch {
            let a = &cache.weights[b * t * t..(b + 1) * t * t];
            let qb = &cache.q[b * t * dk..(b + 1) * t * dk];
            let kb = &cache.k[b * t * dk..(b + 1) * t * dk];
            let vb = &cache.v[b * t * dv..(b + 1) * t * dv];
            let dob = dy.row(b);
            // dA = dO V^T, dV = A^T dO
            gemm(false, true, t, t, dv, 1.0, dob, vb, 0.0, &mut da);
            gemm(true, false, t, dv, t, 1.0, a, dob, 0.0, &mut dv_all[b * t * dv..(b + 1) * t * dv]);
            // softmax backward, row by row, into dS (reusing da)
            for (ar, dr) in a.chunks(t).zip(da.chunks_mut(t)) {
                let dot: f64 = ar.iter().zip(dr.iter()).map(|(p, g)| p * g).sum();
                for (p, g) in ar.iter().zip(dr.iter_mut()) {
                    *g = p * (*g - dot);
                }
            }
            gemm(false, false, t, dk, t, scale, &da, kb, 0.0, &mut dq[b * t * dk..(b + 1) * t * dk]);
            gemm(true, false, t, dk, t, scale, &da, qb, 0.0, &mut dk_all[b * t * dk..(b + 1) * t * dk]);
        }
        let rows = batch * t;
        let d_in = self.token_dim();
        let mut g = vec![0.0; d_in * dk];
        gemm(true, false, d_in, dk, rows, 1.0, &cache.x.data, &dq, 0.0, &mut g);
        add_into(&mut self.wq.grad, &g);
        gemm(true, false, d_in, dk, rows, 1.0, &cache.x.data, &dk_all, 0.0, &mut g);
        add_into(&mut self.wk.grad, &g);
        let mut gv = vec![0.0; d_in * dv];
        gemm(true, false, d_in, dv, rows, 1.0, &cache.x.data, &dv_all, 0.0, &mut gv);
        add_into(&mut self.wv.grad, &gv);
        let mut dx = Matrix::zeros(rows, d_in);
        gemm(false, true, rows, d_in, dk, 1.0, &dq, &self.wq.data, 0.0, &mut dx.data);
        gemm(false, true, rows, d_in, dk, 1.0, &dk_all, &self.wk.data, 1.0, &mut dx.data);
        gemm(false, true, rows, d_in, dv, 1.0, &dv_all, &self.wv.data, 1.0, &mut dx.data);
        Ok(dx.reshape(batch, t * d_in))
    }
}

impl Module for AttentionBlock {
    fn params(&self) -> Vec<&Tensor2> {
        vec![&self.wq, &self.wk, &self.wv]
    }
    fn params_mut(&mut self) -> Vec<&mut Tensor2> {
        vec![&mut self.wq, &mut self.wk, &mut self.wv]
    }
}
