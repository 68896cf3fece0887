use rand::Rng;
use serde::{Deserialize, Serialize};

use super::obs::ObservationSpec;
use crate::nn::{
    Activation, AttentionBlock, AttentionCache, DenseLayer, DuelingCache, DuelingHead, LayerCache, Matrix, Module,
    NnError, NoiseMode, Tensor2,
};

/// Architecture knobs of [`QNetwork`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkShape {
    pub hidden: usize,
    pub d_k: usize,
    pub d_v: usize,
    pub aux_head: bool,
}

impl Default for NetworkShape {
    fn default() -> Self {
        Self { hidden: 128, d_k: 16, d_v: 16, aux_head: false }
    }
}

/// Dense feature stack and machine-token attention feeding a noisy dueling
/// head. An optional sigmoid head regresses average utilization.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    pub spec: ObservationSpec,
    pub shape: NetworkShape,
    pub dense1: DenseLayer,
    pub dense2: DenseLayer,
    pub attention: AttentionBlock,
    pub head: DuelingHead,
    pub aux: Option<DenseLayer>,
}

#[derive(Debug, Clone)]
pub struct QCache {
    c1: LayerCache,
    c2: LayerCache,
    att: AttentionCache,
    head: DuelingCache,
    aux: Option<LayerCache>,
    /// Auxiliary prediction per row, when the head exists.
    pub aux_out: Option<Matrix>,
}

impl QNetwork {
    pub fn new<R: Rng + ?Sized>(spec: ObservationSpec, shape: NetworkShape, rng: &mut R) -> Self {
        let h = shape.hidden;
        let dense1 = DenseLayer::new(spec.dim(), h, Activation::ReLU, rng);
        let dense2 = DenseLayer::new(h, h, Activation::ReLU, rng);
        let attention = AttentionBlock::new(spec.machines, spec.machine_features(), shape.d_k, shape.d_v, rng);
        let head = DuelingHead::new(h + attention.out_dim(), h, spec.actions(), rng);
        let aux = shape.aux_head.then(|| DenseLayer::new(h, 1, Activation::Sigmoid, rng));
        Self { spec, shape, dense1, dense2, attention, head, aux }
    }

    pub fn resample_noise<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.head.resample_noise(rng);
    }

    pub fn forward(&self, x: &Matrix, mode: NoiseMode) -> Result<(Matrix, QCache), NnError> {
        let (h1, c1) = self.dense1.forward(x)?;
        let (h2, c2) = self.dense2.forward(&h1)?;
        let (a, att) = self.attention.forward(&x.columns(0, self.spec.machine_segment()))?;
        let feat = Matrix::hcat(&h2, &a);
        let (q, head) = self.head.forward(&feat, mode)?;
        let (aux_out, aux) = match &self.aux {
            Some(layer) => {
                let (y, c) = layer.forward(&h2)?;
                (Some(y), Some(c))
            }
            None => (None, None),
        };
        Ok((q, QCache { c1, c2, att, head, aux, aux_out }))
    }

    /// Q values only, for a single observation.
    pub fn q_values(&self, obs: &[f64], mode: NoiseMode) -> Result<Vec<f64>, NnError> {
        let x = Matrix::from_vec(1, obs.len(), obs.to_vec());
        Ok(self.forward(&x, mode)?.0.data)
    }

    /// Accumulates parameter gradients for upstream gradients on Q and,
    /// optionally, on the auxiliary output.
    pub fn backward(&mut self, cache: &QCache, dq: &Matrix, daux: Option<&Matrix>) -> Result<(), NnError> {
        let h = self.shape.hidden;
        let dfeat = self.head.backward(&cache.head, dq)?;
        let mut dh2 = dfeat.columns(0, h);
        let datt = dfeat.columns(h, dfeat.cols);
        self.attention.backward(&cache.att, &datt)?;
        if let (Some(layer), Some(c), Some(g)) = (self.aux.as_mut(), cache.aux.as_ref(), daux) {
            let extra = layer.backward(c, g)?;
            dh2.data.iter_mut().zip(&extra.data).for_each(|(a, b)| *a += b);
        }
        let dh1 = self.dense2.backward(&cache.c2, &dh2)?;
        self.dense1.backward(&cache.c1, &dh1)?;
        Ok(())
    }

    pub fn clamp_sigma(&mut self) {
        self.head.clamp_sigma();
    }
}

impl Module for QNetwork {
    fn params(&self) -> Vec<&Tensor2> {
        let mut v = self.dense1.params();
        v.extend(self.dense2.params());
        v.extend(self.attention.params());
        v.extend(self.head.params());
        if let Some(a) = &self.aux {
            v.extend(a.params());
        }
        v
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor2> {
        let mut v = self.dense1.params_mut();
        v.extend(self.dense2.params_mut());
        v.extend(self.attention.params_mut());
        v.extend(self.head.params_mut());
        if let Some(a) = &mut self.aux {
            v.extend(a.params_mut());
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck::{max_relative_error, weighted_sum};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn whole_network_gradients() {
        let spec = ObservationSpec::new(2, 3, 2);
        let shape = NetworkShape { hidden: 6, d_k: 3, d_v: 2, aux_head: true };
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut net = QNetwork::new(spec, shape, &mut rng);
            net.resample_noise(&mut rng);
            let x = Matrix::from_vec(3, spec.dim(), (0..3 * spec.dim()).map(|_| rng.random_range(-1.0..1.0)).collect());
            let cq: Vec<f64> = (0..3 * spec.actions()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let ca: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let loss = |n: &QNetwork| {
                let (q, c) = n.forward(&x, NoiseMode::Sampled).unwrap();
                weighted_sum(&q, &cq) + weighted_sum(c.aux_out.as_ref().unwrap(), &ca)
            };
            net.zero_grad();
            let (q, cache) = net.forward(&x, NoiseMode::Sampled).unwrap();
            let dq = Matrix::from_vec(q.rows, q.cols, cq.clone());
            let da = Matrix::from_vec(3, 1, ca.clone());
            net.backward(&cache, &dq, Some(&da)).unwrap();
            let err = max_relative_error(&mut net, loss, 1e-5);
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }
}
