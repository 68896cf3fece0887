//! Dense, noisy and attention layers with hand-written backward passes, plus
//! the losses and optimizers used to train them.

mod attention;
mod dueling;
pub mod gradcheck;
mod layers;
mod loss;
mod optim;
mod tensor;

pub use attention::{AttentionBlock, AttentionCache};
pub use dueling::{dueling_backward, dueling_combine, DuelingCache, DuelingHead};
pub use layers::{Activation, DenseLayer, LayerCache, Module, NoiseMode, NoisyCache, NoisyLayer, SIGMA_INIT};
pub use loss::{huber, huber_loss, mse_loss, LossKind};
pub use optim::{
    clip_gradients, grad_norm, inverse_norm_weights, param_checksum, soft_update, Adam, DynamicLossWeights,
    ParamSnapshot, PlateauScheduler,
};
pub use tensor::{gemm, matmul, sigmoid, softmax_in_place, Matrix, NnError, Tensor2};
