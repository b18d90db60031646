//! Dense matrices and small feedforward networks with hand-written
//! backpropagation. Everything else in the crate is built on this.

pub mod checkpoint;
mod loss;
mod matrix;
mod mlp;
mod optim;
mod rng;

pub use loss::{mse, softmax, softmax_cross_entropy, Standardizer};
pub use matrix::Matrix;
pub use mlp::{Activation, ForwardCache, GradientSet, Mlp};
pub use optim::{clip_global_norm, Optimizer, OptimizerKind, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub(crate) use rng::splitmix64;
pub use rng::Seed;
