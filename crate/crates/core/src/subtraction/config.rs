use serde::{Deserialize, Serialize};

use crate::mi::DEFAULT_TAU;
use crate::numerics::{Activation, Seed};

/// Hyperparameters for one Information Subtraction run and the optional
/// downstream predictor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubtractionConfig {
    /// Width of the generated representation.
    pub z_dim: usize,
    /// Weight on the leak term.
    pub lambda: f64,
    /// Pretraining epochs (reconstruction only).
    pub n1: usize,
    /// Total epochs; must exceed `n1`.
    pub n2: usize,
    /// Critic steps per epoch.
    pub n3: usize,
    /// Predictor epochs.
    pub n4: usize,
    pub batch_size: usize,
    pub lr_generator: f64,
    pub lr_discriminator: f64,
    pub lr_estimator: f64,
    pub generator_dims: Vec<usize>,
    pub discriminator_dims: Vec<usize>,
    pub estimator_dims: Vec<usize>,
    pub activation: Activation,
    pub tau: f64,
    /// Optional global gradient-norm clip for every network.
    pub clip_norm: Option<f64>,
    pub seed: Seed,
}

impl Default for SubtractionConfig {
    fn default() -> Self {
        Self {
            z_dim: 10,
            lambda: 1.0,
            n1: 200,
            n2: 2000,
            n3: 2,
            n4: 500,
            batch_size: 256,
            lr_generator: 1e-4,
            lr_discriminator: 5e-4,
            lr_estimator: 1e-4,
            generator_dims: vec![1000, 1000],
            discriminator_dims: vec![1000, 1000],
            estimator_dims: vec![1000, 1000],
            activation: Activation::Relu,
            tau: DEFAULT_TAU,
            clip_norm: None,
            seed: Seed(0),
        }
    }
}

impl SubtractionConfig {
    /// Every violated constraint, one message each.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.z_dim < 1 {
            v.push("subtraction.z_dim must be at least 1".into());
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            v.push(format!(
                "subtraction.lambda must be a non-negative number, got {}",
                self.lambda
            ));
        }
        if self.n1 >= self.n2 {
            v.push(format!(
                "subtraction.n1 ({}) must be smaller than n2 ({}): pretraining has to end before training does",
                self.n1, self.n2
            ));
        }
        if self.batch_size < 2 {
            v.push("subtraction.batch_size must be at least 2".into());
        }
        for (name, lr) in [
            ("lr_generator", self.lr_generator),
            ("lr_discriminator", self.lr_discriminator),
            ("lr_estimator", self.lr_estimator),
        ] {
            if !(lr > 0.0 && lr.is_finite()) {
                v.push(format!("subtraction.{name} must be positive, got {lr}"));
            }
        }
        for (name, dims) in [
            ("generator_dims", &self.generator_dims),
            ("discriminator_dims", &self.discriminator_dims),
            ("estimator_dims", &self.estimator_dims),
        ] {
            if dims.contains(&0) {
                v.push(format!("subtraction.{name} entries must be positive"));
            }
        }
        if !(self.tau > 0.0) {
            v.push(format!(
                "subtraction.tau must be positive, got {}",
                self.tau
            ));
        }
        if let Some(c) = self.clip_norm {
            if !(c > 0.0) {
                v.push("subtraction.clip_norm must be positive when set".into());
            }
        }
        v
    }
}
