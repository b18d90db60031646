use serde::{Deserialize, Serialize};

use super::{GradientSet, Mlp};
use crate::error::{shape_err, Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    #[default]
    Adam,
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// First-order optimizer state for one model.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    learning_rate: f64,
    clip_norm: Option<f64>,
    first: Option<GradientSet>,
    second: Option<GradientSet>,
    steps: u64,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, learning_rate: f64) -> Result<Self> {
        if !(learning_rate >= 0.0 && learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be finite and non-negative, got {learning_rate}"
            )));
        }
        Ok(Self {
            kind,
            learning_rate,
            clip_norm: None,
            first: None,
            second: None,
            steps: 0,
        })
    }

    pub fn sgd(learning_rate: f64) -> Result<Self> {
        Self::new(OptimizerKind::Sgd, learning_rate)
    }

    pub fn adam(learning_rate: f64) -> Result<Self> {
        Self::new(OptimizerKind::Adam, learning_rate)
    }

    pub fn with_clip_norm(mut self, clip: Option<f64>) -> Result<Self> {
        if let Some(c) = clip {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "clip norm must be positive, got {c}"
                )));
            }
        }
        self.clip_norm = clip;
        Ok(self)
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Applies one descent step to `model`.
    pub fn step(&mut self, model: &mut Mlp, grads: &GradientSet) -> Result<()> {
        if !grads.congruent_with(model) {
            return Err(shape_err(
                "Optimizer::step",
                "gradients congruent with model",
                "mismatch",
            ));
        }
        if !grads.is_finite() {
            return Err(Error::NonFinite("optimizer gradients".into()));
        }
        let mut g = grads.clone();
        if let Some(c) = self.clip_norm {
            clip_global_norm(&mut g, c);
        }
        self.steps += 1;
        let lr = self.learning_rate;
        match self.kind {
            OptimizerKind::Sgd => {
                for (w, gw) in model.weights.iter_mut().zip(&g.weights) {
                    for (p, d) in w.data_mut().iter_mut().zip(gw.data()) {
                        *p -= lr * d;
                    }
                }
                for (b, gb) in model.biases.iter_mut().zip(&g.biases) {
                    for (p, d) in b.iter_mut().zip(gb) {
                        *p -= lr * d;
                    }
                }
            }
            OptimizerKind::Adam => {
                let first = self
                    .first
                    .get_or_insert_with(|| GradientSet::zeros_like(model));
                let second = self
                    .second
                    .get_or_insert_with(|| GradientSet::zeros_like(model));
                let t = self.steps as i32;
                let c1 = 1.0 - ADAM_BETA1.powi(t);
                let c2 = 1.0 - ADAM_BETA2.powi(t);
                let update = |p: &mut f64, d: f64, m: &mut f64, v: &mut f64| {
                    *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * d;
                    *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * d * d;
                    let m_hat = *m / c1;
                    let v_hat = *v / c2;
                    *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
                };
                for l in 0..model.weights.len() {
                    let params = model.weights[l].data_mut();
                    let gs = g.weights[l].data();
                    let ms = first.weights[l].data_mut();
                    let vs = second.weights[l].data_mut();
                    for i in 0..params.len() {
                        update(&mut params[i], gs[i], &mut ms[i], &mut vs[i]);
                    }
                    let params = &mut model.biases[l];
                    let gs = &g.biases[l];
                    let ms = &mut first.biases[l];
                    let vs = &mut second.biases[l];
                    for i in 0..params.len() {
                        update(&mut params[i], gs[i], &mut ms[i], &mut vs[i]);
                    }
                }
            }
        }
        model.touch();
        Ok(())
    }
}

/// Rescales `grads` in place so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_global_norm(grads: &mut GradientSet, max_norm: f64) -> f64 {
    let norm = grads.norm();
    if norm > max_norm && norm > 0.0 {
        grads.scale(max_norm / norm);
    }
    norm
}
