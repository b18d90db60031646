use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::critic::{critic_train_step, shuffle_marginal, smile_estimate, Block, Critic};
use super::DEFAULT_TAU;
use crate::error::{shape_err, Error, Result};
use crate::numerics::{Activation, Matrix, Optimizer, Seed, Standardizer};

/// Settings for fitting a standalone clipped critic to paired samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmileFitConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub tau: f64,
    /// Trace is recorded every this many steps.
    pub log_every: usize,
    /// Independent marginal shuffles averaged for the final estimate.
    pub eval_shuffles: usize,
    pub seed: Seed,
}

impl Default for SmileFitConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64],
            activation: Activation::Relu,
            steps: 5000,
            batch_size: 256,
            learning_rate: 5e-4,
            tau: DEFAULT_TAU,
            log_every: 100,
            eval_shuffles: 5,
            seed: Seed(0),
        }
    }
}

impl SmileFitConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.hidden.contains(&0) {
            v.push("hidden layer widths must be positive".into());
        }
        if self.steps == 0 {
            v.push("steps must be positive".into());
        }
        if self.batch_size < 2 {
            v.push("batch_size must be at least 2".into());
        }
        if !(self.learning_rate > 0.0) {
            v.push("learning_rate must be positive".into());
        }
        if !(self.tau > 0.0) {
            v.push("tau must be positive".into());
        }
        if self.log_every == 0 {
            v.push("log_every must be positive".into());
        }
        if self.eval_shuffles == 0 {
            v.push("eval_shuffles must be positive".into());
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmileFit {
    /// Final full-sample estimate in nats.
    pub estimate_nats: f64,
    /// `(step, minibatch estimate in nats)` pairs.
    pub trace: Vec<(usize, f64)>,
}

/// Trains a fresh critic on `(x, y)` and returns its clipped estimate.
/// Inputs are standardized first.
pub fn fit_smile(x: &Matrix, y: &Matrix, config: &SmileFitConfig) -> Result<SmileFit> {
    let problems = config.validate();
    if !problems.is_empty() {
        return Err(Error::InvalidArgument(problems.join("; ")));
    }
    if x.rows() != y.rows() {
        return Err(shape_err(
            "fit_smile",
            format!("{} rows", x.rows()),
            y.rows(),
        ));
    }
    if x.rows() < 2 {
        return Err(Error::Empty("fit_smile needs at least 2 rows".into()));
    }
    let x = Standardizer::fit(x).apply(x)?;
    let y = Standardizer::fit(y).apply(y)?;
    let mut critic = Critic::new(
        vec![Block::new("x", x.cols()), Block::new("y", y.cols())],
        &config.hidden,
        config.activation,
        config.seed.derive(1),
    )?;
    let mut opt = Optimizer::adam(config.learning_rate)?;
    let mut rng = config.seed.derive(2).rng();
    let n = x.rows();
    let batch = config.batch_size.min(n);
    let mut trace = Vec::new();
    for step in 0..config.steps {
        let idx = sample(&mut rng, n, batch).into_vec();
        let (xb, yb) = (x.select_rows(&idx), y.select_rows(&idx));
        let ys = shuffle_marginal(&xb, &yb, &mut rng)?;
        let est = critic_train_step(&mut critic, &[&xb, &yb], &[&xb, &ys], &mut opt, config.tau)?;
        if step % config.log_every == 0 || step + 1 == config.steps {
            trace.push((step, est));
        }
    }
    let mut total = 0.0;
    for _ in 0..config.eval_shuffles {
        let ys = shuffle_marginal(&x, &y, &mut rng)?;
        total += smile_estimate(&critic, &[&x, &y], &[&x, &ys], config.tau)?.value_nats;
    }
    Ok(SmileFit {
        estimate_nats: total / config.eval_shuffles as f64,
        trace,
    })
}
