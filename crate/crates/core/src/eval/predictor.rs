use log::debug;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::numerics::{
    softmax, softmax_cross_entropy, Activation, Matrix, Mlp, Optimizer, Seed, Standardizer,
};
use crate::subtraction::SubtractionConfig;

/// Training settings for the downstream classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictorConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub activation: Activation,
    pub clip_norm: Option<f64>,
    pub seed: Seed,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        Self::from_subtraction(&SubtractionConfig::default())
    }
}

impl PredictorConfig {
    /// Estimator settings carried by a subtraction config.
    pub fn from_subtraction(c: &SubtractionConfig) -> Self {
        Self {
            hidden: c.estimator_dims.clone(),
            epochs: c.n4,
            batch_size: c.batch_size,
            learning_rate: c.lr_estimator,
            activation: c.activation,
            clip_norm: c.clip_norm,
            seed: c.seed.derive(100),
        }
    }
}

/// Softmax MLP classifier over standardized features. Binary targets use
/// two output classes.
#[derive(Clone, Debug)]
pub struct Classifier {
    model: Mlp,
    scale: Standardizer,
    n_classes: usize,
}

impl Classifier {
    /// Trains for `config.epochs` minibatch steps; returns the model and
    /// the per-step losses.
    pub fn train(
        features: &Matrix,
        labels: &[usize],
        n_classes: usize,
        config: &PredictorConfig,
    ) -> Result<(Self, Vec<f64>)> {
        if features.rows() != labels.len() {
            return Err(shape_err(
                "Classifier::train",
                format!("{} labels", features.rows()),
                labels.len(),
            ));
        }
        if features.rows() == 0 {
            return Err(Error::Empty("classifier training set".into()));
        }
        if n_classes < 2 {
            return Err(Error::InvalidArgument(
                "a classifier needs at least 2 classes".into(),
            ));
        }
        let scale = Standardizer::fit(features);
        let xs = scale.apply(features)?;
        let mut dims = vec![features.cols()];
        dims.extend_from_slice(&config.hidden);
        dims.push(n_classes);
        let mut model = Mlp::new(&dims, config.activation, config.seed)?;
        let mut opt = Optimizer::adam(config.learning_rate)?.with_clip_norm(config.clip_norm)?;
        let mut rng = config.seed.derive(1).rng();
        let n = xs.rows();
        let mut losses = Vec::with_capacity(config.epochs);
        for e in 0..config.epochs {
            let idx: Vec<usize> = if n <= config.batch_size {
                (0..n).collect()
            } else {
                sample(&mut rng, n, config.batch_size).into_vec()
            };
            let xb = xs.select_rows(&idx);
            let yb: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
            let (logits, cache) = model.forward(&xb)?;
            let (loss, grad) = softmax_cross_entropy(&logits, &yb)?;
            if !loss.is_finite() {
                return Err(Error::NonFinite("classifier loss".into()));
            }
            let (g, _) = model.backward(&cache, &grad)?;
            opt.step(&mut model, &g)?;
            if e % 100 == 0 {
                debug!("classifier epoch {e} loss {loss}");
            }
            losses.push(loss);
        }
        Ok((
            Self {
                model,
                scale,
                n_classes,
            },
            losses,
        ))
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn model(&self) -> &Mlp {
        &self.model
    }

    pub fn predict_proba(&self, features: &Matrix) -> Result<Matrix> {
        Ok(softmax(&self.model.predict(&self.scale.apply(features)?)?))
    }

    /// Arg-max class per row (lowest index on ties).
    pub fn predict(&self, features: &Matrix) -> Result<Vec<usize>> {
        let logits = self.model.predict(&self.scale.apply(features)?)?;
        Ok((0..logits.rows())
            .map(|r| {
                logits
                    .row(r)
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
                        if v > best.1 {
                            (i, v)
                        } else {
                            best
                        }
                    })
                    .0
            })
            .collect())
    }

    pub fn accuracy(&self, features: &Matrix, labels: &[usize]) -> Result<f64> {
        if features.rows() != labels.len() {
            return Err(shape_err(
                "Classifier::accuracy",
                features.rows(),
                labels.len(),
            ));
        }
        let p = self.predict(features)?;
        Ok(accuracy(&p, labels))
    }
}

pub(crate) fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

/// Trains on one split, reports accuracy on the other.
pub fn train_eval_predictor(
    train_features: &Matrix,
    train_labels: &[usize],
    test_features: &Matrix,
    test_labels: &[usize],
    config: &PredictorConfig,
) -> Result<(Classifier, f64)> {
    if test_features.rows() != test_labels.len() {
        return Err(shape_err(
            "train_eval_predictor",
            test_features.rows(),
            test_labels.len(),
        ));
    }
    let n_classes = train_labels
        .iter()
        .chain(test_labels)
        .max()
        .map_or(2, |m| (m + 1).max(2));
    let (clf, _) = Classifier::train(train_features, train_labels, n_classes, config)?;
    let acc = clf.accuracy(test_features, test_labels)?;
    Ok((clf, acc))
}
