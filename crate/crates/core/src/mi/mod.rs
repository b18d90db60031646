//! Mutual information estimation.
//!
//! Neural lower bounds (DV and its clipped SMILE form) drive training;
//! the k-NN (KSG) and histogram estimators are independent references used
//! in reports and tests. Internally everything is in nats; reports are in
//! bits.

mod bounds;
mod critic;
mod fit;
mod ksg;
mod plugin;

use serde::{Deserialize, Serialize};

pub use bounds::{dv_bound, dv_bound_weighted, js_bound, BoundEval};
pub(crate) use critic::train_on_assembled;
pub use critic::{
    critic_train_step, dv_estimate, dv_estimate_weighted, shuffle_marginal, smile_estimate, Block,
    Critic, CriticPass,
};
pub use fit::{fit_smile, SmileFit, SmileFitConfig};
pub use ksg::ksg_mi;
pub use plugin::plugin_entropy;

/// Default clip for the SMILE partition term.
pub const DEFAULT_TAU: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Dv,
    Smile,
    Ksg,
    Plugin,
    /// Arithmetic combination of other estimates.
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    pub value_nats: f64,
    pub value_bits: f64,
    pub batch_size: usize,
    pub estimator: EstimatorKind,
}

impl MiEstimate {
    pub fn from_nats(value_nats: f64, batch_size: usize, estimator: EstimatorKind) -> Self {
        Self {
            value_nats,
            value_bits: value_nats / std::f64::consts::LN_2,
            batch_size,
            estimator,
        }
    }
}

/// Settings for the non-neural reference estimators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub ksg_k: usize,
    pub plugin_bins: usize,
    /// Rows used by KSG (quadratic cost); larger inputs are subsampled
    /// deterministically.
    pub max_rows: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            ksg_k: 5,
            plugin_bins: 32,
            max_rows: 4000,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.ksg_k < 1 {
            v.push("oracle.ksg_k must be at least 1".into());
        }
        if self.plugin_bins < 2 {
            v.push("oracle.plugin_bins must be at least 2".into());
        }
        if self.max_rows <= self.ksg_k {
            v.push("oracle.max_rows must exceed ksg_k".into());
        }
        v
    }
}
