//! Reports: information tables, group fairness, downstream accuracy and
//! the λ sweep.

mod fairness;
mod info;
mod predictor;
pub mod render;
mod sweep;

pub use fairness::{fairness_metrics, ClassRates, FairnessReport};
pub use info::{
    information_report, venn_base, venn_row, Cell, InfoReport, VennBase, VennReport, VennRow,
};
pub use predictor::{train_eval_predictor, Classifier, PredictorConfig};
pub use sweep::{lambda_sweep, SweepPoint, SweepResult};
