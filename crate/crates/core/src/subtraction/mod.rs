//! Information Subtraction: a generator trained so its representation keeps
//! the information about a target that a conditioning variable does not
//! provide, and leaks as little as possible about that condition.

mod config;
mod pipeline;
mod trainer;

pub use config::SubtractionConfig;
pub use pipeline::{
    train_unbiased_predictor, venn_decompose, venn_report, PredictorReport, VennDecomposition,
    VennSector,
};
pub use trainer::{
    train_information_subtraction, DiagnosticsTrace, EpochRecord, Stage, Subtractor,
    TrainedSubtractor, TRACE_HEADER,
};
