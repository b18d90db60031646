//! Data sources: the Lotka-Volterra map, synthetic generators and CSV
//! ingestion with one-hot encoding and train/test splitting, plus loaders
//! for the census income and forest cover tables.

mod dataset;
mod real;
mod synthetic;

pub use dataset::{
    load_csv_dataset, load_csv_with_encoding, split, ColumnInfo, ColumnKind, ColumnSpec,
    ColumnStats, Dataset, LoadReport, Role, Schema, SplitSpec,
};
pub use real::{adult_schema, load_covertype, COVERTYPE_DOMAINS};
pub use synthetic::{
    gaussian_mi_nats, gen_correlated_gaussians, gen_fair_synthetic, simulate_lotka_volterra,
    FairSynthConfig, LvParams, LvState,
};
