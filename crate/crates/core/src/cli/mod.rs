//! Config-driven experiment runner.
//!
//! A run reads one TOML file, validates all of it before touching the
//! disk, materializes every default into `config.resolved`, and writes its
//! artifacts under `<output>/<name>/<label>/`:
//!
//! - `config.resolved`: the config with every default filled in
//! - `trace.csv`: per-epoch diagnostics (multi-run kinds add a `run` column)
//! - `report.json`, `report.txt`: machine-readable and tabular results
//! - `checkpoints/`: trained networks
//! - `data.csv`: the generated dataset, for synthetic kinds
//!
//! The output root comes from `--output`, the config's `output` key, the
//! `INFOSUB_OUTPUT_ROOT` environment variable, or `runs`, in that order.

mod config;
mod run;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{
    AdultSection, CovertypeSection, ExperimentConfig, ExperimentKind, GaussianOracleSection,
    LotkaVolterraSection, SweepSection, OUTPUT_ROOT_ENV,
};
pub use run::RunSummary;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("run failed: {0}")]
    Run(#[from] crate::Error),
}

impl CliError {
    /// 2 for unusable configs, 1 for failures during the run.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } | CliError::Invalid(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    ExperimentConfig::from_toml(&text).map_err(|e| CliError::Invalid(vec![e]))
}

/// Every violation in the file; empty when it is runnable. Never writes.
pub fn validate_file(path: &Path) -> Result<Vec<String>, CliError> {
    match load_config(path) {
        Ok(c) => Ok(c.validate()),
        Err(CliError::Invalid(v)) => Ok(v),
        Err(e) => Err(e),
    }
}

/// Validates, resolves and runs `config`. Nothing is written unless the
/// config is valid.
pub fn run_config(
    config: &ExperimentConfig,
    output: Option<&Path>,
    seed: Option<u64>,
) -> Result<RunSummary, CliError> {
    let resolved = config.resolve(output, seed);
    let problems = resolved.validate();
    if !problems.is_empty() {
        return Err(CliError::Invalid(problems));
    }
    Ok(run::execute(&resolved)?)
}

pub fn run_file(
    path: &Path,
    output: Option<&Path>,
    seed: Option<u64>,
) -> Result<RunSummary, CliError> {
    run_config(&load_config(path)?, output, seed)
}
