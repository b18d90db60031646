//! Information Subtraction: learn a representation `Z` of a target `Y` that
//! keeps the information `Y` has beyond a condition `X` while shedding what
//! it shares with `X`.
//!
//! The generator is trained against two neural mutual-information critics:
//! one scores `I(Y; X, Z)` (maximized), the other `I(X; Z)` (minimized with
//! weight λ). k-NN and histogram estimators provide independent reporting.
//!
//! Modules:
//! - [`numerics`]: matrices, MLPs, manual backprop, optimizers
//! - [`mi`]: Donsker-Varadhan / clipped critics, KSG and plug-in oracles
//! - [`subtraction`]: the two-stage trainer, unbiased-feature pipeline, Venn decomposition
//! - [`data`]: Lotka-Volterra simulator, synthetic generators, CSV ingestion
//! - [`eval`]: information reports, fairness metrics, predictors, λ sweeps
//! - [`cli`]: config-driven experiment runner

pub mod cli;
pub mod data;
mod error;
pub mod eval;
pub mod mi;
pub mod numerics;
pub mod subtraction;

pub use error::{Error, Result};
pub use numerics::{Activation, Matrix, Mlp, Seed};
