//! Instance generation: synthetic beta pools and the German Credit data.

pub mod beta;
pub mod german;
pub mod logistic;
pub mod synthetic;

pub use beta::{discretize_beta, regularized_beta};
pub use german::{build_german_instance, fit_german, load_german, GermanCosts, GermanRecord, GERMAN_BUDGET};
pub use logistic::{fit_logistic, LogisticConfig, LogisticFit};
pub use synthetic::{gen_synthetic, Regime, SyntheticConfig};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("{0}")]
    Domain(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("logistic fit did not converge in {iterations} iterations")]
    Convergence { iterations: usize, coefficients: Vec<f64> },
}
