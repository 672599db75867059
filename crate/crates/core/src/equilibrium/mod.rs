//! Weighted equilibrium measures on discretized compacts, weighted Leja
//! sequences, Frostman diagnostics and the Bernstein–Walsh bound.

mod compact;
mod leja;
mod solver;

use num_complex::Complex64;
use thiserror::Error;

use crate::measures::MeasureError;

pub use compact::{CellKind, WeightedCompact};
pub use leja::{weighted_leja, weighted_leja_cached, FeketeSequence};
pub use solver::{
    bernstein_walsh_bound, extremal_function, frostman_residuals, solve_equilibrium,
    EquilibriumOptions, EquilibriumSolution, FrostmanResiduals,
};

#[derive(Debug, Error)]
pub enum EquilibriumError {
    #[error("the compact has no nodes")]
    Empty,
    #[error("per-node fields disagree in length")]
    LengthMismatch,
    #[error("weight {value} at node {index} is negative or not finite")]
    BadWeight { index: usize, value: f64 },
    #[error("local spacing {value} at node {index} must be positive and finite")]
    BadSpacing { index: usize, value: f64 },
    #[error("node {0} is not finite")]
    BadNode(Complex64),
    #[error("the weight vanishes at every node")]
    NoPositiveWeight,
    #[error("nodes {0} and {1} coincide; the discrete energy is infinite")]
    DuplicateNodes(usize, usize),
    #[error("gap tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("masses must be nonnegative, sum to 1 and match the node count")]
    BadMasses,
    #[error("requested {requested} points but only {available} admissible nodes exist")]
    TooManyPoints { requested: usize, available: usize },
    #[error("{0}")]
    BadParameter(String),
    #[error("cache i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}
