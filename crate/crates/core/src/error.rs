use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("degenerate metric at node {node}: determinant {det:e}")]
    DegenerateMetric { node: usize, det: f64 },

    #[error("metric is not positive definite at node {node}")]
    NotPositiveDefinite { node: usize },

    #[error("surface leaves the chart at node {node} (height {height})")]
    OutOfChart { node: usize, height: f64 },

    #[error("degenerate tangent plane at surface node {node}")]
    DegenerateSurface { node: usize },

    #[error("invalid shell: inner surface is not strictly inside the outer one at node {node}")]
    InvalidShell { node: usize },

    #[error("surface and chart are incompatible: {0}")]
    IncompatibleSurface(String),

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("{solver} did not converge: {reason} (residual {residual:e})")]
    NonConvergence {
        solver: &'static str,
        reason: String,
        residual: f64,
        /// Best iterate reached before giving up.
        best: Vec<f64>,
    },

    #[error("eigenfunction changes sign (min {min:e}, max {max:e}); the principal eigenfunction must be one-signed")]
    KreinRutmanViolation { min: f64, max: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
