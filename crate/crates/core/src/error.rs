use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice side {side} too coarse for membrane tubular width {width} (need width >= 2/N)")]
    ResolutionTooCoarse { side: usize, width: f64 },

    #[error("region is degenerate: {0}")]
    EmptyRegion(&'static str),

    #[error("point {point:?} is not on the membrane (signed distance {distance:e})")]
    NotOnBoundary { point: Vec<f64>, distance: f64 },

    #[error("point {point:?} lies outside the tubular neighbourhood of the membrane")]
    OutsideTubularNeighborhood { point: Vec<f64> },

    #[error("unsupported region: {0}")]
    UnsupportedRegion(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("local-mean window around site {site} is empty")]
    EmptyWindow { site: usize },

    #[error("linear solver did not converge: residual {residual:e} after {iterations} iterations")]
    SolverDiverged { residual: f64, iterations: usize },

    #[error("operator with {size} unknowns is too large for a dense eigensolve")]
    TooLarge { size: usize },

    #[error("{quantity} = {value:e} exceeds tolerance {tolerance:e}")]
    NotConverged {
        quantity: &'static str,
        value: f64,
        tolerance: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short machine-parsable category, used as the CLI error prefix.
    pub fn category(&self) -> &'static str {
        match self {
            Error::ResolutionTooCoarse { .. } => "resolution_too_coarse",
            Error::EmptyRegion(_) => "empty_region",
            Error::NotOnBoundary { .. } => "not_on_boundary",
            Error::OutsideTubularNeighborhood { .. } => "outside_tubular_neighborhood",
            Error::UnsupportedRegion(_) => "unsupported_region",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::UnsupportedDimension(_) => "unsupported_dimension",
            Error::EmptyWindow { .. } => "empty_window",
            Error::SolverDiverged { .. } => "solver_diverged",
            Error::TooLarge { .. } => "too_large",
            Error::NotConverged { .. } => "not_converged",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
