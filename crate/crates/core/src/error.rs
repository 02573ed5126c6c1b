use thiserror::Error;

use crate::spectral::SpectrumResult;

pub type Result<T, E = LleError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LleError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {point} has no neighbors")]
    EmptyNeighborhood { point: usize },

    #[error("point {point}: degenerate local geometry (zero-rank local data with c = 0)")]
    DegenerateLocalGeometry { point: usize },

    #[error("point {point}: barycentric denominator {denominator:e} is numerically zero")]
    IllConditioned { point: usize, denominator: f64 },

    #[error("singular linear system{}", .point.map(|p| format!(" at point {p}")).unwrap_or_default())]
    SingularSystem { point: Option<usize> },

    #[error("{count} of {total} points are degenerate (more than 1%)")]
    TooManyDegenerate { count: usize, total: usize },

    #[error("point {point} has zero neighborhood radius (duplicate points?)")]
    ZeroRadius { point: usize },

    #[error("eigensolver did not converge after {} iterations", .partial.iterations)]
    NotConverged { partial: Box<SpectrumResult> },

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LleError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LleError::InvalidArgument(msg.into())
    }
}
