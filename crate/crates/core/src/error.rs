use thiserror::Error;

/// Errors raised by the exact geometry pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("lattice generators must be integral")]
    NonIntegralInput,

    #[error("matrix of shape {rows}x{cols} has rank {rank}, full row rank required")]
    RankDeficient { rows: usize, cols: usize, rank: usize },

    #[error("polyhedron is unbounded")]
    UnboundedPolytope,

    #[error("polyhedron is empty")]
    EmptyPolytope,

    #[error("point lies outside the support of the cover")]
    PointOutsideSupport,

    #[error("point lies outside the momentum image")]
    PointOutsideImage,

    #[error("cover is invalid: members {offending:?} violate the closure condition")]
    InvalidCover { offending: Vec<usize> },

    #[error("refined cell {cell} is not integrated by any affine-open of its group")]
    NonIntegrable { cell: usize },

    #[error("stratum {stratum} has dimension {dim}, density needs dimension {expected}")]
    NotTopDimensional { stratum: usize, dim: usize, expected: usize },

    #[error("density interpolation for stratum {stratum} disagrees with the exact fiber volume")]
    InterpolationInconsistent { stratum: usize },

    #[error("fiber over the given point is empty")]
    EmptyFiber,

    #[error("fiber over the given point is not full-dimensional")]
    DegenerateFiber,

    #[error("action is not effective (maximal minors of B have gcd {gcd})")]
    NonEffectiveAction { gcd: String },

    #[error("unknown stratum id {0}")]
    UnknownStratum(usize),

    #[error("cannot render a stratification of ambient dimension {0}")]
    UnsupportedDimension(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal soundness check failed: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
