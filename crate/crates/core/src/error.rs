use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty path")]
    EmptyPath,

    #[error("support_area requires Dirichlet lines")]
    NotLines,

    #[error("degenerate loop")]
    DegenerateLoop,

    /// Parallel lines never confine the slab intersection.
    #[error("divergent weight: all lines are parallel, support is unbounded")]
    AllParallel,

    #[error("divergent weight: objects share a common point")]
    CommonPoint,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("rotations must be in [0,6]")]
    Rotations,

    #[error("potentials must be positive")]
    NegativePotential,

    #[error("inclusion-exclusion inconsistency: kill probability {0}")]
    InclusionExclusion(f64),

    #[error("subset explosion: {0} objects requested, at most 16 supported")]
    SubsetExplosion(usize),

    #[error("sampling box too small")]
    SamplingBoxTooSmall,

    #[error("objects must be separable by a plane")]
    NotSeparable,

    #[error("empty ratio list")]
    EmptyRatios,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be a finite positive number, got {value}"),
        ))
    }
}
