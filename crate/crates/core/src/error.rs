use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("negative argument {0}")]
    NegativeArgument(f64),

    #[error("target {target} lies outside the attainable range [{lo}, {hi})")]
    OutOfRange { target: f64, lo: f64, hi: f64 },

    #[error("point violates the constraints (residual {residual:e})")]
    ConstraintViolation { residual: f64 },

    #[error("constraint jacobian has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("contact volume needs an odd-dimensional manifold, got dimension {0}")]
    EvenDimension(usize),

    #[error("dimension too large: total form degree {0} exceeds 7")]
    DimensionTooLarge(usize),

    #[error("point lies on the binding (z0 = 0)")]
    OnBinding,

    #[error("point is not on the binding (|z0| = {z0_abs:e}, defect {defect:e})")]
    OffBinding { z0_abs: f64, defect: f64 },

    #[error("point lies over the boundary circle |z0| = {0} (singular orbit)")]
    SingularOrbit(f64),

    #[error("matrix is not orthogonal (residual {0:e})")]
    NotOrthogonal(f64),

    #[error("momentum norm {0} is outside the open unit disk bundle")]
    OutsideDiskBundle(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
