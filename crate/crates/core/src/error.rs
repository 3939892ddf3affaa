use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the command-line frontend to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Parse,
    Validation,
    Computation,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("truncation mismatch: expected order {expected}, found {found}")]
    TruncationMismatch { expected: usize, found: usize },

    #[error("arity mismatch: expected {expected} arguments, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("series is not invertible: leading coefficient is not a nonzero constant")]
    NotInvertible,

    #[error("order {order} outside the supported range 1..={max}")]
    OrderOutOfRange { order: usize, max: usize },

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("Poisson tensor is not antisymmetric at entry ({i}, {j})")]
    NotAntisymmetric { i: usize, j: usize },

    #[error("Poisson tensor entry ({i}, {j}) is not constant")]
    NonConstantPoisson { i: usize, j: usize },

    #[error("invalid Lie algebra: {0}")]
    InvalidLieAlgebra(String),

    #[error("invalid equivalence: {0}")]
    InvalidEquivalence(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("not a cocycle")]
    NotACocycle,

    #[error("nonvanishing skew part")]
    NonvanishingSkewPart,

    #[error("ansatz insufficient (max order {max_order}, max degree {max_degree})")]
    AnsatzInsufficient { max_order: usize, max_degree: usize },

    #[error("defect not a cocycle at order {order}")]
    DefectNotCocycle { order: usize },

    #[error("skew obstruction not proportional to P at order {order}")]
    SkewObstruction { order: usize },

    #[error("cochain extraction failed at order {order}: {msg}")]
    ExtractionFailure { order: usize, msg: String },

    #[error("missing weight table entry for graph {0}")]
    MissingWeight(String),

    #[error("weight integration did not converge: error bound {error:.3e} above {threshold:.3e}")]
    NonConvergence { error: f64, threshold: f64 },

    #[error("adjoint action does not raise the ν-order; exponential does not truncate")]
    NonTruncating,

    #[error("schema mismatch: expected {expected:?}, found {found:?}")]
    Schema { expected: String, found: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn category(&self) -> Category {
        use Error::*;
        match self {
            Parse { .. } | Json(_) | Schema { .. } => Category::Parse,
            DimensionMismatch { .. }
            | TruncationMismatch { .. }
            | ArityMismatch { .. }
            | OrderOutOfRange { .. }
            | NotAntisymmetric { .. }
            | NonConstantPoisson { .. }
            | InvalidLieAlgebra(_)
            | InvalidEquivalence(_)
            | Invalid(_) => Category::Validation,
            Io(_) => Category::Io,
            _ => Category::Computation,
        }
    }

    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }
}

/// `DimensionMismatch` unless the dimensions agree.
pub fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
