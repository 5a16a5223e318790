use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no sign change of f on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("the two planes coincide")]
    IdenticalPlanes,

    #[error("cross ratio needs at least three distinct points")]
    DegenerateQuadruple,

    #[error("non-transverse configuration: {pair}")]
    NonTransverseConfiguration { pair: String },

    #[error("photon does not meet the domain")]
    EmptyIntersection,

    #[error("points are not on a common photon")]
    NotPhotonRelated,

    #[error("points lie in different components of the photon intersection")]
    DifferentComponents,

    #[error("{what} is not in the domain")]
    NotInDomain { what: String },

    #[error("dual plane {what} is not in the dual domain")]
    DualNotAdmissible { what: String },

    #[error("affine chart degenerates (top block singular)")]
    ChartDegeneracy,

    #[error("relative position too close to the boundary (sigma = {sigma})")]
    BoundaryProximity { sigma: f64 },

    #[error("dual sample is empty")]
    EmptyDualSample,

    #[error("no admissible chain found: {reason}")]
    NoChainFound { reason: String },

    #[error("unknown Nagano pair `{0}`")]
    UnknownPair(String),

    #[error("binding out of range: {0}")]
    BindingOutOfRange(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("report invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    /// Stable machine-readable code, used by the CLI error stream and the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NoSignChange { .. } => "NoSignChange",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::IdenticalPlanes => "IdenticalPlanes",
            Error::DegenerateQuadruple => "DegenerateQuadruple",
            Error::NonTransverseConfiguration { .. } => "NonTransverseConfiguration",
            Error::EmptyIntersection => "EmptyIntersection",
            Error::NotPhotonRelated => "NotPhotonRelated",
            Error::DifferentComponents => "DifferentComponents",
            Error::NotInDomain { .. } => "NotInDomain",
            Error::DualNotAdmissible { .. } => "DualNotAdmissible",
            Error::ChartDegeneracy => "ChartDegeneracy",
            Error::BoundaryProximity { .. } => "BoundaryProximity",
            Error::EmptyDualSample => "EmptyDualSample",
            Error::NoChainFound { .. } => "NoChainFound",
            Error::UnknownPair(_) => "UnknownPair",
            Error::BindingOutOfRange(_) => "BindingOutOfRange",
            Error::InvalidInput(_) => "InvalidInput",
            Error::InvariantViolation(_) => "InvariantViolation",
        }
    }

    pub(crate) fn not_in_domain(what: impl Into<String>) -> Self {
        Error::NotInDomain { what: what.into() }
    }
}
