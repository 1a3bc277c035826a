use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid 2-bilinear type: {0}")]
    InvalidType(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("first coordinate of the {0} block is zero")]
    ZeroLeadingCoordinate(char),
    #[error("singular matrix")]
    Singular,
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("coefficient not representable in the target field: {0}")]
    NotRepresentable(String),
    #[error("assembly label mismatch: {0}")]
    LabelMismatch(String),
    #[error("theta partition violated: {0}")]
    ThetaViolation(String),
    #[error("eigen decomposition failed: {0}")]
    EigenFailure(String),
    #[error("degenerate eigenvector block: {0}")]
    DegenerateBlock(String),
    #[error("rank deficiency: {0}")]
    RankDeficient(String),
    #[error("retries exhausted after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: usize, last: String },
    #[error("enumeration budget exceeded: {0} points")]
    BudgetExceeded(u128),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidType(_) => "invalid_type",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::InvalidPolynomial(_) => "invalid_polynomial",
            Error::ZeroLeadingCoordinate(_) => "zero_leading_coordinate",
            Error::Singular => "singular",
            Error::NotSquare(..) => "not_square",
            Error::NotRepresentable(_) => "not_representable",
            Error::LabelMismatch(_) => "label_mismatch",
            Error::ThetaViolation(_) => "theta_violation",
            Error::EigenFailure(_) => "eigen_failure",
            Error::DegenerateBlock(_) => "degenerate_block",
            Error::RankDeficient(_) => "rank_deficient",
            Error::RetriesExhausted { .. } => "retries_exhausted",
            Error::BudgetExceeded(_) => "budget_exceeded",
            Error::Precondition(_) => "precondition",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
