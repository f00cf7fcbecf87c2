use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different parents")]
    ParentMismatch,
    #[error("operation requires odd residue characteristic")]
    OddCharRequired,
    #[error("operation requires residue characteristic 2")]
    EvenCharRequired,
    #[error("result is indistinguishable from zero at the available precision")]
    PrecisionLoss,
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("truncation level {j} exceeds the isomorphism level {e}")]
    PrecisionExceedsIso { j: i64, e: i64 },
    #[error("element is not integral")]
    NonIntegral,
    #[error("singular Weierstrass equation (discriminant is zero)")]
    SingularEquation,
    #[error("finite field of order {0} exceeds the supported size")]
    FieldTooLarge(u64),
    #[error("invalid field parameters: {0}")]
    InvalidField(String),
    #[error("x^2 - x + gamma is reducible; the datum does not define a field")]
    ReducibleASPolynomial,
    #[error("twist model is not integral: {0}")]
    NonIntegralTwist(String),
    #[error("v(disc) = {source_val} over the source but {target_val} over the deformed field")]
    DeltaValuationMismatch { source_val: i64, target_val: i64 },
    #[error("discriminant valuations differ across the deformation: {source_val} vs {target_val}")]
    DiscMismatch { source_val: i64, target_val: i64 },
    #[error("discriminant classes differ modulo the unit filtration")]
    ClassMismatch,
    #[error("precision cap e = {max_e} exceeded; last failure: {last_failure}")]
    PrecisionCapExceeded { max_e: i64, last_failure: String },
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn insufficient(ctx: impl Into<String>) -> Self {
        Error::InsufficientPrecision(ctx.into())
    }

    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "division_by_zero",
            Error::ParentMismatch => "parent_mismatch",
            Error::OddCharRequired => "odd_char_required",
            Error::EvenCharRequired => "even_char_required",
            Error::PrecisionLoss => "precision_loss",
            Error::InsufficientPrecision(_) => "insufficient_precision",
            Error::PrecisionExceedsIso { .. } => "precision_exceeds_iso",
            Error::NonIntegral => "non_integral",
            Error::SingularEquation => "singular_equation",
            Error::FieldTooLarge(_) => "field_too_large",
            Error::InvalidField(_) => "invalid_field",
            Error::ReducibleASPolynomial => "reducible_as_polynomial",
            Error::NonIntegralTwist(_) => "non_integral_twist",
            Error::DeltaValuationMismatch { .. } => "delta_valuation_mismatch",
            Error::DiscMismatch { .. } => "disc_mismatch",
            Error::ClassMismatch => "class_mismatch",
            Error::PrecisionCapExceeded { .. } => "precision_cap_exceeded",
            Error::Internal(_) => "internal",
            Error::Parse { .. } => "parse",
            Error::InvalidInput(_) => "invalid_input",
            Error::Unsupported(_) => "unsupported",
        }
    }

    /// Errors caused by the caller's input rather than by the computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::InvalidInput(_)
                | Error::InvalidField(_)
                | Error::FieldTooLarge(_)
                | Error::NonIntegral
                | Error::SingularEquation
                | Error::ReducibleASPolynomial
                | Error::OddCharRequired
                | Error::EvenCharRequired
                | Error::ParentMismatch
                | Error::Unsupported(_)
        )
    }

    /// Errors that a larger deformation level may cure.
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            Error::InsufficientPrecision(_)
                | Error::PrecisionLoss
                | Error::PrecisionExceedsIso { .. }
                | Error::DeltaValuationMismatch { .. }
                | Error::DiscMismatch { .. }
                | Error::ClassMismatch
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
