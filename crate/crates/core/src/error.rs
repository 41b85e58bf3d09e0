use alloc::string::String;

/// Failures raised by the arithmetic layers.
///
/// Every variant carries enough context to tell the caller what to change
/// (precision, grid denominator, residue degree) without re-running.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid field configuration: {0}")]
    Config(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("division by an element that is zero to its precision")]
    DivisionByApparentZero,
    #[error("valuation is indeterminate: element is zero only to precision {prec}")]
    IndeterminateValuation { prec: i64 },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("residue field too small: {0}; increase m")]
    ResidueFieldTooSmall(String),
    #[error("newton iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("divergent evaluation: {0}")]
    DivergentEvaluation(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("pole hit: evaluation point coincides with pole {index} to precision")]
    PoleHit { index: usize },
    #[error("periods are not independent: {0}")]
    IndependenceFailure(String),
    #[error("specialized matrix is singular to precision")]
    SingularSpecialization,
    #[error("not a unit: bracket has valuation {valuation}")]
    NotAUnit { valuation: i64 },
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("elements belong to different field towers")]
    TowerMismatch,
}

impl Error {
    /// True for errors that a larger precision, grid or residue field could cure.
    pub fn is_precision_or_grid(&self) -> bool {
        matches!(
            self,
            Error::PrecisionExhausted(_)
                | Error::GridTooCoarse(_)
                | Error::ResidueFieldTooSmall(_)
                | Error::IndeterminateValuation { .. }
                | Error::DivisionByApparentZero
                | Error::NoConvergence(_)
                | Error::DivergentEvaluation(_)
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
