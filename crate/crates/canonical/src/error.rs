use std::fmt;

use nnormal_core::{JordanError, MeasureError, ModelError, Violation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CanonError {
    /// The operation requires a model satisfying V1–V3.
    InvalidModel(Vec<Violation>),
    /// The operation requires a canonical model (merged multiplicities,
    /// normalized blocks).
    NotCanonical,
    Model(ModelError),
    Measure(MeasureError),
    Jordan(JordanError),
    /// An exactness invariant failed; always a bug.
    Internal(&'static str),
}

impl fmt::Display for CanonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonError::InvalidModel(violations) => {
                write!(f, "model violates its class invariants:")?;
                for v in violations {
                    write!(f, " [{v}]")?;
                }
                Ok(())
            }
            CanonError::NotCanonical => write!(f, "model is not in canonical form"),
            CanonError::Model(e) => write!(f, "{e}"),
            CanonError::Measure(e) => write!(f, "{e}"),
            CanonError::Jordan(e) => write!(f, "{e}"),
            CanonError::Internal(msg) => write!(f, "internal invariant breach: {msg}"),
        }
    }
}

impl std::error::Error for CanonError {}

impl From<ModelError> for CanonError {
    fn from(e: ModelError) -> Self {
        CanonError::Model(e)
    }
}

impl From<MeasureError> for CanonError {
    fn from(e: MeasureError) -> Self {
        CanonError::Measure(e)
    }
}

impl From<JordanError> for CanonError {
    fn from(e: JordanError) -> Self {
        CanonError::Jordan(e)
    }
}
