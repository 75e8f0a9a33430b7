use std::fmt;

use nnormal_core::{CellId, JordanError, ModelError, Violation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommutantError {
    /// The element is tagged with a different model's hash.
    OwnerMismatch,
    /// The per-cell matrix fails the commutation identity at this cell.
    NotInCommutant(CellId),
    /// The per-cell matrix has the wrong dimension at this cell.
    WrongShape(CellId),
    NotIdempotent,
    NotCommuting,
    /// Standardization requires a maximal abelian family; the payload is
    /// a commuting idempotent outside the family's lattice.
    NotMaximalFamily(Box<crate::element::CommutantElement>),
    /// The operation requires a model satisfying V1–V3.
    InvalidModel(Vec<Violation>),
    /// The operation requires a single-block, multiplicity-one model.
    NotSingleBlock,
    Model(ModelError),
    Jordan(JordanError),
    /// An exactness invariant failed; always a bug.
    Internal(&'static str),
}

impl fmt::Display for CommutantError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommutantError::OwnerMismatch => {
                write!(f, "element belongs to a different model (owner hash mismatch)")
            }
            CommutantError::NotInCommutant(id) => {
                write!(f, "matrix does not commute with the fiber at cell {id:?}")
            }
            CommutantError::WrongShape(id) => {
                write!(f, "matrix dimension does not match the fiber at cell {id:?}")
            }
            CommutantError::NotIdempotent => write!(f, "element is not idempotent"),
            CommutantError::NotCommuting => write!(f, "family elements do not pairwise commute"),
            CommutantError::NotMaximalFamily(_) => {
                write!(f, "family is not maximal abelian: a finer commuting idempotent exists")
            }
            CommutantError::InvalidModel(violations) => {
                write!(f, "model violates its class invariants:")?;
                for v in violations {
                    write!(f, " [{v}]")?;
                }
                Ok(())
            }
            CommutantError::NotSingleBlock => {
                write!(f, "operation requires a single block of multiplicity one")
            }
            CommutantError::Model(e) => write!(f, "{e}"),
            CommutantError::Jordan(e) => write!(f, "{e}"),
            CommutantError::Internal(msg) => write!(f, "internal invariant breach: {msg}"),
        }
    }
}

impl std::error::Error for CommutantError {}

impl From<ModelError> for CommutantError {
    fn from(e: ModelError) -> Self {
        CommutantError::Model(e)
    }
}

impl From<JordanError> for CommutantError {
    fn from(e: JordanError) -> Self {
        CommutantError::Jordan(e)
    }
}
