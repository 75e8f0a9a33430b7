//! Exact substrate for triangular operator models over finite atomic
//! measure partitions: Gaussian-rational scalars, partitions and step
//! functions, dense exact linear algebra with Jordan structure, and the
//! operator-model types themselves.
//!
//! Everything here is an immutable value and every operation is a pure
//! function; the crate is safe to use from multiple threads without
//! synchronization.

pub mod jordan;
pub mod matrix;
pub mod measure;
pub mod model;
pub mod scalar;

pub use jordan::{
    idempotent_normal_form, jordan_chain_basis, jordan_matrix, jordan_structure,
    similarity_transform, solve_intertwiner, JordanError, JordanStructure,
};
pub use matrix::{Matrix, SpanTracker};
pub use measure::{
    cell_text, pushforward, refine_common, Cell, CellId, CommonRefinement, MeasureError,
    Partition, Pushforward, StepFunction,
};
pub use model::{
    direct_sum, Diagonal, FiberSlot, ModelBlock, ModelError, MultiplicityInput, OperatorModel,
    Rule, TriangularBlock, Violation,
};
pub use scalar::{parse_rational, rat, ratq, rational_text, ParseScalarError, Rational, Scalar};
