//! Fiberwise commutant structure of triangular operator models:
//! verified commutant elements and bases, intertwiner bases with their
//! zero patterns, the semisimple/radical split with per-class traces,
//! and the normalization machinery that conjugates commuting idempotent
//! families onto the standard copy-indicator family.

mod element;
mod error;
mod intertwiner;
mod split;
mod standard;

pub use element::{commutant_basis, CommutantElement};
pub use error::CommutantError;
pub use intertwiner::{
    intertwiner_basis, pattern_allows, IntertwinerStructure, SizePattern, StepIntertwiner,
};
pub use split::{is_radical, semisimple_projection, trace_r, TraceVector};
pub use standard::{
    extract_skeleton, in_standard_lattice, normalize_idempotent, standardize_family,
    FamilyStandardization, IdempotentNormalization, LatticePattern, SkeletonAtom,
    SkeletonOutcome, StandardFamily, StandardLatticeElement,
};
