//! Canonical forms and similarity invariants for triangular operator
//! models: canonicalization into strongly-irreducible blocks, the
//! per-cell signature and K₀ data, the similarity decision with exact
//! witnesses, and multiplicity decomposition along a diagonal function.

mod canon;
mod decompose;
mod error;
mod invariant;
mod similar;

pub use canon::{canonicalize, canonicalize_multiplicity, is_canonical, Canonicalization};
pub use decompose::{decompose_by_multiplicity, MultiplicityDecomposition};
pub use error::CanonError;
pub use invariant::{
    identity_class, k0_invariant, r_function, sig_text, signature, K0Class, K0Invariant, Signature,
};
pub use similar::{are_similar, Divergence, SimilarityReport, Verdict, Witness};
