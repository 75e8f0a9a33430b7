//! Similarity invariants read off a model: the per-cell signature, the
//! multiplicity count function, and the K₀ data with its identity class.

use std::collections::BTreeMap;
use std::fmt;

use nnormal_core::{CellId, OperatorModel};

use crate::canon::is_canonical;
use crate::error::CanonError;

/// Per cell, the `(size, multiplicity)` pairs of the blocks covering it,
/// sizes strictly descending. Uncovered cells carry the empty list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    entries: Vec<(CellId, Vec<(usize, usize)>)>,
}

impl Signature {
    /// Pairs in partition order.
    pub fn entries(&self) -> &[(CellId, Vec<(usize, usize)>)] {
        &self.entries
    }

    pub fn at(&self, id: &CellId) -> &[(usize, usize)] {
        self.entries
            .iter()
            .find(|(c, _)| c == id)
            .map(|(_, sig)| sig.as_slice())
            .unwrap_or(&[])
    }
}

/// Renders a signature list as `[(n,m), …]`.
pub fn sig_text(sig: &[(usize, usize)]) -> String {
    let parts: Vec<String> = sig.iter().map(|(n, m)| format!("({n},{m})")).collect();
    format!("[{}]", parts.join(", "))
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (id, sig) in &self.entries {
            writeln!(f, "{id}: {}", sig_text(sig))?;
        }
        Ok(())
    }
}

/// The signature of a valid model.
pub fn signature(model: &OperatorModel) -> Result<Signature, CanonError> {
    let violations = model.validate();
    if !violations.is_empty() {
        return Err(CanonError::InvalidModel(violations));
    }
    let entries = model
        .partition()
        .cells()
        .iter()
        .map(|cell| {
            let mut sig: Vec<(usize, usize)> = model
                .blocks()
                .iter()
                .filter(|mb| mb.block.covers(&cell.id))
                .map(|mb| (mb.block.size(), mb.multiplicity))
                .collect();
            sig.sort_by(|a, b| b.0.cmp(&a.0));
            (cell.id.clone(), sig)
        })
        .collect();
    Ok(Signature { entries })
}

/// The multiplicity count function: number of distinct block sizes
/// present at each cell.
pub fn r_function(model: &OperatorModel) -> Result<BTreeMap<CellId, usize>, CanonError> {
    Ok(signature(model)?
        .entries()
        .iter()
        .map(|(id, sig)| (id.clone(), sig.len()))
        .collect())
}

/// One K₀ class: the cells sharing a generator list, the generators
/// `(size, multiplicity)` in descending size order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct K0Class {
    pub cells: Vec<CellId>,
    pub generators: Vec<(usize, usize)>,
}

impl K0Class {
    /// Rank of the free group on this class.
    pub fn r(&self) -> usize {
        self.generators.len()
    }

    /// Coefficients of the identity class in the generator basis.
    pub fn identity_class(&self) -> Vec<usize> {
        self.generators.iter().map(|&(_, m)| m).collect()
    }
}

/// The K₀ similarity invariant: covered cells grouped by equal generator
/// lists, classes ordered by first cell in partition order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct K0Invariant {
    pub classes: Vec<K0Class>,
}

impl K0Invariant {
    pub fn identity_class(&self) -> Vec<Vec<usize>> {
        self.classes.iter().map(K0Class::identity_class).collect()
    }
}

impl fmt::Display for K0Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.classes.is_empty() {
            return writeln!(f, "no covered cells: K0 is trivial");
        }
        for class in &self.classes {
            let cells: Vec<String> = class.cells.iter().map(|c| c.to_string()).collect();
            let ident: Vec<String> =
                class.identity_class().iter().map(|m| m.to_string()).collect();
            writeln!(
                f,
                "cells {{{}}}: Z^{}, generators {}, [I] = ({})",
                cells.join(", "),
                class.r(),
                sig_text(&class.generators),
                ident.join(",")
            )?;
        }
        Ok(())
    }
}

/// K₀ data of a valid canonical model.
pub fn k0_invariant(model: &OperatorModel) -> Result<K0Invariant, CanonError> {
    let sig = signature(model)?;
    if !is_canonical(model)? {
        return Err(CanonError::NotCanonical);
    }
    let mut classes: Vec<K0Class> = Vec::new();
    for (id, cell_sig) in sig.entries() {
        if cell_sig.is_empty() {
            continue; // uncovered cells belong to no class
        }
        match classes.iter_mut().find(|c| &c.generators == cell_sig) {
            Some(class) => class.cells.push(id.clone()),
            None => classes.push(K0Class { cells: vec![id.clone()], generators: cell_sig.clone() }),
        }
    }
    Ok(K0Invariant { classes })
}

/// Identity-class coefficient vectors, one per K₀ class.
pub fn identity_class(model: &OperatorModel) -> Result<Vec<Vec<usize>>, CanonError> {
    Ok(k0_invariant(model)?.identity_class())
}
