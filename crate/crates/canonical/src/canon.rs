//! Canonicalization: the normal form under similarity.
//!
//! Per cell, the Jordan structure of the fiber (a triangular matrix with
//! the cell coordinate on the diagonal) is regrouped into blocks of the
//! normal shape — superdiagonal identically one, all other strict-upper
//! entries zero — with multiplicities equal to the Jordan block counts.
//! Cells sharing a size are grouped by multiplicity, so the output
//! always satisfies V1–V3, and two structurally valid models are similar
//! exactly when their canonical forms are equal as data.

use std::collections::BTreeMap;

use nnormal_core::{
    jordan_structure, similarity_transform, CellId, Matrix, ModelBlock, MultiplicityInput,
    OperatorModel, TriangularBlock,
};

use crate::decompose;
use crate::error::CanonError;

/// A canonical model together with one exact conjugator per cell:
/// `conjugators[c] · fiber(raw, c) · conjugators[c]⁻¹ = fiber(canonical, c)`.
#[derive(Clone, Debug)]
pub struct Canonicalization {
    pub model: OperatorModel,
    pub conjugators: BTreeMap<CellId, Matrix>,
}

/// Canonicalizes a structurally valid (possibly raw) model.
pub fn canonicalize(raw: &OperatorModel) -> Result<Canonicalization, CanonError> {
    let partition = raw.partition().clone();

    // per cell: Jordan block sizes of the fiber, counted per size
    let mut per_cell_counts: Vec<(CellId, BTreeMap<usize, usize>)> = Vec::new();
    for cell in partition.cells() {
        let fiber = raw.fiber(&cell.id);
        let mut counts = BTreeMap::new();
        if fiber.rows() > 0 {
            let s = jordan_structure(&fiber, std::slice::from_ref(&cell.coordinate))?;
            for &size in s.sizes(&cell.coordinate) {
                *counts.entry(size).or_insert(0) += 1;
            }
        }
        per_cell_counts.push((cell.id.clone(), counts));
    }

    // group: (size, multiplicity) -> support cells
    let mut groups: BTreeMap<(usize, usize), Vec<CellId>> = BTreeMap::new();
    for (id, counts) in &per_cell_counts {
        for (&size, &mult) in counts {
            groups.entry((size, mult)).or_default().push(id.clone());
        }
    }
    let mut blocks: Vec<ModelBlock> = groups
        .into_iter()
        .map(|((size, mult), support)| {
            Ok(ModelBlock {
                block: TriangularBlock::canonical(size, support)?,
                multiplicity: mult,
            })
        })
        .collect::<Result<_, CanonError>>()?;
    // block order: size descending, then first support cell in partition order
    blocks.sort_by_key(|mb| {
        let first = mb
            .block
            .support()
            .iter()
            .filter_map(|id| partition.index_of(id))
            .min()
            .unwrap_or(usize::MAX);
        (std::cmp::Reverse(mb.block.size()), first)
    });
    let model = OperatorModel::new(partition, blocks)?;
    if !model.is_valid() {
        return Err(CanonError::Internal("canonical output failed validation"));
    }

    let mut conjugators = BTreeMap::new();
    for cell in model.partition().cells() {
        let from = raw.fiber(&cell.id);
        let to = model.fiber(&cell.id);
        let s = similarity_transform(&from, &to, std::slice::from_ref(&cell.coordinate))?
            .ok_or(CanonError::Internal("canonical fiber not similar to raw fiber"))?;
        conjugators.insert(cell.id.clone(), s);
    }
    Ok(Canonicalization { model, conjugators })
}

/// Canonicalizes a multiplicity input; the output lives over the
/// pushforward partition of the diagonal function.
pub fn canonicalize_multiplicity(inp: &MultiplicityInput) -> Result<Canonicalization, CanonError> {
    Ok(decompose::decompose_by_multiplicity(inp)?.canonical)
}

/// Whether a model already is its own canonical form.
pub fn is_canonical(model: &OperatorModel) -> Result<bool, CanonError> {
    Ok(&canonicalize(model)?.model == model)
}
