//! Multiplicity decomposition: regrouping a triangular block over the
//! pushforward of its diagonal function.
//!
//! Each image cell of the pushforward collects the preimage copies of
//! the input block as same-size stacked blocks (the intermediate, a raw
//! model), and the intermediate's assembled matrix is an explicit
//! permutation conjugate of the input's. Canonicalizing the
//! intermediate finishes the decomposition.

use nnormal_core::{
    pushforward, CellId, Diagonal, Matrix, ModelBlock, MultiplicityInput, OperatorModel,
    Pushforward, StepFunction, TriangularBlock,
};

use crate::canon::{canonicalize, Canonicalization};
use crate::error::CanonError;

#[derive(Clone, Debug)]
pub struct MultiplicityDecomposition {
    /// Image partition of the diagonal function, with its fiber map.
    pub pushforward: Pushforward,
    /// Raw model over the image partition: for an image cell with `k`
    /// preimages, `k` stacked same-size blocks whose entries are the
    /// input entries restricted to the respective preimage cells.
    pub intermediate: OperatorModel,
    /// Index permutation with `perm[src] = dst` relating the assembled
    /// input to the assembled intermediate; verified exactly.
    pub permutation: Vec<usize>,
    /// Canonical form of the intermediate, with per-cell conjugators.
    pub canonical: Canonicalization,
}

impl MultiplicityDecomposition {
    pub fn permutation_matrix(&self) -> Matrix {
        Matrix::permutation(&self.permutation)
    }
}

pub fn decompose_by_multiplicity(
    inp: &MultiplicityInput,
) -> Result<MultiplicityDecomposition, CanonError> {
    let pf = pushforward(inp.partition(), inp.diagonal_function())?;
    let n = inp.block().size();
    let max_mult = pf.max_multiplicity();

    // stacked block k (1-based) lives on the image cells with >= k preimages
    let mut blocks = Vec::new();
    for k in 1..=max_mult {
        let covered: Vec<(&CellId, &CellId)> = pf
            .fibers
            .iter()
            .filter(|(_, pre)| pre.len() >= k)
            .map(|(v, pre)| (v, &pre[k - 1]))
            .collect();
        let support: Vec<CellId> = covered.iter().map(|(v, _)| (*v).clone()).collect();
        let mut entries = std::collections::BTreeMap::new();
        for (&(i, j), f) in inp.block().entries() {
            let g = StepFunction::from_pairs(covered.iter().map(|(v, src)| {
                ((*v).clone(), f.eval(src).expect("entry total on support").clone())
            }));
            entries.insert((i, j), g);
        }
        let block = TriangularBlock::new(n, support, entries, Diagonal::Coordinate)?;
        blocks.push(ModelBlock { block, multiplicity: 1 });
    }
    let intermediate = OperatorModel::new(pf.partition.clone(), blocks)?;

    // index permutation: input orders slots by (source cell, slot);
    // the intermediate orders them by (image cell, preimage rank, slot)
    let dim = inp.dimension();
    let mut dst_offsets = Vec::with_capacity(pf.fibers.len());
    let mut acc = 0;
    for (_, pre) in &pf.fibers {
        dst_offsets.push(acc);
        acc += pre.len() * n;
    }
    if acc != dim {
        return Err(CanonError::Internal("pushforward does not conserve dimension"));
    }
    let mut permutation = vec![0usize; dim];
    for (src_idx, cell) in inp.partition().cells().iter().enumerate() {
        let (img_idx, rank) = pf
            .fibers
            .iter()
            .enumerate()
            .find_map(|(vi, (_, pre))| {
                pre.iter().position(|c| c == &cell.id).map(|rank| (vi, rank))
            })
            .ok_or(CanonError::Internal("cell missing from pushforward fibers"))?;
        for s in 0..n {
            permutation[src_idx * n + s] = dst_offsets[img_idx] + rank * n + s;
        }
    }
    let p = Matrix::permutation(&permutation);
    let conjugated = &(&p * &inp.assemble()) * &p.transpose();
    if conjugated != intermediate.assemble() {
        return Err(CanonError::Internal("permutation conjugation failed verification"));
    }

    let canonical = canonicalize(&intermediate)?;
    Ok(MultiplicityDecomposition { pushforward: pf, intermediate, permutation, canonical })
}
