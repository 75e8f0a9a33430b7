//! The semisimple/radical split of the commutant and the per-class
//! trace functions.
//!
//! Inside the commutant of a valid model, the sub-block of an element
//! joining two copies of the same block is upper triangular with a
//! constant diagonal; those constants, per class, form a multiplicity
//! matrix. Keeping exactly the multiplicity matrices (replicated along
//! block slots) and zeroing everything else is an algebra homomorphism
//! onto the block-diagonal multiplicity algebra; its kernel is the set
//! of fiberwise nilpotent elements.

use std::collections::BTreeMap;
use std::fmt;

use nnormal_core::{rational_text, CellId, Matrix, OperatorModel, Rational, Scalar};
use num_traits::Zero;

use crate::element::{require_valid, CommutantElement};
use crate::error::CommutantError;

/// Copy offsets of one block at one cell.
#[derive(Clone, Debug)]
pub(crate) struct ClassSlots {
    pub block: usize,
    pub size: usize,
    pub copy_offsets: Vec<usize>,
}

/// Fiber layout grouped by block, in model block order.
pub(crate) fn class_layout(model: &OperatorModel, id: &CellId) -> Vec<ClassSlots> {
    let mut classes: Vec<ClassSlots> = Vec::new();
    for slot in model.fiber_layout(id) {
        match classes.last_mut() {
            Some(c) if c.block == slot.block => c.copy_offsets.push(slot.offset),
            _ => classes.push(ClassSlots {
                block: slot.block,
                size: slot.size,
                copy_offsets: vec![slot.offset],
            }),
        }
    }
    classes
}

/// The per-class multiplicity matrix of a commutant fiber: entry `(s,t)`
/// is the constant diagonal value of the sub-block joining copies `s`
/// and `t`.
pub(crate) fn multiplicity_matrix(class: &ClassSlots, x: &Matrix) -> Matrix {
    let m = class.copy_offsets.len();
    Matrix::from_fn(m, m, |s, t| {
        x.at(class.copy_offsets[s], class.copy_offsets[t]).clone()
    })
}

/// Embeds per-class multiplicity matrices back into a fiber matrix,
/// replicated along the block slots.
pub(crate) fn embed_multiplicity(dim: usize, classes: &[(ClassSlots, Matrix)]) -> Matrix {
    let mut out = Matrix::zeros(dim, dim);
    for (class, beta) in classes {
        let m = class.copy_offsets.len();
        for s in 0..m {
            for t in 0..m {
                let v = beta.at(s, t);
                if v.is_zero() {
                    continue;
                }
                for k in 0..class.size {
                    out.set(class.copy_offsets[s] + k, class.copy_offsets[t] + k, v.clone());
                }
            }
        }
    }
    out
}

/// Semisimple part of one fiber matrix.
pub(crate) fn semisimple_fiber(model: &OperatorModel, id: &CellId, x: &Matrix) -> Matrix {
    let classes: Vec<(ClassSlots, Matrix)> = class_layout(model, id)
        .into_iter()
        .map(|c| {
            let beta = multiplicity_matrix(&c, x);
            (c, beta)
        })
        .collect();
    embed_multiplicity(x.rows(), &classes)
}

/// The semisimple part of a commutant element: per cell and class, the
/// multiplicity matrix replicated along slots, everything else zero.
pub fn semisimple_projection(
    model: &OperatorModel,
    x: &CommutantElement,
) -> Result<CommutantElement, CommutantError> {
    require_valid(model)?;
    x.check_owner(model)?;
    let cells: BTreeMap<CellId, Matrix> = x
        .cells()
        .map(|(id, m)| (id.clone(), semisimple_fiber(model, id, m)))
        .collect();
    Ok(CommutantElement::from_verified(x.owner_hash().to_string(), cells))
}

/// Whether the element lies in the radical: zero semisimple part,
/// equivalently fiberwise nilpotent.
pub fn is_radical(model: &OperatorModel, x: &CommutantElement) -> Result<bool, CommutantError> {
    Ok(semisimple_projection(model, x)?.is_zero())
}

/// Per cell and per block index, the normalized class trace
/// `r_i(P)(c) = Tr(class-i compression of P(c)) / n_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceVector {
    values: BTreeMap<CellId, Vec<Rational>>,
}

impl TraceVector {
    /// One rational per model block, in block order; blocks not covering
    /// the cell contribute zero.
    pub fn at(&self, id: &CellId) -> &[Rational] {
        self.values.get(id).map_or(&[], |v| v.as_slice())
    }

    pub fn cells(&self) -> impl Iterator<Item = (&CellId, &Vec<Rational>)> {
        self.values.iter()
    }
}

impl fmt::Display for TraceVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (id, row) in &self.values {
            let parts: Vec<String> = row.iter().map(rational_text).collect();
            writeln!(f, "{id}: ({})", parts.join(", "))?;
        }
        Ok(())
    }
}

/// Class traces of an idempotent commutant element. For idempotents
/// these are integers in `[0, mᵢ]`, which is verified.
pub fn trace_r(
    model: &OperatorModel,
    p: &CommutantElement,
) -> Result<TraceVector, CommutantError> {
    require_valid(model)?;
    p.check_owner(model)?;
    if !p.is_idempotent() {
        return Err(CommutantError::NotIdempotent);
    }
    let mut values = BTreeMap::new();
    for cell in model.partition().cells() {
        let x = p.cell(&cell.id);
        let classes = class_layout(model, &cell.id);
        let mut row = vec![Rational::zero(); model.blocks().len()];
        for class in &classes {
            let mut tr = Scalar::zero();
            for &off in &class.copy_offsets {
                for k in 0..class.size {
                    tr = tr + x.at(off + k, off + k);
                }
            }
            let n = Scalar::from_int(class.size as i64);
            let r = &tr / &n;
            if !r.im().is_zero() {
                return Err(CommutantError::Internal("class trace of idempotent not real"));
            }
            let q = r.re().clone();
            let mult = class.copy_offsets.len() as i64;
            use num_traits::One;
            if !q.denom().is_one() || q < Rational::zero() || q > nnormal_core::rat(mult) {
                return Err(CommutantError::Internal(
                    "class trace of idempotent outside [0, multiplicity]",
                ));
            }
            row[class.block] = q;
        }
        values.insert(cell.id.clone(), row);
    }
    Ok(TraceVector { values })
}
