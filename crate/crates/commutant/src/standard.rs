//! The standard idempotent family and the normalization machinery that
//! conjugates arbitrary commuting idempotent families onto it.
//!
//! The standard family is generated by the copy indicators: for block
//! `i` and copy `j`, the element acting as the identity on that copy's
//! slot at every support cell and as zero elsewhere. Its lattice is all
//! cellwise 0/1 combinations of copy indicators.
//!
//! Normalizing a single idempotent is a two-stage conjugation: first
//! `X₁ = P + π(P) − I` moves `P` onto its semisimple part (invertible
//! because `P − π(P)` is radical), then a per-class basis change puts
//! the multiplicity idempotent into leading-copies form. Standardizing a
//! maximal family conjugates all of its per-cell atoms at once:
//! `R = Σ π(aₖ)·aₖ` intertwines each atom with its semisimple part and
//! is `I + radical`, hence invertible; one per-class basis change then
//! aligns the semisimple atoms with the copy indicators.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use nnormal_core::{idempotent_normal_form, CellId, Matrix, OperatorModel, Scalar};

use crate::element::{require_valid, CommutantElement};
use crate::error::CommutantError;
use crate::split::{class_layout, embed_multiplicity, multiplicity_matrix, semisimple_fiber, ClassSlots};

/// One skeleton element: the minimal idempotent for `(block, copy)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeletonAtom {
    pub block: usize,
    pub copy: usize,
    pub element: CommutantElement,
}

/// The standard maximal abelian idempotent family of a model, presented
/// by its skeleton of copy indicators.
#[derive(Clone, Debug)]
pub struct StandardFamily {
    owner_hash: String,
    atoms: Vec<SkeletonAtom>,
}

impl StandardFamily {
    pub fn new(model: &OperatorModel) -> Result<Self, CommutantError> {
        require_valid(model)?;
        let hash = model.content_hash();
        let mut atoms = Vec::new();
        for (bi, mb) in model.blocks().iter().enumerate() {
            for copy in 0..mb.multiplicity {
                let mut cells = BTreeMap::new();
                for cell in model.partition().cells() {
                    let dim = model.fiber_dim(&cell.id);
                    let mut m = Matrix::zeros(dim, dim);
                    for slot in model.fiber_layout(&cell.id) {
                        if slot.block == bi && slot.copy == copy {
                            for k in 0..slot.size {
                                m.set(slot.offset + k, slot.offset + k, Scalar::one());
                            }
                        }
                    }
                    cells.insert(cell.id.clone(), m);
                }
                atoms.push(SkeletonAtom {
                    block: bi,
                    copy,
                    element: CommutantElement::from_verified(hash.clone(), cells),
                });
            }
        }
        Ok(StandardFamily { owner_hash: hash, atoms })
    }

    pub fn owner_hash(&self) -> &str {
        &self.owner_hash
    }

    /// Skeleton atoms ordered by `(block, copy)`.
    pub fn atoms(&self) -> &[SkeletonAtom] {
        &self.atoms
    }

    pub fn atom(&self, block: usize, copy: usize) -> Option<&CommutantElement> {
        self.atoms
            .iter()
            .find(|a| a.block == block && a.copy == copy)
            .map(|a| &a.element)
    }
}

/// Which copy indicators an element of the standard lattice switches on,
/// per cell.
pub type LatticePattern = BTreeMap<CellId, Vec<(usize, usize)>>;

/// An element of the standard lattice together with its 0/1 pattern.
#[derive(Clone, Debug)]
pub struct StandardLatticeElement {
    pub element: CommutantElement,
    pub pattern: LatticePattern,
}

/// Membership test for the standard lattice: per cell, every copy slot
/// carries the identity or zero and everything off those diagonal slots
/// vanishes. Returns the on-pattern, or `None`.
pub fn in_standard_lattice(
    model: &OperatorModel,
    x: &CommutantElement,
) -> Result<Option<LatticePattern>, CommutantError> {
    require_valid(model)?;
    x.check_owner(model)?;
    let mut pattern = BTreeMap::new();
    for cell in model.partition().cells() {
        let m = x.cell(&cell.id);
        let slots = model.fiber_layout(&cell.id);
        let dim = model.fiber_dim(&cell.id);
        // slot membership per index
        let mut slot_of = vec![usize::MAX; dim];
        for (si, slot) in slots.iter().enumerate() {
            for k in 0..slot.size {
                slot_of[slot.offset + k] = si;
            }
        }
        for r in 0..dim {
            for c in 0..dim {
                if slot_of[r] != slot_of[c] && !m.at(r, c).is_zero() {
                    return Ok(None);
                }
            }
        }
        let mut on = Vec::new();
        for slot in &slots {
            let sub = m.slice(slot.offset, slot.offset, slot.size, slot.size);
            if sub.is_identity() {
                on.push((slot.block, slot.copy));
            } else if !sub.is_zero() {
                return Ok(None);
            }
        }
        pattern.insert(cell.id.clone(), on);
    }
    Ok(Some(pattern))
}

/// Result of normalizing one idempotent into the standard lattice.
#[derive(Clone, Debug)]
pub struct IdempotentNormalization {
    /// `X` with `X·P·X⁻¹ = D`, invertible in the commutant.
    pub conjugator: CommutantElement,
    pub conjugator_inverse: CommutantElement,
    /// `D`, the standard-lattice image, with its pattern.
    pub standard: StandardLatticeElement,
}

/// Conjugates an idempotent commutant element onto the standard lattice.
pub fn normalize_idempotent(
    model: &OperatorModel,
    p: &CommutantElement,
) -> Result<IdempotentNormalization, CommutantError> {
    require_valid(model)?;
    p.check_owner(model)?;
    if !p.is_idempotent() {
        return Err(CommutantError::NotIdempotent);
    }
    let hash = p.owner_hash().to_string();
    let mut x_cells = BTreeMap::new();
    let mut d_cells = BTreeMap::new();
    let mut pattern: LatticePattern = BTreeMap::new();
    for cell in model.partition().cells() {
        let dim = model.fiber_dim(&cell.id);
        let pc = p.cell(&cell.id);
        let semi = semisimple_fiber(model, &cell.id, pc);
        // stage 1: P + π(P) - I conjugates P onto π(P)
        let x1 = &(pc + &semi) - &Matrix::identity(dim);
        if x1.inverse().is_none() {
            return Err(CommutantError::Internal("stage-1 conjugator not invertible"));
        }
        // stage 2: per class, leading-copies normal form of the
        // multiplicity idempotent
        let classes = class_layout(model, &cell.id);
        let mut stage2_parts: Vec<(ClassSlots, Matrix)> = Vec::new();
        let mut d_parts: Vec<(ClassSlots, Matrix)> = Vec::new();
        let mut on = Vec::new();
        for class in classes {
            let beta = multiplicity_matrix(&class, &semi);
            let (s, d) = idempotent_normal_form(&beta)
                .map_err(|_| CommutantError::Internal("multiplicity matrix not idempotent"))?;
            let rank = (0..beta.rows()).filter(|&i| d.at(i, i).is_one()).count();
            let block = class.block;
            for copy in 0..rank {
                on.push((block, copy));
            }
            stage2_parts.push((class.clone(), s));
            d_parts.push((class, d));
        }
        let x2 = embed_multiplicity(dim, &stage2_parts);
        let x = &x2 * &x1;
        let d = embed_multiplicity(dim, &d_parts);
        if &(&x * pc) != &(&d * &x) {
            return Err(CommutantError::Internal("normalization identity failed"));
        }
        x_cells.insert(cell.id.clone(), x);
        d_cells.insert(cell.id.clone(), d);
        pattern.insert(cell.id.clone(), on);
    }
    let conjugator = CommutantElement::from_verified(hash.clone(), x_cells);
    let conjugator_inverse = conjugator
        .inverse()
        .ok_or(CommutantError::Internal("normalization conjugator not invertible"))?;
    let d_elem = CommutantElement::from_verified(hash, d_cells);
    if in_standard_lattice(model, &d_elem)?.is_none() {
        return Err(CommutantError::Internal("normal form left the standard lattice"));
    }
    Ok(IdempotentNormalization {
        conjugator,
        conjugator_inverse,
        standard: StandardLatticeElement { element: d_elem, pattern },
    })
}

/// Outcome of skeleton extraction from a commuting idempotent family.
#[derive(Clone, Debug)]
pub enum SkeletonOutcome {
    /// The family is maximal abelian: its minimal idempotents, labeled
    /// `(block, copy)` in canonical copy order.
    Skeleton(Vec<SkeletonAtom>),
    /// Not maximal: an explicit idempotent in the commutant commuting
    /// with the family but outside its generated lattice.
    NotMaximal(Box<CommutantElement>),
}

fn first_nonzero_column(m: &Matrix) -> usize {
    for c in 0..m.cols() {
        if (0..m.rows()).any(|r| !m.at(r, c).is_zero()) {
            return c;
        }
    }
    usize::MAX
}

fn cmp_matrix(a: &Matrix, b: &Matrix) -> Ordering {
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            let ord = a.at(r, c).cmp(b.at(r, c));
            if ord != Ordering::Equal {
                return ord;
            }
        }
    }
    Ordering::Equal
}

/// Atoms of the Boolean lattice generated by commuting idempotent
/// fibers, by successive refinement from the identity.
fn lattice_atoms(dim: usize, fibers: &[&Matrix]) -> Vec<Matrix> {
    let mut atoms = vec![Matrix::identity(dim)];
    for x in fibers {
        let mut next = Vec::new();
        for a in &atoms {
            let ax = a * *x;
            let rest = a - &ax;
            if !ax.is_zero() {
                next.push(ax);
            }
            if !rest.is_zero() {
                next.push(rest);
            }
        }
        atoms = next;
    }
    atoms
}

/// Per-class traces of a fiber idempotent, as plain integers.
fn class_trace_counts(classes: &[ClassSlots], atom: &Matrix) -> Result<Vec<usize>, CommutantError> {
    let mut out = Vec::new();
    for class in classes {
        let beta = multiplicity_matrix(class, atom);
        let tr = beta.trace();
        if !tr.im().is_zero() {
            return Err(CommutantError::Internal("atom class trace not real"));
        }
        use num_traits::{One, Signed};
        let q = tr.re().clone();
        if !q.denom().is_one() || q.is_negative() {
            return Err(CommutantError::Internal("atom class trace not a nonnegative integer"));
        }
        let digits = q.numer().to_u64_digits();
        let v = match digits.1.len() {
            0 => 0usize,
            1 => digits.1[0] as usize,
            _ => return Err(CommutantError::Internal("atom class trace out of range")),
        };
        out.push(v);
    }
    Ok(out)
}

/// Extracts the canonical skeleton of a commuting idempotent family, or
/// exhibits a finer commuting idempotent when the family is not maximal.
pub fn extract_skeleton(
    model: &OperatorModel,
    family: &[CommutantElement],
) -> Result<SkeletonOutcome, CommutantError> {
    require_valid(model)?;
    for x in family {
        x.check_owner(model)?;
        if !x.is_idempotent() {
            return Err(CommutantError::NotIdempotent);
        }
    }
    for (i, x) in family.iter().enumerate() {
        for y in &family[i + 1..] {
            if !x.commutes_with(y) {
                return Err(CommutantError::NotCommuting);
            }
        }
    }
    let hash = model.content_hash();

    // per covered cell: atoms of the generated lattice
    let mut per_cell: BTreeMap<CellId, Vec<Matrix>> = BTreeMap::new();
    let mut complete = true;
    for cell in model.partition().cells() {
        let dim = model.fiber_dim(&cell.id);
        if dim == 0 {
            continue;
        }
        let fibers: Vec<&Matrix> = family.iter().map(|x| x.cell(&cell.id)).collect();
        let atoms = lattice_atoms(dim, &fibers);
        let classes = class_layout(model, &cell.id);
        let expected: usize = classes.iter().map(|c| c.copy_offsets.len()).sum();
        if atoms.len() > expected {
            return Err(CommutantError::Internal("more atoms than the abelian bound"));
        }
        if atoms.len() < expected {
            complete = false;
        }
        per_cell.insert(cell.id.clone(), atoms);
    }

    if !complete {
        return Ok(SkeletonOutcome::NotMaximal(Box::new(refinement_witness(
            model, &per_cell, hash,
        )?)));
    }

    // label atoms per cell: class from the trace vector, copy from the
    // canonical order (first column touched, then entry order)
    let mut elements: BTreeMap<(usize, usize), BTreeMap<CellId, Matrix>> = BTreeMap::new();
    for (id, atoms) in &per_cell {
        let classes = class_layout(model, id);
        let mut per_class: BTreeMap<usize, Vec<&Matrix>> = BTreeMap::new();
        for atom in atoms {
            let counts = class_trace_counts(&classes, atom)?;
            let hot: Vec<usize> = (0..classes.len()).filter(|&k| counts[k] > 0).collect();
            if hot.len() != 1 || counts[hot[0]] != 1 {
                return Err(CommutantError::Internal("complete atom without unit class trace"));
            }
            per_class.entry(classes[hot[0]].block).or_default().push(atom);
        }
        for (block, mut list) in per_class {
            list.sort_by(|a, b| {
                first_nonzero_column(a)
                    .cmp(&first_nonzero_column(b))
                    .then_with(|| cmp_matrix(a, b))
            });
            for (copy, atom) in list.into_iter().enumerate() {
                elements.entry((block, copy)).or_default().insert(id.clone(), (*atom).clone());
            }
        }
    }
    let skeleton = elements
        .into_iter()
        .map(|((block, copy), cells)| SkeletonAtom {
            block,
            copy,
            element: CommutantElement::from_verified(hash.clone(), fill_zero(model, cells)),
        })
        .collect();
    Ok(SkeletonOutcome::Skeleton(skeleton))
}

fn fill_zero(model: &OperatorModel, mut cells: BTreeMap<CellId, Matrix>) -> BTreeMap<CellId, Matrix> {
    for cell in model.partition().cells() {
        let dim = model.fiber_dim(&cell.id);
        cells.entry(cell.id.clone()).or_insert_with(|| Matrix::zeros(dim, dim));
    }
    cells
}

/// Builds a commuting idempotent strictly finer than an incomplete
/// family: at each incomplete cell, a proper sub-idempotent of a
/// refinable atom — conjugated under the atom's stage-1 map so it stays
/// below the atom.
fn refinement_witness(
    model: &OperatorModel,
    per_cell: &BTreeMap<CellId, Vec<Matrix>>,
    hash: String,
) -> Result<CommutantElement, CommutantError> {
    let mut cells = BTreeMap::new();
    for cell in model.partition().cells() {
        let dim = model.fiber_dim(&cell.id);
        if dim == 0 {
            cells.insert(cell.id.clone(), Matrix::zeros(dim, dim));
            continue;
        }
        let atoms = &per_cell[&cell.id];
        let classes = class_layout(model, &cell.id);
        let expected: usize = classes.iter().map(|c| c.copy_offsets.len()).sum();
        if atoms.len() == expected {
            cells.insert(cell.id.clone(), Matrix::zeros(dim, dim));
            continue;
        }
        let mut refined = None;
        for atom in atoms {
            let counts = class_trace_counts(&classes, atom)?;
            let total: usize = counts.iter().sum();
            let hot: Vec<usize> = (0..classes.len()).filter(|&k| counts[k] > 0).collect();
            if total < 2 {
                continue;
            }
            let semi = semisimple_fiber(model, &cell.id, atom);
            let x1 = &(atom + &semi) - &Matrix::identity(dim);
            let x1_inv = x1
                .inverse()
                .ok_or(CommutantError::Internal("refinement stage-1 not invertible"))?;
            // a proper nonzero piece of the semisimple part
            let piece = if let Some(&k) = hot.iter().find(|&&k| counts[k] >= 2) {
                let beta = multiplicity_matrix(&classes[k], &semi);
                let (s, _) = idempotent_normal_form(&beta)
                    .map_err(|_| CommutantError::Internal("atom multiplicity not idempotent"))?;
                let m = beta.rows();
                let mut e00 = Matrix::zeros(m, m);
                e00.set(0, 0, Scalar::one());
                let s_inv =
                    s.inverse().ok_or(CommutantError::Internal("normal form singular"))?;
                let sub = &(&s_inv * &e00) * &s;
                embed_multiplicity(dim, &[(classes[k].clone(), sub)])
            } else {
                // unit trace in at least two classes: keep only the first
                let k = hot[0];
                let beta = multiplicity_matrix(&classes[k], &semi);
                embed_multiplicity(dim, &[(classes[k].clone(), beta)])
            };
            refined = Some(&(&x1_inv * &piece) * &x1);
            break;
        }
        let q = refined.ok_or(CommutantError::Internal(
            "incomplete cell without a refinable atom",
        ))?;
        cells.insert(cell.id.clone(), q);
    }
    Ok(CommutantElement::from_verified(hash, cells))
}

/// Result of standardizing a maximal abelian family.
#[derive(Clone, Debug)]
pub struct FamilyStandardization {
    /// Invertible `X` in the commutant with `X·family·X⁻¹` inside the
    /// standard lattice.
    pub conjugator: CommutantElement,
    pub conjugator_inverse: CommutantElement,
    /// The family's skeleton, as extracted before conjugation.
    pub skeleton: Vec<SkeletonAtom>,
    /// Images of the input family members under conjugation, all in the
    /// standard lattice.
    pub images: Vec<StandardLatticeElement>,
}

/// Conjugates a maximal abelian idempotent family onto the standard
/// lattice: the skeleton atoms land exactly on the copy indicators.
pub fn standardize_family(
    model: &OperatorModel,
    family: &[CommutantElement],
) -> Result<FamilyStandardization, CommutantError> {
    let skeleton = match extract_skeleton(model, family)? {
        SkeletonOutcome::Skeleton(s) => s,
        SkeletonOutcome::NotMaximal(witness) => {
            return Err(CommutantError::NotMaximalFamily(witness))
        }
    };
    let hash = model.content_hash();
    let standard = StandardFamily::new(model)?;

    let mut x_cells = BTreeMap::new();
    for cell in model.partition().cells() {
        let dim = model.fiber_dim(&cell.id);
        if dim == 0 {
            x_cells.insert(cell.id.clone(), Matrix::zeros(dim, dim));
            continue;
        }
        let classes = class_layout(model, &cell.id);
        // stage 1: one intertwiner for all atoms at once
        let mut r = Matrix::zeros(dim, dim);
        for atom in &skeleton {
            let a = atom.element.cell(&cell.id);
            if a.is_zero() {
                continue;
            }
            let semi = semisimple_fiber(model, &cell.id, a);
            r = &r + &(&semi * a);
        }
        for atom in &skeleton {
            let a = atom.element.cell(&cell.id);
            let semi = semisimple_fiber(model, &cell.id, a);
            if &(&r * a) != &(&semi * &r) {
                return Err(CommutantError::Internal("simultaneous intertwiner failed"));
            }
        }
        if r.inverse().is_none() {
            return Err(CommutantError::Internal("simultaneous intertwiner not invertible"));
        }
        // stage 2: per class, send the semisimple atoms to the copy
        // indicators in label order
        let mut stage2_parts = Vec::new();
        for class in &classes {
            let m = class.copy_offsets.len();
            let mut columns = Vec::with_capacity(m);
            for copy in 0..m {
                let atom = skeleton
                    .iter()
                    .find(|at| at.block == class.block && at.copy == copy)
                    .ok_or(CommutantError::Internal("skeleton missing a copy label"))?;
                let semi = semisimple_fiber(model, &cell.id, atom.element.cell(&cell.id));
                let beta = multiplicity_matrix(class, &semi);
                let col = first_nonzero_column(&beta);
                if col == usize::MAX {
                    return Err(CommutantError::Internal("semisimple atom vanished in its class"));
                }
                columns.push(beta.column(col));
            }
            let v = Matrix::from_columns(&columns);
            let s = v
                .inverse()
                .ok_or(CommutantError::Internal("atom ranges do not span the copies"))?;
            stage2_parts.push((class.clone(), s));
        }
        let stage2 = embed_multiplicity(dim, &stage2_parts);
        x_cells.insert(cell.id.clone(), &stage2 * &r);
    }
    let conjugator = CommutantElement::from_verified(hash, x_cells);
    let conjugator_inverse = conjugator
        .inverse()
        .ok_or(CommutantError::Internal("standardization conjugator not invertible"))?;

    // skeleton atoms must land exactly on the copy indicators
    for atom in &skeleton {
        let image = &(&conjugator * &atom.element) * &conjugator_inverse;
        let target = standard
            .atom(atom.block, atom.copy)
            .ok_or(CommutantError::Internal("standard family missing an indicator"))?;
        if &image != target {
            return Err(CommutantError::Internal("skeleton image missed its indicator"));
        }
    }
    let mut images = Vec::new();
    for x in family {
        let image = &(&conjugator * x) * &conjugator_inverse;
        let pattern = in_standard_lattice(model, &image)?
            .ok_or(CommutantError::Internal("family image left the standard lattice"))?;
        images.push(StandardLatticeElement { element: image, pattern });
    }
    Ok(FamilyStandardization { conjugator, conjugator_inverse, skeleton, images })
}
