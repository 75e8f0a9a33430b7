//! Upper-triangular operator models over a measure partition.
//!
//! An [`OperatorModel`] is a finite direct sum of triangular blocks with
//! multiplicities: each block has the partition coordinate on its
//! diagonal and step functions strictly above it. A block whose
//! superdiagonal never vanishes on its support is strongly irreducible
//! fiberwise; the model invariants V1–V3 capture the full class:
//!
//! * **V1** every block's superdiagonal entries are nonzero at every
//!   support cell;
//! * **V2** two distinct blocks of equal size have disjoint supports;
//! * **V3** every support cell exists in the partition.
//!
//! Raw models (violating V1/V2) are constructible on purpose: they arise
//! as intermediate direct sums and multiplicity decompositions, and the
//! canonicalizer consumes them. `validate` reports violations instead of
//! the constructor rejecting them.
//!
//! A [`MultiplicityInput`] is the other entry point: a single triangular
//! block whose diagonal is an arbitrary (possibly non-injective) step
//! function, to be decomposed along the pushforward of that function.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use sha2::{Digest, Sha256};

use crate::matrix::Matrix;
use crate::measure::{Cell, CellId, MeasureError, Partition, StepFunction};
use crate::scalar::{rational_text, Scalar};

/// Diagonal of a triangular block: the partition coordinate, or an
/// explicit step function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagonal {
    Coordinate,
    Explicit(StepFunction),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    Measure(MeasureError),
    ZeroSize,
    ZeroMultiplicity,
    EmptySupport,
    BadEntryIndex { i: usize, j: usize, size: usize },
    EntryNotTotal { i: usize, j: usize, missing: CellId },
    DiagonalNotTotal { missing: CellId },
    ExpectedCoordinateDiagonal,
    ExpectedExplicitDiagonal,
    SupportNotFull { missing: CellId },
    UnknownCell(CellId),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Measure(e) => write!(f, "{e}"),
            ModelError::ZeroSize => write!(f, "block size must be at least 1"),
            ModelError::ZeroMultiplicity => write!(f, "multiplicity must be at least 1"),
            ModelError::EmptySupport => write!(f, "block support must be nonempty"),
            ModelError::BadEntryIndex { i, j, size } => {
                write!(f, "entry ({i},{j}) outside the strict upper triangle of size {size}")
            }
            ModelError::EntryNotTotal { i, j, missing } => {
                write!(f, "entry ({i},{j}) has no value at support cell {missing:?}")
            }
            ModelError::DiagonalNotTotal { missing } => {
                write!(f, "diagonal step function has no value at cell {missing:?}")
            }
            ModelError::ExpectedCoordinateDiagonal => {
                write!(f, "operator-model blocks must use the coordinate diagonal")
            }
            ModelError::ExpectedExplicitDiagonal => {
                write!(f, "multiplicity input requires an explicit diagonal step function")
            }
            ModelError::SupportNotFull { missing } => {
                write!(f, "multiplicity-input support must cover every cell; missing {missing:?}")
            }
            ModelError::UnknownCell(id) => write!(f, "cell {id:?} is not in the partition"),
        }
    }
}

impl std::error::Error for ModelError {}

impl From<MeasureError> for ModelError {
    fn from(e: MeasureError) -> Self {
        ModelError::Measure(e)
    }
}

/// One `n×n` upper-triangular block of step functions.
///
/// Strictly lower entries are structurally absent; an absent upper entry
/// means the zero function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangularBlock {
    size: usize,
    support: BTreeSet<CellId>,
    entries: BTreeMap<(usize, usize), StepFunction>,
    diagonal: Diagonal,
}

impl TriangularBlock {
    pub fn new(
        size: usize,
        support: impl IntoIterator<Item = CellId>,
        entries: BTreeMap<(usize, usize), StepFunction>,
        diagonal: Diagonal,
    ) -> Result<Self, ModelError> {
        if size == 0 {
            return Err(ModelError::ZeroSize);
        }
        let support: BTreeSet<CellId> = support.into_iter().collect();
        if support.is_empty() {
            return Err(ModelError::EmptySupport);
        }
        for (&(i, j), f) in &entries {
            if !(1 <= i && i < j && j <= size) {
                return Err(ModelError::BadEntryIndex { i, j, size });
            }
            for id in &support {
                if f.eval(id).is_err() {
                    return Err(ModelError::EntryNotTotal { i, j, missing: id.clone() });
                }
            }
        }
        if let Diagonal::Explicit(f) = &diagonal {
            for id in &support {
                if f.eval(id).is_err() {
                    return Err(ModelError::DiagonalNotTotal { missing: id.clone() });
                }
            }
        }
        Ok(TriangularBlock { size, support, entries, diagonal })
    }

    /// Canonical block shape: superdiagonal identically one, everything
    /// else above the diagonal zero, coordinate diagonal.
    pub fn canonical(size: usize, support: impl IntoIterator<Item = CellId>) -> Result<Self, ModelError> {
        let support: BTreeSet<CellId> = support.into_iter().collect();
        let mut entries = BTreeMap::new();
        for i in 1..size {
            entries.insert((i, i + 1), StepFunction::constant_on(support.iter(), Scalar::one()));
        }
        TriangularBlock::new(size, support, entries, Diagonal::Coordinate)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn support(&self) -> &BTreeSet<CellId> {
        &self.support
    }

    pub fn covers(&self, id: &CellId) -> bool {
        self.support.contains(id)
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), StepFunction> {
        &self.entries
    }

    pub fn diagonal(&self) -> &Diagonal {
        &self.diagonal
    }

    /// Entry value at a cell; absent entries are the zero function.
    pub fn entry_value(&self, i: usize, j: usize, id: &CellId) -> Scalar {
        match self.entries.get(&(i, j)) {
            Some(f) => f.eval(id).expect("entry total on support").clone(),
            None => Scalar::zero(),
        }
    }

    /// Diagonal value at a partition cell.
    pub fn diagonal_value(&self, cell: &Cell) -> Scalar {
        match &self.diagonal {
            Diagonal::Coordinate => cell.coordinate.clone(),
            Diagonal::Explicit(f) => f.eval(&cell.id).expect("diagonal total on support").clone(),
        }
    }

    /// The `n×n` matrix of this block at one cell.
    pub fn fiber(&self, cell: &Cell) -> Matrix {
        let d = self.diagonal_value(cell);
        Matrix::from_fn(self.size, self.size, |r, c| {
            if r == c {
                d.clone()
            } else if r < c {
                self.entry_value(r + 1, c + 1, &cell.id)
            } else {
                Scalar::zero()
            }
        })
    }

    /// Restriction of the block to a subset of its support.
    pub fn restrict(&self, cells: impl IntoIterator<Item = CellId>) -> Result<TriangularBlock, ModelError> {
        let keep: BTreeSet<CellId> = cells.into_iter().collect();
        let entries = self
            .entries
            .iter()
            .map(|(&k, f)| (k, f.restrict(keep.iter())))
            .collect();
        let diagonal = match &self.diagonal {
            Diagonal::Coordinate => Diagonal::Coordinate,
            Diagonal::Explicit(f) => Diagonal::Explicit(f.restrict(keep.iter())),
        };
        TriangularBlock::new(self.size, keep, entries, diagonal)
    }
}

/// A block together with its direct-sum multiplicity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelBlock {
    pub block: TriangularBlock,
    pub multiplicity: usize,
}

/// Validation rule identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    V1,
    V2,
    V3,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::V1 => write!(f, "V1"),
            Rule::V2 => write!(f, "V2"),
            Rule::V3 => write!(f, "V3"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub block: usize,
    pub cell: CellId,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} block {} cell {}: {}", self.rule, self.block, self.cell, self.detail)
    }
}

/// Position of one block copy inside a fiber matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberSlot {
    pub block: usize,
    pub copy: usize,
    pub offset: usize,
    pub size: usize,
}

/// Finite direct sum `⊕ blockᵢ^(mᵢ)` of coordinate-diagonal triangular
/// blocks over one partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorModel {
    partition: Partition,
    blocks: Vec<ModelBlock>,
}

impl OperatorModel {
    /// Builds a model; only structural shape is enforced here (V1–V3 are
    /// `validate`'s business so that raw models remain expressible).
    pub fn new(partition: Partition, blocks: Vec<ModelBlock>) -> Result<Self, ModelError> {
        for mb in &blocks {
            if mb.multiplicity == 0 {
                return Err(ModelError::ZeroMultiplicity);
            }
            if mb.block.diagonal != Diagonal::Coordinate {
                return Err(ModelError::ExpectedCoordinateDiagonal);
            }
        }
        Ok(OperatorModel { partition, blocks })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn blocks(&self) -> &[ModelBlock] {
        &self.blocks
    }

    /// Exhaustive V1–V3 report; empty means the model is in the class.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (bi, mb) in self.blocks.iter().enumerate() {
            let b = &mb.block;
            for i in 1..b.size() {
                for id in b.support() {
                    if b.entry_value(i, i + 1, id).is_zero() {
                        out.push(Violation {
                            rule: Rule::V1,
                            block: bi,
                            cell: id.clone(),
                            detail: format!("superdiagonal entry ({},{}) vanishes", i, i + 1),
                        });
                    }
                }
            }
        }
        for (bi, mb) in self.blocks.iter().enumerate() {
            for (bj, other) in self.blocks.iter().enumerate().skip(bi + 1) {
                if mb.block.size() != other.block.size() {
                    continue;
                }
                for id in mb.block.support().intersection(other.block.support()) {
                    out.push(Violation {
                        rule: Rule::V2,
                        block: bj,
                        cell: id.clone(),
                        detail: format!(
                            "blocks {bi} and {bj} of size {} share this support cell",
                            mb.block.size()
                        ),
                    });
                }
            }
        }
        for (bi, mb) in self.blocks.iter().enumerate() {
            for id in mb.block.support() {
                if !self.partition.contains(id) {
                    out.push(Violation {
                        rule: Rule::V3,
                        block: bi,
                        cell: id.clone(),
                        detail: "support cell is not in the partition".to_string(),
                    });
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Layout of the fiber at a cell: one slot per `(block, copy)` in
    /// model block order.
    pub fn fiber_layout(&self, id: &CellId) -> Vec<FiberSlot> {
        let mut slots = Vec::new();
        let mut offset = 0;
        for (bi, mb) in self.blocks.iter().enumerate() {
            if !mb.block.covers(id) {
                continue;
            }
            for copy in 0..mb.multiplicity {
                slots.push(FiberSlot { block: bi, copy, offset, size: mb.block.size() });
                offset += mb.block.size();
            }
        }
        slots
    }

    pub fn fiber_dim(&self, id: &CellId) -> usize {
        self.blocks
            .iter()
            .filter(|mb| mb.block.covers(id))
            .map(|mb| mb.block.size() * mb.multiplicity)
            .sum()
    }

    /// Fiber matrix at a partition cell: block-diagonal, `m` copies per
    /// covering block, in model block order. May be 0×0.
    ///
    /// Panics when the cell is not in the partition.
    pub fn fiber(&self, id: &CellId) -> Matrix {
        let cell = self
            .partition
            .get(id)
            .unwrap_or_else(|| panic!("fiber at unknown cell {id:?}"));
        let mut parts = Vec::new();
        for mb in &self.blocks {
            if !mb.block.covers(id) {
                continue;
            }
            let f = mb.block.fiber(cell);
            for _ in 0..mb.multiplicity {
                parts.push(f.clone());
            }
        }
        Matrix::block_diag(parts.iter())
    }

    /// The full finite matrix on the atomic model: block-diagonal over
    /// cells in partition order.
    pub fn assemble(&self) -> Matrix {
        let fibers: Vec<Matrix> =
            self.partition.cells().iter().map(|c| self.fiber(&c.id)).collect();
        Matrix::block_diag(fibers.iter())
    }

    pub fn dimension(&self) -> usize {
        self.partition.cells().iter().map(|c| self.fiber_dim(&c.id)).sum()
    }

    /// Stable content hash used to tag commutant data with its owner.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_text().as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Deterministic text encoding backing `content_hash`.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        for c in self.partition.cells() {
            let (re, im) = c.coordinate.text_pair();
            s.push_str(&format!("cell {} {} {} {};", c.id, re, im, rational_text(&c.weight)));
        }
        for mb in &self.blocks {
            s.push_str(&format!("block n={} m={} [", mb.block.size(), mb.multiplicity));
            for id in mb.block.support() {
                s.push_str(&format!("{id},"));
            }
            s.push(']');
            for (&(i, j), f) in mb.block.entries() {
                s.push_str(&format!(" e{i},{j}:"));
                let mut ids: Vec<&CellId> = f.domain().collect();
                ids.sort();
                for id in ids {
                    let (re, im) = f.eval(id).expect("domain").text_pair();
                    s.push_str(&format!("{id}={re},{im};"));
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Direct sum over the coordinate-union partition.
///
/// Cells are matched by coordinate (weights added on matches); blocks of
/// the right operand are re-keyed to the union ids. Identical blocks
/// (size, support, entries) coalesce into multiplicity sums; same-size
/// blocks that overlap without being identical are carried as they are,
/// which `validate` flags as V2 — canonicalization resolves them.
pub fn direct_sum(a: &OperatorModel, b: &OperatorModel) -> Result<OperatorModel, ModelError> {
    let mut cells: Vec<Cell> = a.partition.cells().to_vec();
    let mut used: BTreeSet<CellId> = cells.iter().map(|c| c.id.clone()).collect();
    let mut rename: BTreeMap<CellId, CellId> = BTreeMap::new();
    for bc in b.partition.cells() {
        if let Some(pos) = cells.iter().position(|c| c.coordinate == bc.coordinate) {
            cells[pos].weight = &cells[pos].weight + &bc.weight;
            rename.insert(bc.id.clone(), cells[pos].id.clone());
        } else {
            let mut id = bc.id.clone();
            let mut k = 2;
            while used.contains(&id) {
                id = CellId::new(format!("{}#{k}", bc.id));
                k += 1;
            }
            used.insert(id.clone());
            rename.insert(bc.id.clone(), id.clone());
            cells.push(Cell { id, coordinate: bc.coordinate.clone(), weight: bc.weight.clone() });
        }
    }
    let partition = Partition::new(cells)?;

    let mut blocks: Vec<ModelBlock> = a.blocks.clone();
    for mb in &b.blocks {
        let support: Vec<CellId> = mb
            .block
            .support()
            .iter()
            .map(|id| rename.get(id).cloned().unwrap_or_else(|| id.clone()))
            .collect();
        let entries = mb
            .block
            .entries()
            .iter()
            .map(|(&k, f)| (k, f.rekey(&rename)))
            .collect();
        let block = TriangularBlock::new(mb.block.size(), support, entries, Diagonal::Coordinate)?;
        blocks.push(ModelBlock { block, multiplicity: mb.multiplicity });
    }
    // coalesce identical blocks into multiplicity sums
    let mut merged: Vec<ModelBlock> = Vec::new();
    for mb in blocks {
        match merged.iter_mut().find(|m| m.block == mb.block) {
            Some(m) => m.multiplicity += mb.multiplicity,
            None => merged.push(mb),
        }
    }
    OperatorModel::new(partition, merged)
}

/// A single triangular block whose diagonal is an arbitrary total step
/// function; the entry point of multiplicity decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicityInput {
    partition: Partition,
    block: TriangularBlock,
}

impl MultiplicityInput {
    pub fn new(partition: Partition, block: TriangularBlock) -> Result<Self, ModelError> {
        let Diagonal::Explicit(f) = &block.diagonal else {
            return Err(ModelError::ExpectedExplicitDiagonal);
        };
        for id in partition.ids() {
            if !block.covers(id) {
                return Err(ModelError::SupportNotFull { missing: id.clone() });
            }
            f.eval(id).map_err(|_| ModelError::DiagonalNotTotal { missing: id.clone() })?;
        }
        Ok(MultiplicityInput { partition, block })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn block(&self) -> &TriangularBlock {
        &self.block
    }

    pub fn diagonal_function(&self) -> &StepFunction {
        match &self.block.diagonal {
            Diagonal::Explicit(f) => f,
            Diagonal::Coordinate => unreachable!("constructor enforces explicit diagonal"),
        }
    }

    /// Fiber at a cell: `n×n` triangular with the diagonal value `f(c)`.
    pub fn fiber(&self, id: &CellId) -> Matrix {
        let cell = self
            .partition
            .get(id)
            .unwrap_or_else(|| panic!("fiber at unknown cell {id:?}"));
        self.block.fiber(cell)
    }

    pub fn assemble(&self) -> Matrix {
        let fibers: Vec<Matrix> =
            self.partition.cells().iter().map(|c| self.fiber(&c.id)).collect();
        Matrix::block_diag(fibers.iter())
    }

    pub fn dimension(&self) -> usize {
        self.partition.len() * self.block.size()
    }
}
