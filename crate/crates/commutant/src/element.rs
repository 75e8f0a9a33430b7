//! Elements of the commutant, stored fiberwise.
//!
//! A [`CommutantElement`] holds one matrix per partition cell and is
//! accepted only when every matrix commutes exactly with the fiber
//! there. Elements are tagged with the owner model's content hash so
//! that data cannot silently cross models. Storage is general per-cell
//! matrices; the structural zero patterns of intertwiners are checked
//! properties, not storage constraints.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use nnormal_core::{solve_intertwiner, CellId, Matrix, OperatorModel};

use crate::error::CommutantError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommutantElement {
    owner_hash: String,
    cells: BTreeMap<CellId, Matrix>,
}

pub(crate) fn require_valid(model: &OperatorModel) -> Result<(), CommutantError> {
    let violations = model.validate();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CommutantError::InvalidModel(violations))
    }
}

impl CommutantElement {
    /// Accepts the per-cell matrices after verifying dimensions and the
    /// exact commutation identity at every cell; missing cells default
    /// to zero.
    pub fn new(
        owner: &OperatorModel,
        cells: BTreeMap<CellId, Matrix>,
    ) -> Result<Self, CommutantError> {
        require_valid(owner)?;
        let mut full = BTreeMap::new();
        for cell in owner.partition().cells() {
            let dim = owner.fiber_dim(&cell.id);
            let m = cells
                .get(&cell.id)
                .cloned()
                .unwrap_or_else(|| Matrix::zeros(dim, dim));
            if m.rows() != dim || m.cols() != dim {
                return Err(CommutantError::WrongShape(cell.id.clone()));
            }
            let fiber = owner.fiber(&cell.id);
            if &(&fiber * &m) != &(&m * &fiber) {
                return Err(CommutantError::NotInCommutant(cell.id.clone()));
            }
            full.insert(cell.id.clone(), m);
        }
        Ok(CommutantElement { owner_hash: owner.content_hash(), cells: full })
    }

    /// Internal constructor for algebraic combinations of verified
    /// elements, which stay in the commutant by algebra.
    pub(crate) fn from_verified(owner_hash: String, cells: BTreeMap<CellId, Matrix>) -> Self {
        CommutantElement { owner_hash, cells }
    }

    pub fn identity(owner: &OperatorModel) -> Result<Self, CommutantError> {
        require_valid(owner)?;
        let cells = owner
            .partition()
            .cells()
            .iter()
            .map(|c| (c.id.clone(), Matrix::identity(owner.fiber_dim(&c.id))))
            .collect();
        Ok(CommutantElement { owner_hash: owner.content_hash(), cells })
    }

    pub fn zero(owner: &OperatorModel) -> Result<Self, CommutantError> {
        require_valid(owner)?;
        let cells = owner
            .partition()
            .cells()
            .iter()
            .map(|c| {
                let d = owner.fiber_dim(&c.id);
                (c.id.clone(), Matrix::zeros(d, d))
            })
            .collect();
        Ok(CommutantElement { owner_hash: owner.content_hash(), cells })
    }

    pub fn owner_hash(&self) -> &str {
        &self.owner_hash
    }

    /// Checks that this element is tagged with the given model's hash.
    pub fn check_owner(&self, owner: &OperatorModel) -> Result<(), CommutantError> {
        if self.owner_hash == owner.content_hash() {
            Ok(())
        } else {
            Err(CommutantError::OwnerMismatch)
        }
    }

    pub fn cell(&self, id: &CellId) -> &Matrix {
        self.cells.get(id).expect("element carries every partition cell")
    }

    pub fn cells(&self) -> impl Iterator<Item = (&CellId, &Matrix)> {
        self.cells.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.cells.values().all(Matrix::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.cells.values().all(Matrix::is_identity)
    }

    pub fn is_idempotent(&self) -> bool {
        self.cells.values().all(|m| &(m * m) == m)
    }

    pub fn commutes_with(&self, other: &CommutantElement) -> bool {
        self.owner_hash == other.owner_hash
            && self
                .cells
                .iter()
                .all(|(id, m)| &(m * other.cell(id)) == &(other.cell(id) * m))
    }

    /// Exact cellwise inverse; `None` when any fiber is singular.
    pub fn inverse(&self) -> Option<CommutantElement> {
        let mut cells = BTreeMap::new();
        for (id, m) in &self.cells {
            cells.insert(id.clone(), m.inverse()?);
        }
        Some(CommutantElement { owner_hash: self.owner_hash.clone(), cells })
    }

    fn zip(&self, other: &CommutantElement, f: impl Fn(&Matrix, &Matrix) -> Matrix) -> CommutantElement {
        assert_eq!(self.owner_hash, other.owner_hash, "elements of different models");
        let cells = self
            .cells
            .iter()
            .map(|(id, m)| (id.clone(), f(m, other.cell(id))))
            .collect();
        CommutantElement { owner_hash: self.owner_hash.clone(), cells }
    }
}

impl Add for &CommutantElement {
    type Output = CommutantElement;
    fn add(self, rhs: &CommutantElement) -> CommutantElement {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &CommutantElement {
    type Output = CommutantElement;
    fn sub(self, rhs: &CommutantElement) -> CommutantElement {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul for &CommutantElement {
    type Output = CommutantElement;
    fn mul(self, rhs: &CommutantElement) -> CommutantElement {
        self.zip(rhs, |a, b| a * b)
    }
}

/// Exact per-cell basis of the commutant of a valid model, each basis
/// matrix bundled as an element supported on its one cell, together with
/// the per-cell dimensions.
pub fn commutant_basis(
    model: &OperatorModel,
) -> Result<(Vec<CommutantElement>, BTreeMap<CellId, usize>), CommutantError> {
    require_valid(model)?;
    let hash = model.content_hash();
    let mut elements = Vec::new();
    let mut dims = BTreeMap::new();
    for cell in model.partition().cells() {
        let fiber = model.fiber(&cell.id);
        let basis = solve_intertwiner(&fiber, &fiber);
        dims.insert(cell.id.clone(), basis.len());
        for b in basis {
            let mut cells = BTreeMap::new();
            for other in model.partition().cells() {
                let d = model.fiber_dim(&other.id);
                cells.insert(
                    other.id.clone(),
                    if other.id == cell.id { b.clone() } else { Matrix::zeros(d, d) },
                );
            }
            elements.push(CommutantElement::from_verified(hash.clone(), cells));
        }
    }
    Ok((elements, dims))
}
