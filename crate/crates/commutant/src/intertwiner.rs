//! Intertwiners between two single blocks, with their structural zero
//! patterns.
//!
//! For blocks of sizes `n₁ > n₂` every solution of `A·X = X·B` vanishes
//! below the upper-triangular corner: the top `n₂×n₂` part is upper
//! triangular and the remaining rows are zero. In the opposite direction
//! the nonzero part sits in the last `n₂` columns, shifted upper
//! triangular. Equal sizes give upper-triangular solutions (with equal
//! diagonal exactly when the blocks coincide). The basis is computed
//! cellwise and the pattern is checked on every basis element, which
//! settles it for the whole solution space.

use std::collections::BTreeMap;
use std::fmt;

use nnormal_core::{refine_common, solve_intertwiner, CellId, Matrix, OperatorModel};

use crate::element::require_valid;
use crate::error::CommutantError;

/// Relative shape of the two block sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SizePattern {
    /// `n₁ > n₂`: upper-triangular top square over zero rows.
    Tall,
    /// `n₁ < n₂`: zero columns before a shifted upper triangle.
    Wide,
    /// `n₁ = n₂`: upper triangular.
    Square,
}

impl fmt::Display for SizePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizePattern::Tall => write!(f, "tall (triangular over zero rows)"),
            SizePattern::Wide => write!(f, "wide (zero columns before shifted triangle)"),
            SizePattern::Square => write!(f, "square (upper triangular)"),
        }
    }
}

/// One basis solution of `A·X = X·B`, stored per matched cell (keyed by
/// the left model's cell id); common cells not carrying the solution's
/// support hold zero matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepIntertwiner {
    pub cells: BTreeMap<CellId, Matrix>,
}

/// Structure report for an intertwiner basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntertwinerStructure {
    pub pattern: SizePattern,
    /// Every basis element satisfies the zero pattern.
    pub pattern_ok: bool,
    /// Square case only: every basis element has a constant diagonal at
    /// every cell (true for the commutant of a single block).
    pub constant_diagonal: bool,
    /// Solution-space dimension per matched cell, keyed by left cell id.
    pub per_cell_dim: BTreeMap<CellId, usize>,
    /// Matched cell pairs (left id, right id).
    pub matched: Vec<(CellId, CellId)>,
}

/// Whether entry `(r, c)` may be nonzero in an intertwiner from an
/// `n₁`-block to an `n₂`-block.
pub fn pattern_allows(n1: usize, n2: usize, r: usize, c: usize) -> bool {
    let shift = n2 as isize - n1 as isize;
    (c as isize - r as isize) >= shift.max(0)
}

/// Basis of step-matrix solutions of `A·X = X·B` for two valid
/// single-block models of multiplicity one, with the structure report.
pub fn intertwiner_basis(
    a: &OperatorModel,
    b: &OperatorModel,
) -> Result<(Vec<StepIntertwiner>, IntertwinerStructure), CommutantError> {
    require_valid(a)?;
    require_valid(b)?;
    let [block_a] = a.blocks() else { return Err(CommutantError::NotSingleBlock) };
    let [block_b] = b.blocks() else { return Err(CommutantError::NotSingleBlock) };
    if block_a.multiplicity != 1 || block_b.multiplicity != 1 {
        return Err(CommutantError::NotSingleBlock);
    }
    let n1 = block_a.block.size();
    let n2 = block_b.block.size();
    let pattern = match n1.cmp(&n2) {
        std::cmp::Ordering::Greater => SizePattern::Tall,
        std::cmp::Ordering::Less => SizePattern::Wide,
        std::cmp::Ordering::Equal => SizePattern::Square,
    };

    let matching = refine_common(a.partition(), b.partition());
    // solutions live on cells covered by both blocks
    let common: Vec<(CellId, CellId)> = matching
        .matched
        .iter()
        .filter(|(l, r)| block_a.block.covers(l) && block_b.block.covers(r))
        .cloned()
        .collect();

    let mut elements = Vec::new();
    let mut per_cell_dim = BTreeMap::new();
    let mut pattern_ok = true;
    let mut constant_diagonal = n1 == n2;
    for (left, right) in &common {
        let basis = solve_intertwiner(&a.fiber(left), &b.fiber(right));
        per_cell_dim.insert(left.clone(), basis.len());
        for x in basis {
            for r in 0..n1 {
                for c in 0..n2 {
                    if !pattern_allows(n1, n2, r, c) && !x.at(r, c).is_zero() {
                        pattern_ok = false;
                    }
                }
            }
            if n1 == n2 {
                let d0 = x.at(0, 0);
                if (1..n1).any(|i| x.at(i, i) != d0) {
                    constant_diagonal = false;
                }
            }
            let mut cells = BTreeMap::new();
            for (other_left, _) in &common {
                cells.insert(
                    other_left.clone(),
                    if other_left == left { x.clone() } else { Matrix::zeros(n1, n2) },
                );
            }
            elements.push(StepIntertwiner { cells });
        }
    }
    let structure = IntertwinerStructure {
        pattern,
        pattern_ok,
        constant_diagonal,
        per_cell_dim,
        matched: common,
    };
    Ok((elements, structure))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nnormal_core::{rat, Cell, Diagonal, ModelBlock, Partition, Scalar, StepFunction, TriangularBlock};

    fn partition(coords: &[i64]) -> Partition {
        Partition::new(
            coords
                .iter()
                .enumerate()
                .map(|(k, &c)| Cell::new(format!("c{k}"), Scalar::from_int(c), rat(1)))
                .collect(),
        )
        .unwrap()
    }

    fn canonical_block_model(n: usize, p: &Partition) -> OperatorModel {
        let block = TriangularBlock::canonical(n, p.ids().cloned()).unwrap();
        OperatorModel::new(p.clone(), vec![ModelBlock { block, multiplicity: 1 }]).unwrap()
    }

    #[test]
    fn same_block_commutant_pattern() {
        let p = partition(&[2, 5]);
        let a = canonical_block_model(2, &p);
        let (elements, s) = intertwiner_basis(&a, &a).unwrap();
        assert_eq!(s.pattern, SizePattern::Square);
        assert!(s.pattern_ok);
        assert!(s.constant_diagonal);
        assert!(s.per_cell_dim.values().all(|&d| d == 2));
        assert_eq!(elements.len(), 4);
    }

    #[test]
    fn coordinate_superdiagonal_pair_basis() {
        // blocks with superdiagonal 1 and superdiagonal λ over {1, 2}:
        // per-cell basis dimension 2, diagonals related but not constant
        let p = partition(&[1, 2]);
        let a = canonical_block_model(2, &p);
        let f = StepFunction::from_pairs(
            p.cells().iter().map(|c| (c.id.clone(), c.coordinate.clone())),
        );
        let block = TriangularBlock::new(
            2,
            p.ids().cloned(),
            BTreeMap::from([((1, 2), f)]),
            Diagonal::Coordinate,
        )
        .unwrap();
        let b = OperatorModel::new(p.clone(), vec![ModelBlock { block, multiplicity: 1 }]).unwrap();
        let (_, s) = intertwiner_basis(&a, &b).unwrap();
        assert_eq!(s.pattern, SizePattern::Square);
        assert!(s.pattern_ok);
        assert!(!s.constant_diagonal);
        assert!(s.per_cell_dim.values().all(|&d| d == 2));
    }

    #[test]
    fn tall_pair_has_triangle_over_zero_rows() {
        let p = partition(&[0]);
        let a = canonical_block_model(3, &p);
        let b = canonical_block_model(2, &p);
        let (elements, s) = intertwiner_basis(&a, &b).unwrap();
        assert_eq!(s.pattern, SizePattern::Tall);
        assert!(s.pattern_ok);
        assert_eq!(s.per_cell_dim[&CellId::new("c0")], 2);
        for e in &elements {
            let x = &e.cells[&CellId::new("c0")];
            assert!(x.at(2, 0).is_zero() && x.at(2, 1).is_zero());
            assert!(x.at(1, 0).is_zero());
        }
    }

    #[test]
    fn wide_pair_has_shifted_triangle() {
        let p = partition(&[0]);
        let a = canonical_block_model(2, &p);
        let b = canonical_block_model(3, &p);
        let (_, s) = intertwiner_basis(&a, &b).unwrap();
        assert_eq!(s.pattern, SizePattern::Wide);
        assert!(s.pattern_ok);
        assert_eq!(s.per_cell_dim[&CellId::new("c0")], 2);
    }

    #[test]
    fn rejects_multiplicity_or_multiple_blocks() {
        let p = partition(&[0]);
        let block = TriangularBlock::canonical(2, p.ids().cloned()).unwrap();
        let m = OperatorModel::new(p.clone(), vec![ModelBlock { block, multiplicity: 2 }]).unwrap();
        let a = canonical_block_model(2, &p);
        assert!(matches!(intertwiner_basis(&a, &m), Err(CommutantError::NotSingleBlock)));
    }
}
