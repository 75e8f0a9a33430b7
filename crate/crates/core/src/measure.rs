//! Finite atomic measure partitions and step functions.
//!
//! A [`Partition`] is the finite atomic surrogate for a compactly
//! supported measure: a list of [`Cell`]s, each an atom with a spectral
//! coordinate and a positive mass. A [`StepFunction`] assigns an exact
//! [`Scalar`] to each cell of its domain; evaluating it off-domain is an
//! error, never an implicit zero.
//!
//! Weights are carried for mass bookkeeping but ignored by every
//! similarity-related computation: at atomic scale the measure class is
//! the support set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::scalar::{rational_text, Rational, Scalar};
use num_traits::Zero;

/// Opaque identifier of a cell, unique within its partition.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId(String);

impl CellId {
    pub fn new(s: impl Into<String>) -> Self {
        CellId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<&str> for CellId {
    fn from(s: &str) -> Self {
        CellId::new(s)
    }
}

/// One atom of the measure: spectral point `coordinate` with mass `weight`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub id: CellId,
    pub coordinate: Scalar,
    pub weight: Rational,
}

impl Cell {
    pub fn new(id: impl Into<String>, coordinate: Scalar, weight: Rational) -> Self {
        Cell { id: CellId::new(id), coordinate, weight }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeasureError {
    EmptyPartition,
    DuplicateId(CellId),
    DuplicateCoordinate(CellId, CellId),
    NonpositiveWeight(CellId),
    OutsideDomain(CellId),
    NotTotal { missing: CellId },
    UnknownCell(CellId),
}

impl fmt::Display for MeasureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureError::EmptyPartition => write!(f, "partition must contain at least one cell"),
            MeasureError::DuplicateId(id) => write!(f, "duplicate cell id {id:?}"),
            MeasureError::DuplicateCoordinate(a, b) => {
                write!(f, "cells {a:?} and {b:?} share a coordinate; express repeated spectral points as multiplicity")
            }
            MeasureError::NonpositiveWeight(id) => write!(f, "cell {id:?} has nonpositive weight"),
            MeasureError::OutsideDomain(id) => {
                write!(f, "step function evaluated outside its domain at cell {id:?}")
            }
            MeasureError::NotTotal { missing } => {
                write!(f, "step function is not total: no value at cell {missing:?}")
            }
            MeasureError::UnknownCell(id) => write!(f, "cell {id:?} is not in the partition"),
        }
    }
}

impl std::error::Error for MeasureError {}

/// Ordered, nonempty list of cells with pairwise distinct ids and
/// pairwise distinct coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    cells: Vec<Cell>,
}

impl Partition {
    pub fn new(cells: Vec<Cell>) -> Result<Self, MeasureError> {
        if cells.is_empty() {
            return Err(MeasureError::EmptyPartition);
        }
        let mut ids = BTreeSet::new();
        for c in &cells {
            if !ids.insert(c.id.clone()) {
                return Err(MeasureError::DuplicateId(c.id.clone()));
            }
            if c.weight <= Rational::zero() {
                return Err(MeasureError::NonpositiveWeight(c.id.clone()));
            }
        }
        for (i, a) in cells.iter().enumerate() {
            for b in &cells[i + 1..] {
                if a.coordinate == b.coordinate {
                    return Err(MeasureError::DuplicateCoordinate(a.id.clone(), b.id.clone()));
                }
            }
        }
        Ok(Partition { cells })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        false // nonempty by construction
    }

    pub fn ids(&self) -> impl Iterator<Item = &CellId> {
        self.cells.iter().map(|c| &c.id)
    }

    pub fn get(&self, id: &CellId) -> Option<&Cell> {
        self.cells.iter().find(|c| &c.id == id)
    }

    pub fn contains(&self, id: &CellId) -> bool {
        self.get(id).is_some()
    }

    /// Position of a cell in the partition order.
    pub fn index_of(&self, id: &CellId) -> Option<usize> {
        self.cells.iter().position(|c| &c.id == id)
    }

    pub fn by_coordinate(&self, coord: &Scalar) -> Option<&Cell> {
        self.cells.iter().find(|c| &c.coordinate == coord)
    }

    pub fn total_weight(&self) -> Rational {
        self.cells.iter().map(|c| c.weight.clone()).sum()
    }
}

/// Element of the step-function algebra over one partition: a total map
/// from its domain cells to exact scalars.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepFunction {
    values: BTreeMap<CellId, Scalar>,
}

impl StepFunction {
    pub fn from_map(values: BTreeMap<CellId, Scalar>) -> Self {
        StepFunction { values }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (CellId, Scalar)>) -> Self {
        StepFunction { values: pairs.into_iter().collect() }
    }

    /// Constant function on the given cells.
    pub fn constant_on<'a>(cells: impl IntoIterator<Item = &'a CellId>, value: Scalar) -> Self {
        StepFunction {
            values: cells.into_iter().map(|id| (id.clone(), value.clone())).collect(),
        }
    }

    pub fn domain(&self) -> impl Iterator<Item = &CellId> {
        self.values.keys()
    }

    pub fn domain_set(&self) -> BTreeSet<CellId> {
        self.values.keys().cloned().collect()
    }

    /// Exact evaluation; off-domain is an error, not zero.
    pub fn eval(&self, id: &CellId) -> Result<&Scalar, MeasureError> {
        self.values.get(id).ok_or_else(|| MeasureError::OutsideDomain(id.clone()))
    }

    pub fn is_total_on<'a>(&self, cells: impl IntoIterator<Item = &'a CellId>) -> Result<(), MeasureError> {
        for id in cells {
            if !self.values.contains_key(id) {
                return Err(MeasureError::NotTotal { missing: id.clone() });
            }
        }
        Ok(())
    }

    /// Restriction to a subset of the domain (ids outside the domain are ignored).
    pub fn restrict<'a>(&self, cells: impl IntoIterator<Item = &'a CellId>) -> StepFunction {
        StepFunction {
            values: cells
                .into_iter()
                .filter_map(|id| self.values.get(id).map(|v| (id.clone(), v.clone())))
                .collect(),
        }
    }

    /// Re-keys the domain through an id substitution map; ids absent from
    /// the map are kept as they are.
    pub fn rekey(&self, map: &BTreeMap<CellId, CellId>) -> StepFunction {
        StepFunction {
            values: self
                .values
                .iter()
                .map(|(id, v)| (map.get(id).cloned().unwrap_or_else(|| id.clone()), v.clone()))
                .collect(),
        }
    }
}

/// Result of matching two partitions by coordinate. Weights are ignored;
/// matching is exact coordinate equality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommonRefinement {
    /// `(left id, right id)` pairs in left partition order.
    pub matched: Vec<(CellId, CellId)>,
    /// Left cells with no coordinate partner, in left partition order.
    pub unmatched_left: Vec<CellId>,
    /// Right cells with no coordinate partner, in right partition order.
    pub unmatched_right: Vec<CellId>,
}

/// Matches cells of two partitions by equal coordinate.
pub fn refine_common(p1: &Partition, p2: &Partition) -> CommonRefinement {
    let mut matched = Vec::new();
    let mut unmatched_left = Vec::new();
    let mut right_taken: BTreeSet<CellId> = BTreeSet::new();
    for c in p1.cells() {
        match p2.by_coordinate(&c.coordinate) {
            Some(partner) => {
                matched.push((c.id.clone(), partner.id.clone()));
                right_taken.insert(partner.id.clone());
            }
            None => unmatched_left.push(c.id.clone()),
        }
    }
    let unmatched_right = p2
        .cells()
        .iter()
        .filter(|c| !right_taken.contains(&c.id))
        .map(|c| c.id.clone())
        .collect();
    CommonRefinement { matched, unmatched_left, unmatched_right }
}

/// Image partition of a pushforward together with its fiber map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pushforward {
    /// One cell per distinct value of the function; coordinate is that
    /// value, weight is the sum of the preimage weights.
    pub partition: Partition,
    /// For each image cell (in image order) the preimage cells in source
    /// partition order. The multiplicity of an image cell is the length
    /// of its preimage list.
    pub fibers: Vec<(CellId, Vec<CellId>)>,
}

impl Pushforward {
    pub fn multiplicity(&self, id: &CellId) -> Option<usize> {
        self.fibers.iter().find(|(v, _)| v == id).map(|(_, pre)| pre.len())
    }

    pub fn max_multiplicity(&self) -> usize {
        self.fibers.iter().map(|(_, pre)| pre.len()).max().unwrap_or(0)
    }
}

/// Pushes a partition forward through a total step function.
///
/// Image cells are ordered by first occurrence of their value and get
/// synthetic ids `v0, v1, …` (preimage ids may not combine injectively,
/// so derived names are not used).
pub fn pushforward(p: &Partition, f: &StepFunction) -> Result<Pushforward, MeasureError> {
    f.is_total_on(p.ids())?;
    let mut order: Vec<Scalar> = Vec::new();
    let mut groups: BTreeMap<Scalar, Vec<&Cell>> = BTreeMap::new();
    for c in p.cells() {
        let v = f.eval(&c.id)?.clone();
        if !groups.contains_key(&v) {
            order.push(v.clone());
        }
        groups.entry(v).or_default().push(c);
    }
    let mut cells = Vec::new();
    let mut fibers = Vec::new();
    for (k, value) in order.iter().enumerate() {
        let pre = &groups[value];
        let weight: Rational = pre.iter().map(|c| c.weight.clone()).sum();
        let id = CellId::new(format!("v{k}"));
        cells.push(Cell { id: id.clone(), coordinate: value.clone(), weight });
        fibers.push((id, pre.iter().map(|c| c.id.clone()).collect()));
    }
    Ok(Pushforward { partition: Partition::new(cells)?, fibers })
}

/// Renders a cell as `id(coordinate, w=weight)` for reports.
pub fn cell_text(c: &Cell) -> String {
    format!("{}({}, w={})", c.id, c.coordinate, rational_text(&c.weight))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ratq};

    fn cell(id: &str, coord: i64, w: (i64, i64)) -> Cell {
        Cell::new(id, Scalar::from_int(coord), ratq(w.0, w.1))
    }

    fn part(cells: Vec<Cell>) -> Partition {
        Partition::new(cells).unwrap()
    }

    #[test]
    fn partition_rejects_invalid() {
        assert_eq!(Partition::new(vec![]), Err(MeasureError::EmptyPartition));
        let dup_id = Partition::new(vec![cell("a", 0, (1, 1)), cell("a", 1, (1, 1))]);
        assert!(matches!(dup_id, Err(MeasureError::DuplicateId(_))));
        let dup_coord = Partition::new(vec![cell("a", 3, (1, 1)), cell("b", 3, (1, 1))]);
        assert!(matches!(dup_coord, Err(MeasureError::DuplicateCoordinate(_, _))));
        let bad_weight = Partition::new(vec![Cell::new("a", Scalar::zero(), rat(0))]);
        assert!(matches!(bad_weight, Err(MeasureError::NonpositiveWeight(_))));
    }

    #[test]
    fn step_function_off_domain_is_error() {
        let f = StepFunction::from_pairs([(CellId::new("a"), Scalar::one())]);
        assert!(f.eval(&CellId::new("a")).is_ok());
        assert!(matches!(f.eval(&CellId::new("b")), Err(MeasureError::OutsideDomain(_))));
    }

    #[test]
    fn refine_common_matches_by_coordinate_only() {
        let p1 = part(vec![cell("a", 0, (1, 1)), cell("b", 1, (1, 1))]);
        let p2 = part(vec![cell("x", 1, (1, 2)), cell("y", 2, (1, 1))]);
        let r = refine_common(&p1, &p2);
        assert_eq!(r.matched, vec![(CellId::new("b"), CellId::new("x"))]);
        assert_eq!(r.unmatched_left, vec![CellId::new("a")]);
        assert_eq!(r.unmatched_right, vec![CellId::new("y")]);
    }

    #[test]
    fn refine_common_identity_case() {
        let p = part(vec![cell("a", 0, (1, 1)), cell("b", 1, (1, 1))]);
        let r = refine_common(&p, &p);
        assert_eq!(r.matched.len(), 2);
        assert!(r.unmatched_left.is_empty() && r.unmatched_right.is_empty());
    }

    #[test]
    fn refine_common_ignores_weights() {
        let q = Scalar::new(ratq(1, 2), ratq(1, 3));
        let p1 = part(vec![Cell::new("a", q.clone(), rat(1))]);
        let p2 = part(vec![Cell::new("b", q, rat(7))]);
        let r = refine_common(&p1, &p2);
        assert_eq!(r.matched.len(), 1);
    }

    #[test]
    fn pushforward_constant_function() {
        let p = part(vec![cell("a", -1, (1, 1)), cell("b", 1, (1, 1))]);
        let f = StepFunction::constant_on(p.ids(), Scalar::from_int(5));
        let pf = pushforward(&p, &f).unwrap();
        assert_eq!(pf.partition.len(), 1);
        let v = &pf.partition.cells()[0];
        assert_eq!(v.coordinate, Scalar::from_int(5));
        assert_eq!(v.weight, rat(2));
        assert_eq!(pf.fibers[0].1, vec![CellId::new("a"), CellId::new("b")]);
        assert_eq!(pf.max_multiplicity(), 2);
    }

    #[test]
    fn pushforward_injective_relabels() {
        let p = part(vec![cell("a", 0, (1, 1)), cell("b", 1, (1, 1))]);
        let f = StepFunction::from_pairs([
            (CellId::new("a"), Scalar::from_int(10)),
            (CellId::new("b"), Scalar::from_int(20)),
        ]);
        let pf = pushforward(&p, &f).unwrap();
        assert_eq!(pf.partition.len(), 2);
        assert!(pf.fibers.iter().all(|(_, pre)| pre.len() == 1));
    }

    #[test]
    fn pushforward_conserves_mass_and_counts() {
        let p = part(vec![cell("a", 0, (1, 2)), cell("b", 1, (1, 3)), cell("c", 2, (2, 1))]);
        let f = StepFunction::from_pairs([
            (CellId::new("a"), Scalar::from_int(9)),
            (CellId::new("b"), Scalar::from_int(9)),
            (CellId::new("c"), Scalar::from_int(4)),
        ]);
        let pf = pushforward(&p, &f).unwrap();
        assert_eq!(pf.partition.total_weight(), p.total_weight());
        let total: usize = pf.fibers.iter().map(|(_, pre)| pre.len()).sum();
        assert_eq!(total, p.len());
        assert_eq!(pf.partition.cells()[0].coordinate, Scalar::from_int(9));
    }

    #[test]
    fn pushforward_requires_totality() {
        let p = part(vec![cell("a", 0, (1, 1)), cell("b", 1, (1, 1))]);
        let f = StepFunction::from_pairs([(CellId::new("a"), Scalar::one())]);
        assert!(matches!(pushforward(&p, &f), Err(MeasureError::NotTotal { .. })));
    }
}
