//! Brute-force ground truth, deliberately upstream of the decision
//! machinery it adjudicates.
//!
//! On the finite atomic model every operator is a finite matrix, where
//! similarity is exactly equality of Jordan forms. This crate assembles
//! fibers, reads eigenvalues off triangular diagonals, and compares
//! Jordan structures — nothing else. It depends only on the core
//! substrate, never on the canonicalization or commutant crates, so it
//! can adjudicate them.

pub mod gen;

use std::collections::BTreeMap;

use nnormal_core::{
    jordan_structure, CellId, JordanStructure, Matrix, MultiplicityInput, OperatorModel, Scalar,
};

/// Either kind of model, by reference.
#[derive(Clone, Copy)]
pub enum ModelRef<'a> {
    Operator(&'a OperatorModel),
    Multiplicity(&'a MultiplicityInput),
}

impl<'a> From<&'a OperatorModel> for ModelRef<'a> {
    fn from(m: &'a OperatorModel) -> Self {
        ModelRef::Operator(m)
    }
}

impl<'a> From<&'a MultiplicityInput> for ModelRef<'a> {
    fn from(m: &'a MultiplicityInput) -> Self {
        ModelRef::Multiplicity(m)
    }
}

impl<'a> ModelRef<'a> {
    pub fn partition(&self) -> &'a nnormal_core::Partition {
        match self {
            ModelRef::Operator(m) => m.partition(),
            ModelRef::Multiplicity(m) => m.partition(),
        }
    }

    pub fn fiber(&self, id: &CellId) -> Matrix {
        match self {
            ModelRef::Operator(m) => m.fiber(id),
            ModelRef::Multiplicity(m) => m.fiber(id),
        }
    }

    pub fn assemble(&self) -> Matrix {
        match self {
            ModelRef::Operator(m) => m.assemble(),
            ModelRef::Multiplicity(m) => m.assemble(),
        }
    }
}

fn diagonal_values(m: &Matrix) -> Vec<Scalar> {
    (0..m.rows()).map(|i| m.at(i, i).clone()).collect()
}

/// Jordan structure of the assembled matrix.
///
/// The assembled matrix is block-diagonal over cells, so ranks of
/// shifted powers are cellwise sums and the global structure is the
/// eigenvalue-keyed merge of the per-cell structures; `tests` cross-check
/// this against the literal one-shot computation.
pub fn global_jordan<'a>(model: impl Into<ModelRef<'a>>) -> JordanStructure {
    let model = model.into();
    let mut total = JordanStructure::empty();
    for cell in model.partition().cells() {
        let fiber = model.fiber(&cell.id);
        if fiber.rows() == 0 {
            continue;
        }
        let eigenvalues = diagonal_values(&fiber);
        let s = jordan_structure(&fiber, &eigenvalues)
            .expect("triangular fiber: diagonal entries are exhaustive eigenvalues");
        total.merge(&s);
    }
    total
}

/// Jordan structure computed in one shot on the fully assembled matrix.
/// Exponential comfort, desk-scale only; kept as the cross-check for
/// `global_jordan`.
pub fn assembled_jordan<'a>(model: impl Into<ModelRef<'a>>) -> JordanStructure {
    let m = model.into().assemble();
    let eigenvalues = diagonal_values(&m);
    jordan_structure(&m, &eigenvalues).expect("triangular assembly")
}

/// Ground-truth similarity verdict: equal Jordan form of the assembled
/// matrices. Accepts raw models so it can adjudicate canonicalization.
pub fn oracle_similar<'a, 'b>(a: impl Into<ModelRef<'a>>, b: impl Into<ModelRef<'b>>) -> bool {
    global_jordan(a) == global_jordan(b)
}

/// Per-cell dimension of `{X : A(λ)X = XB(λ)}` for coordinate-matched
/// cells, from the raw linearized system (Kronecker form), keyed by the
/// matched `(left, right)` cell ids.
pub fn oracle_intertwiner_dim(
    a: &OperatorModel,
    b: &OperatorModel,
) -> BTreeMap<(CellId, CellId), usize> {
    let matching = nnormal_core::refine_common(a.partition(), b.partition());
    let mut out = BTreeMap::new();
    for (left, right) in matching.matched {
        let fa = a.fiber(&left);
        let fb = b.fiber(&right);
        let (p, q) = (fa.rows(), fb.rows());
        if p == 0 || q == 0 {
            out.insert((left, right), 0);
            continue;
        }
        // vec(X) row-major; system rows are the entries of A·X - X·B
        // written via the Kronecker identity vec(AXI - IXB).
        let mut sys = Matrix::zeros(p * q, p * q);
        for i in 0..p {
            for j in 0..q {
                for k in 0..p {
                    for l in 0..q {
                        // coefficient of X[k][l] in equation (i, j)
                        let mut coeff = Scalar::zero();
                        if l == j {
                            coeff = coeff + fa.at(i, k);
                        }
                        if k == i {
                            coeff = coeff - fb.at(l, j);
                        }
                        if !coeff.is_zero() {
                            sys.set(i * q + j, k * q + l, coeff);
                        }
                    }
                }
            }
        }
        let dim = p * q - sys.rank();
        out.insert((left, right), dim);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use gen::{random_model, random_multiplicity_input, GenConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn global_jordan_agrees_with_one_shot_assembly() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = GenConfig { max_cells: 3, max_blocks: 2, max_size: 3, max_mult: 2 };
        for _ in 0..25 {
            let m = random_model(&mut rng, &cfg);
            assert_eq!(global_jordan(&m), assembled_jordan(&m));
        }
        for _ in 0..25 {
            let mi = random_multiplicity_input(&mut rng, 3, 3);
            assert_eq!(global_jordan(&mi), assembled_jordan(&mi));
        }
    }

    #[test]
    fn similar_to_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cfg = GenConfig::default();
        for _ in 0..10 {
            let m = random_model(&mut rng, &cfg);
            assert!(oracle_similar(&m, &m));
        }
    }

    #[test]
    fn intertwiner_dim_same_jordan_block_is_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = GenConfig { max_cells: 2, max_blocks: 1, max_size: 3, max_mult: 1 };
        let m = random_model(&mut rng, &cfg);
        let dims = oracle_intertwiner_dim(&m, &m);
        let n = m.blocks()[0].block.size();
        for ((left, _), d) in dims {
            let covered = m.blocks()[0].block.covers(&left);
            assert_eq!(d, if covered { n } else { 0 });
        }
    }
}
