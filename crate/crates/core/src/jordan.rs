//! Jordan structure over exact scalars.
//!
//! All callers in this workspace read eigenvalues off triangular
//! diagonals, so no eigenvalue finding happens here: the caller supplies
//! the (exhaustive) list. Block sizes come from rank sequences of powers,
//! never from eigenvector chains, so the structure itself involves no
//! basis choices; chain bases are built separately (and
//! deterministically) only where an explicit similarity witness is
//! needed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::matrix::{Matrix, SpanTracker};
use crate::scalar::Scalar;

/// Eigenvalue → descending Jordan block sizes.
#[derive(Clone, PartialEq, Eq)]
pub struct JordanStructure {
    blocks: BTreeMap<Scalar, Vec<usize>>,
}

impl JordanStructure {
    pub fn new(blocks: BTreeMap<Scalar, Vec<usize>>) -> Self {
        let mut blocks = blocks;
        blocks.retain(|_, sizes| !sizes.is_empty());
        for sizes in blocks.values_mut() {
            sizes.sort_unstable_by(|a, b| b.cmp(a));
        }
        JordanStructure { blocks }
    }

    pub fn empty() -> Self {
        JordanStructure { blocks: BTreeMap::new() }
    }

    pub fn eigenvalues(&self) -> impl Iterator<Item = &Scalar> {
        self.blocks.keys()
    }

    /// Descending block sizes for one eigenvalue (empty if absent).
    pub fn sizes(&self, eigenvalue: &Scalar) -> &[usize] {
        self.blocks.get(eigenvalue).map_or(&[], |v| v.as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Scalar, &Vec<usize>)> {
        self.blocks.iter()
    }

    pub fn dim(&self) -> usize {
        self.blocks.values().flat_map(|v| v.iter()).sum()
    }

    /// Merges another structure into this one (direct-sum semantics).
    pub fn merge(&mut self, other: &JordanStructure) {
        for (ev, sizes) in &other.blocks {
            let entry = self.blocks.entry(ev.clone()).or_default();
            entry.extend_from_slice(sizes);
            entry.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
}

impl fmt::Debug for JordanStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.blocks.iter().map(|(ev, s)| format!("{ev}: {s:?}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JordanError {
    /// The block sizes found for the supplied eigenvalues do not fill the
    /// matrix dimension; the eigenvalue list was incomplete.
    IncompleteEigenvalues { dim: usize, covered: usize },
    NotIdempotent,
    DimensionMismatch,
    /// An exactness invariant failed; always a bug.
    Internal(&'static str),
}

impl fmt::Display for JordanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JordanError::IncompleteEigenvalues { dim, covered } => write!(
                f,
                "eigenvalue list incomplete: blocks cover {covered} of dimension {dim}"
            ),
            JordanError::NotIdempotent => write!(f, "matrix is not idempotent"),
            JordanError::DimensionMismatch => write!(f, "matrices have mismatched dimensions"),
            JordanError::Internal(msg) => write!(f, "internal invariant breach: {msg}"),
        }
    }
}

impl std::error::Error for JordanError {}

/// Jordan structure from the rank sequence `r_k = rank((M - cI)^k)`:
/// the number of blocks of size ≥ k is `r_{k-1} - r_k`.
pub fn jordan_structure(m: &Matrix, eigenvalues: &[Scalar]) -> Result<JordanStructure, JordanError> {
    if !m.is_square() {
        return Err(JordanError::DimensionMismatch);
    }
    let n = m.rows();
    let distinct: BTreeSet<Scalar> = eigenvalues.iter().cloned().collect();
    let mut blocks = BTreeMap::new();
    let mut covered = 0usize;
    for c in distinct {
        let sizes = sizes_from_rank_seq(m, &c)?;
        covered += sizes.iter().sum::<usize>();
        if !sizes.is_empty() {
            blocks.insert(c, sizes);
        }
    }
    if covered != n {
        return Err(JordanError::IncompleteEigenvalues { dim: n, covered });
    }
    Ok(JordanStructure::new(blocks))
}

fn shift(m: &Matrix, c: &Scalar) -> Matrix {
    let mut s = m.clone();
    for i in 0..m.rows() {
        s.set(i, i, m.at(i, i) - c);
    }
    s
}

fn sizes_from_rank_seq(m: &Matrix, c: &Scalar) -> Result<Vec<usize>, JordanError> {
    let n = m.rows();
    let shifted = shift(m, c);
    // ranks[k] = rank((M - cI)^k), k = 0, 1, ...
    let mut ranks = vec![n];
    let mut power = Matrix::identity(n);
    loop {
        power = &power * &shifted;
        let r = power.rank();
        let last = *ranks.last().expect("nonempty");
        ranks.push(r);
        if r == last {
            break;
        }
        if ranks.len() > n + 2 {
            return Err(JordanError::Internal("rank sequence failed to stabilize"));
        }
    }
    // at_least[k] = #blocks of size >= k for k >= 1
    let at_least: Vec<usize> = (1..ranks.len()).map(|k| ranks[k - 1] - ranks[k]).collect();
    let mut sizes = Vec::new();
    for k in (1..=at_least.len()).rev() {
        let here = at_least[k - 1];
        let above = if k < at_least.len() { at_least[k] } else { 0 };
        for _ in 0..(here - above) {
            sizes.push(k);
        }
    }
    Ok(sizes)
}

/// Jordan chain basis: returns `P` with `M·P = P·J` where `J` is the
/// Jordan matrix determined by the structure, eigenvalues in scalar
/// order, block sizes descending, chains in deterministic kernel order.
pub fn jordan_chain_basis(
    m: &Matrix,
    eigenvalues: &[Scalar],
) -> Result<(Matrix, JordanStructure), JordanError> {
    let structure = jordan_structure(m, eigenvalues)?;
    let n = m.rows();
    let mut columns: Vec<Matrix> = Vec::new();
    for (c, sizes) in structure.iter() {
        let shifted = shift(m, c);
        let max_size = sizes[0];
        // powers[k] = (M - cI)^k for k = 0..=max_size
        let mut powers = vec![Matrix::identity(n)];
        for k in 1..=max_size {
            powers.push(&powers[k - 1] * &shifted);
        }
        let kernel_bases: Vec<Vec<Matrix>> =
            (0..=max_size).map(|k| powers[k].nullspace()).collect();
        let mut chains: Vec<Vec<Matrix>> = Vec::new();
        let mut carried: Vec<Matrix> = Vec::new();
        for k in (1..=max_size).rev() {
            let mut span = SpanTracker::new(n);
            for v in &kernel_bases[k - 1] {
                span.add(v);
            }
            for v in &carried {
                if !span.add(v) {
                    return Err(JordanError::Internal("carried chain vector dependent"));
                }
            }
            let mut new_tops = Vec::new();
            for w in &kernel_bases[k] {
                if span.add(w) {
                    new_tops.push(w.clone());
                }
            }
            for u in &new_tops {
                // chain ordered bottom-up: (M-cI) maps each column to the previous
                let chain: Vec<Matrix> = (0..k).rev().map(|e| &powers[e] * u).collect();
                chains.push(chain);
            }
            carried = carried
                .iter()
                .chain(new_tops.iter())
                .map(|v| &shifted * v)
                .collect();
        }
        let counted: Vec<usize> = chains.iter().map(|ch| ch.len()).collect();
        if counted != *sizes {
            return Err(JordanError::Internal("chain sizes disagree with rank sequence"));
        }
        for chain in chains {
            columns.extend(chain);
        }
    }
    if columns.len() != n {
        return Err(JordanError::Internal("chain basis does not fill the space"));
    }
    Ok((Matrix::from_columns(&columns), structure))
}

/// The Jordan matrix of a structure: eigenvalues in scalar order, sizes
/// descending, superdiagonal ones.
pub fn jordan_matrix(structure: &JordanStructure) -> Matrix {
    let mut blocks = Vec::new();
    for (c, sizes) in structure.iter() {
        for &s in sizes {
            let mut b = Matrix::zeros(s, s);
            for i in 0..s {
                b.set(i, i, c.clone());
                if i + 1 < s {
                    b.set(i, i + 1, Scalar::one());
                }
            }
            blocks.push(b);
        }
    }
    Matrix::block_diag(blocks.iter())
}

/// Exact similarity witness: `Some(S)` with `S·M1·S⁻¹ = M2` (verified by
/// multiplication before returning), or `None` when the Jordan
/// structures differ. Any valid witness is acceptable; no canonical
/// choice is promised.
pub fn similarity_transform(
    m1: &Matrix,
    m2: &Matrix,
    eigenvalues: &[Scalar],
) -> Result<Option<Matrix>, JordanError> {
    if m1.rows() != m2.rows() || !m1.is_square() || !m2.is_square() {
        return Err(JordanError::DimensionMismatch);
    }
    let (p1, s1) = jordan_chain_basis(m1, eigenvalues)?;
    let (p2, s2) = jordan_chain_basis(m2, eigenvalues)?;
    if s1 != s2 {
        return Ok(None);
    }
    let p1_inv = p1.inverse().ok_or(JordanError::Internal("chain basis singular"))?;
    let s = &p2 * &p1_inv;
    if &(&s * m1) != &(m2 * &s) {
        return Err(JordanError::Internal("similarity witness failed verification"));
    }
    Ok(Some(s))
}

/// Exact basis of `{X : M1·X = X·M2}`, reshaped to p×q matrices, in the
/// deterministic free-column order of the linearized system.
pub fn solve_intertwiner(m1: &Matrix, m2: &Matrix) -> Vec<Matrix> {
    assert!(m1.is_square() && m2.is_square());
    let p = m1.rows();
    let q = m2.rows();
    if p == 0 || q == 0 {
        return Vec::new();
    }
    // unknown X[i][j] at index i*q + j; one equation per entry (i, j)
    let mut sys = Matrix::zeros(p * q, p * q);
    for i in 0..p {
        for j in 0..q {
            let eq = i * q + j;
            for k in 0..p {
                let v = sys.at(eq, k * q + j) + m1.at(i, k);
                sys.set(eq, k * q + j, v);
            }
            for k in 0..q {
                let v = sys.at(eq, i * q + k) - m2.at(k, j);
                sys.set(eq, i * q + k, v);
            }
        }
    }
    sys.nullspace()
        .into_iter()
        .map(|v| Matrix::from_fn(p, q, |i, j| v.at(i * q + j, 0).clone()))
        .collect()
}

/// Conjugates an exact idempotent to `diag(1,…,1,0,…,0)`: returns
/// `(S, D)` with `S·P·S⁻¹ = D`, `trace(D) = rank(P)`.
pub fn idempotent_normal_form(p: &Matrix) -> Result<(Matrix, Matrix), JordanError> {
    if !p.is_square() {
        return Err(JordanError::DimensionMismatch);
    }
    if &(p * p) != p {
        return Err(JordanError::NotIdempotent);
    }
    let n = p.rows();
    // range basis: independent columns of P, in column order
    let mut span = SpanTracker::new(n);
    let mut basis: Vec<Matrix> = Vec::new();
    for c in 0..n {
        let col = p.column(c);
        if span.add(&col) {
            basis.push(col);
        }
    }
    let rank = basis.len();
    basis.extend(p.nullspace());
    if basis.len() != n {
        return Err(JordanError::Internal("range and kernel of idempotent do not fill space"));
    }
    let b = Matrix::from_columns(&basis);
    let s = b.inverse().ok_or(JordanError::Internal("range+kernel basis singular"))?;
    let mut d = Matrix::zeros(n, n);
    for i in 0..rank {
        d.set(i, i, Scalar::one());
    }
    let conj = &(&s * p) * &b;
    if conj != d {
        return Err(JordanError::Internal("idempotent normal form failed verification"));
    }
    Ok((s, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn sc(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn nilpotent_block_structure() {
        let m = Matrix::from_int_rows(&[&[0, 1], &[0, 0]]);
        let s = jordan_structure(&m, &[sc(0)]).unwrap();
        assert_eq!(s.sizes(&sc(0)), &[2]);
    }

    #[test]
    fn constant_diagonal_with_nonzero_superdiagonal_is_one_block() {
        // triangular fiber with nonvanishing superdiagonal: single block
        for c in [1i64, -2, 5] {
            let m = Matrix::from_int_rows(&[&[c, c], &[0, c]]);
            let s = jordan_structure(&m, &[sc(c)]).unwrap();
            assert_eq!(s.sizes(&sc(c)), &[2], "c = {c}");
        }
        let m = Matrix::from_int_rows(&[&[3, 2, 7], &[0, 3, -1], &[0, 0, 3]]);
        let s = jordan_structure(&m, &[sc(3)]).unwrap();
        assert_eq!(s.sizes(&sc(3)), &[3]);
    }

    #[test]
    fn zero_matrix_splits_into_ones() {
        let m = Matrix::zeros(2, 2);
        let s = jordan_structure(&m, &[sc(0)]).unwrap();
        assert_eq!(s.sizes(&sc(0)), &[1, 1]);
    }

    #[test]
    fn incomplete_eigenvalue_list_is_reported() {
        let m = Matrix::from_int_rows(&[&[1, 0], &[0, 2]]);
        let err = jordan_structure(&m, &[sc(1)]).unwrap_err();
        assert!(matches!(err, JordanError::IncompleteEigenvalues { dim: 2, covered: 1 }));
    }

    #[test]
    fn mixed_structure() {
        let m = Matrix::from_int_rows(&[
            &[2, 1, 0, 0],
            &[0, 2, 0, 0],
            &[0, 0, 2, 0],
            &[0, 0, 0, 7],
        ]);
        let s = jordan_structure(&m, &[sc(2), sc(7)]).unwrap();
        assert_eq!(s.sizes(&sc(2)), &[2, 1]);
        assert_eq!(s.sizes(&sc(7)), &[1]);
        assert_eq!(s.dim(), 4);
    }

    #[test]
    fn chain_basis_conjugates_to_jordan_matrix() {
        let m = Matrix::from_int_rows(&[
            &[0, 2, 3, 0],
            &[0, 0, 5, 1],
            &[0, 0, 0, 0],
            &[0, 0, 0, 0],
        ]);
        let (p, structure) = jordan_chain_basis(&m, &[sc(0)]).unwrap();
        let j = jordan_matrix(&structure);
        assert_eq!(&m * &p, &p * &j);
        assert!(p.inverse().is_some());
    }

    #[test]
    fn similarity_transform_examples() {
        let a = Matrix::from_int_rows(&[&[0, 1], &[0, 0]]);
        let b = Matrix::from_int_rows(&[&[0, 2], &[0, 0]]);
        let s = similarity_transform(&a, &b, &[sc(0)]).unwrap().unwrap();
        assert_eq!(&(&s * &a), &(&b * &s));
        assert!(s.inverse().is_some());

        // same matrix: deterministic chains give the identity witness
        let s = similarity_transform(&a, &a, &[sc(0)]).unwrap().unwrap();
        assert!(s.is_identity());

        let z = Matrix::zeros(2, 2);
        assert!(similarity_transform(&a, &z, &[sc(0)]).unwrap().is_none());
    }

    #[test]
    fn intertwiner_of_equal_jordan_block() {
        let c = sc(4);
        let mut m = Matrix::zeros(2, 2);
        m.set(0, 0, c.clone());
        m.set(1, 1, c.clone());
        m.set(0, 1, Scalar::one());
        let basis = solve_intertwiner(&m, &m);
        assert_eq!(basis.len(), 2);
        for x in &basis {
            assert_eq!(&(&m * x), &(x * &m));
        }
    }

    #[test]
    fn intertwiner_disjoint_spectra_is_trivial() {
        let a = Matrix::from_int_rows(&[&[1, 1], &[0, 1]]);
        let b = Matrix::from_int_rows(&[&[5, 1], &[0, 5]]);
        assert!(solve_intertwiner(&a, &b).is_empty());
    }

    #[test]
    fn idempotent_normal_form_displayed_case() {
        let p = Matrix::from_int_rows(&[&[1, 1], &[0, 0]]);
        let (s, d) = idempotent_normal_form(&p).unwrap();
        assert_eq!(d, Matrix::from_int_rows(&[&[1, 0], &[0, 0]]));
        assert_eq!(s, Matrix::from_int_rows(&[&[1, 1], &[0, 1]]));
        let not = Matrix::from_int_rows(&[&[1, 1], &[0, 1]]);
        assert_eq!(idempotent_normal_form(&not).unwrap_err(), JordanError::NotIdempotent);
    }

    #[test]
    fn idempotent_normal_form_identity_and_rank_one() {
        let (s, d) = idempotent_normal_form(&Matrix::identity(3)).unwrap();
        assert!(s.is_identity() && d.is_identity());
        let p = Matrix::from_int_rows(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, 0]]);
        let (_, d) = idempotent_normal_form(&p).unwrap();
        assert_eq!(d, p);
    }
}
