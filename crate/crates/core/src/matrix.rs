//! Dense exact matrices over Gaussian rationals.
//!
//! Elimination uses exact division with the first nonzero pivot in
//! column order; there are no magnitude heuristics because conditioning
//! is meaningless over an exact field. Empty (0×0 or 0×n) matrices are
//! legal throughout: uncovered cells have 0×0 fibers.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// Integer literal helper for tests and reports.
    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Matrix::from_rows(
            rows.iter().map(|r| r.iter().map(|&n| Scalar::from_int(n)).collect()).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn at(&self, r: usize, c: usize) -> &Scalar {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| {
                (0..self.cols).all(|c| {
                    if r == c { self.at(r, c).is_one() } else { self.at(r, c).is_zero() }
                })
            })
    }

    pub fn trace(&self) -> Scalar {
        assert!(self.is_square(), "trace of a nonsquare matrix");
        (0..self.rows).fold(Scalar::zero(), |acc, i| acc + self.at(i, i))
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.at(c, r).clone())
    }

    pub fn scale(&self, k: &Scalar) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |r, c| self.at(r, c) * k)
    }

    pub fn pow(&self, e: usize) -> Matrix {
        assert!(self.is_square());
        let mut acc = Matrix::identity(self.rows);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Block-diagonal direct sum, in the given order.
    pub fn block_diag<'a>(blocks: impl IntoIterator<Item = &'a Matrix>) -> Matrix {
        let blocks: Vec<&Matrix> = blocks.into_iter().collect();
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Matrix::zeros(rows, cols);
        let (mut ro, mut co) = (0, 0);
        for b in blocks {
            for r in 0..b.rows {
                for c in 0..b.cols {
                    m.set(ro + r, co + c, b.at(r, c).clone());
                }
            }
            ro += b.rows;
            co += b.cols;
        }
        m
    }

    /// Copies `sub` into `self` with its top-left corner at `(r0, c0)`.
    pub fn paste(&mut self, r0: usize, c0: usize, sub: &Matrix) {
        assert!(r0 + sub.rows <= self.rows && c0 + sub.cols <= self.cols);
        for r in 0..sub.rows {
            for c in 0..sub.cols {
                self.set(r0 + r, c0 + c, sub.at(r, c).clone());
            }
        }
    }

    /// The `(rows, cols)` submatrix with top-left corner at `(r0, c0)`.
    pub fn slice(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        Matrix::from_fn(rows, cols, |r, c| self.at(r0 + r, c0 + c).clone())
    }

    /// Permutation matrix `P` with `P e_j = e_{perm[j]}`.
    pub fn permutation(perm: &[usize]) -> Matrix {
        let n = perm.len();
        let mut m = Matrix::zeros(n, n);
        for (j, &i) in perm.iter().enumerate() {
            m.set(i, j, Scalar::one());
        }
        m
    }

    /// Reduced row echelon form and the pivot column indices.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            // first nonzero pivot in column order
            let Some(p) = (row..m.rows).find(|&r| !m.at(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for c in 0..m.cols {
                    m.data.swap(p * m.cols + c, row * m.cols + c);
                }
            }
            let inv = m.at(row, col).inv().expect("pivot is nonzero");
            for c in col..m.cols {
                let v = m.at(row, c) * &inv;
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r != row && !m.at(r, col).is_zero() {
                    let factor = m.at(r, col).clone();
                    for c in col..m.cols {
                        let v = m.at(r, c) - &(m.at(row, c) * &factor);
                        m.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : self · x = 0}` as column vectors (n×1 matrices),
    /// one per free column, in free-column order.
    pub fn nullspace(&self) -> Vec<Matrix> {
        let (r, pivots) = self.rref();
        let mut basis = Vec::new();
        let pivot_of_col: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (row, &col) in pivots.iter().enumerate() {
                v[col] = Some(row);
            }
            v
        };
        for free in 0..self.cols {
            if pivot_of_col[free].is_some() {
                continue;
            }
            let mut x = Matrix::zeros(self.cols, 1);
            x.set(free, 0, Scalar::one());
            for (col, p) in pivot_of_col.iter().enumerate() {
                if let Some(row) = p {
                    x.set(col, 0, -r.at(*row, free));
                }
            }
            basis.push(x);
        }
        basis
    }

    /// Exact inverse; `None` when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        assert!(self.is_square(), "inverse of a nonsquare matrix");
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        aug.paste(0, 0, self);
        aug.paste(0, n, &Matrix::identity(n));
        let (r, pivots) = aug.rref();
        if pivots.len() != n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
            return None;
        }
        Some(r.slice(0, n, n, n))
    }

    /// Solves `self · x = b` for a single solution, if any.
    pub fn solve(&self, b: &Matrix) -> Option<Matrix> {
        assert_eq!(self.rows, b.rows());
        assert_eq!(b.cols(), 1);
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        aug.paste(0, 0, self);
        aug.paste(0, self.cols, b);
        let (r, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return None; // inconsistent
        }
        let mut x = Matrix::zeros(self.cols, 1);
        for (row, &col) in pivots.iter().enumerate() {
            x.set(col, 0, r.at(row, self.cols).clone());
        }
        Some(x)
    }

    /// Column vector stacking helper: the matrix whose columns are the
    /// given n×1 vectors.
    pub fn from_columns(cols: &[Matrix]) -> Matrix {
        let n = cols.first().map_or(0, |c| c.rows());
        assert!(cols.iter().all(|c| c.cols() == 1 && c.rows() == n));
        Matrix::from_fn(n, cols.len(), |r, c| cols[c].at(r, 0).clone())
    }

    pub fn column(&self, c: usize) -> Matrix {
        self.slice(0, c, self.rows, 1)
    }
}

/// Incremental span tracker for column vectors: maintains a reduced
/// echelon set and reports whether each new vector enlarges the span.
pub struct SpanTracker {
    dim: usize,
    reduced: Vec<(usize, Vec<Scalar>)>, // (pivot index, reduced vector)
}

impl SpanTracker {
    pub fn new(dim: usize) -> Self {
        SpanTracker { dim, reduced: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.reduced.len()
    }

    /// Adds a column vector; returns `true` when it was independent of
    /// the current span (and is now part of it).
    pub fn add(&mut self, v: &Matrix) -> bool {
        assert_eq!(v.cols(), 1);
        assert_eq!(v.rows(), self.dim);
        let mut w: Vec<Scalar> = (0..self.dim).map(|r| v.at(r, 0).clone()).collect();
        for (pivot, row) in &self.reduced {
            if !w[*pivot].is_zero() {
                let factor = w[*pivot].clone();
                for (wi, ri) in w.iter_mut().zip(row.iter()) {
                    *wi = &*wi - &(ri * &factor);
                }
            }
        }
        let Some(pivot) = w.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = w[pivot].inv().expect("pivot nonzero");
        for wi in w.iter_mut() {
            *wi = &*wi * &inv;
        }
        // keep every stored row zero at the new pivot so that future
        // single-pass reductions stay valid
        for (_, row) in self.reduced.iter_mut() {
            if !row[pivot].is_zero() {
                let factor = row[pivot].clone();
                for (ri, wi) in row.iter_mut().zip(w.iter()) {
                    *ri = &*ri - &(wi * &factor);
                }
            }
        }
        self.reduced.push((pivot, w));
        self.reduced.sort_by_key(|(p, _)| *p);
        true
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.at(r, c).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "[{}x{}]", self.rows, self.cols);
        }
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.at(r, c).to_string()).collect();
            if r > 0 {
                writeln!(f)?;
            }
            write!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "dimension mismatch in add");
        Matrix::from_fn(self.rows, self.cols, |r, c| self.at(r, c) + rhs.at(r, c))
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "dimension mismatch in sub");
        Matrix::from_fn(self.rows, self.cols, |r, c| self.at(r, c) - rhs.at(r, c))
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in mul");
        Matrix::from_fn(self.rows, rhs.cols, |r, c| {
            let mut acc = Scalar::zero();
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.is_zero() {
                    continue;
                }
                acc = acc + &(a * rhs.at(k, c));
            }
            acc
        })
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |r, c| -self.at(r, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratq;

    #[test]
    fn rank_basics() {
        assert_eq!(Matrix::zeros(3, 3).rank(), 0);
        assert_eq!(Matrix::identity(4).rank(), 4);
        assert_eq!(Matrix::from_int_rows(&[&[0, 1], &[0, 0]]).rank(), 1);
        assert_eq!(Matrix::zeros(0, 0).rank(), 0);
    }

    #[test]
    fn inverse_round_trip() {
        let m = Matrix::from_rows(vec![
            vec![Scalar::from_int(2), Scalar::from_ratio(1, 3)],
            vec![Scalar::from_int(0), Scalar::new(ratq(1, 2), ratq(1, 5))],
        ]);
        let inv = m.inverse().unwrap();
        assert!((&m * &inv).is_identity());
        assert!((&inv * &m).is_identity());
        assert!(Matrix::from_int_rows(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn nullspace_matches_rank() {
        let m = Matrix::from_int_rows(&[&[1, 2, 3], &[2, 4, 6], &[0, 0, 1]]);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 3 - m.rank());
        for v in &ns {
            assert!((&m * v).is_zero());
        }
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let m = Matrix::from_int_rows(&[&[1, 1], &[0, 1]]);
        let b = Matrix::from_int_rows(&[&[3], &[1]]);
        let x = m.solve(&b).unwrap();
        assert_eq!(&m * &x, b);
        let sing = Matrix::from_int_rows(&[&[1, 1], &[1, 1]]);
        let bad = Matrix::from_int_rows(&[&[0], &[1]]);
        assert!(sing.solve(&bad).is_none());
    }

    #[test]
    fn permutation_conjugation() {
        let p = Matrix::permutation(&[1, 0, 2]);
        assert!((&p * &p).is_identity());
        let m = Matrix::from_int_rows(&[&[1, 0, 0], &[0, 2, 0], &[0, 0, 3]]);
        let conj = &(&p * &m) * &p.transpose();
        assert_eq!(conj, Matrix::from_int_rows(&[&[2, 0, 0], &[0, 1, 0], &[0, 0, 3]]));
    }

    #[test]
    fn empty_matrices_are_legal() {
        let e = Matrix::zeros(0, 0);
        assert!(e.is_identity());
        assert_eq!(Matrix::block_diag([&e, &Matrix::identity(2), &e]).rank(), 2);
    }
}
