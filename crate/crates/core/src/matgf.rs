//! Dense matrices over GF(p).

use itertools::Itertools;

use crate::error::{mismatch, Error, Result};
use crate::ff::{FieldElement, PrimeField};

/// Default cap on the number of minors `is_mds` will examine.
pub const DEFAULT_MINOR_LIMIT: u128 = 1_000_000;

/// Row-major dense matrix over a prime field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

/// Reduced row-echelon form with its rank and (0-based) pivot columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub reduced: Matrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

impl Matrix {
    pub fn new(field: PrimeField, rows: usize, cols: usize, data: Vec<FieldElement>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(mismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        if data.iter().any(|e| e.value() >= field.modulus()) {
            return Err(Error::Malformed("matrix entry is not a canonical residue".into()));
        }
        Ok(Matrix {
            field,
            rows,
            cols,
            data,
        })
    }

    /// Builds a matrix from integer rows, reducing every entry modulo p.
    pub fn from_rows<R: AsRef<[u64]>>(field: PrimeField, rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(mismatch("ragged rows"));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().map(|&v| field.element(v)))
            .collect();
        Ok(Matrix {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_element_rows(field: PrimeField, cols: usize, rows: &[Vec<FieldElement>]) -> Result<Self> {
        if rows.iter().any(|r| r.len() != cols) {
            return Err(mismatch("ragged rows"));
        }
        Matrix::new(field, rows.len(), cols, rows.concat())
    }

    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![FieldElement::ZERO; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, FieldElement::ONE);
        }
        m
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: FieldElement) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[FieldElement] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_u64_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|e| e.value()).collect())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(mismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let f = self.field;
        let rt = rhs.transpose();
        let mut out = Matrix::zeros(f, self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                out.set(i, j, f.dot(self.row(i), rt.row(j)));
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if x.len() != self.cols {
            return Err(mismatch(format!(
                "vector of length {} for {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|i| self.field.dot(self.row(i), x)).collect())
    }

    /// `x^T * self` for a row vector `x`.
    pub fn left_mul_vec(&self, x: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if x.len() != self.rows {
            return Err(mismatch(format!("vector of length {} for {} rows", x.len(), self.rows)));
        }
        let f = self.field;
        let mut out = vec![FieldElement::ZERO; self.cols];
        for (i, &c) in x.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(self.row(i)) {
                *o = f.add(*o, f.mul(c, v));
            }
        }
        Ok(out)
    }

    /// Submatrix of the given (0-based) columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.field, self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                out.set(i, jj, self.get(i, j));
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let data = rows.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        Matrix {
            field: self.field,
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(mismatch("vstack of matrices with different column counts"));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix {
            field: self.field,
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rref(&self) -> Rref {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(piv) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(r, piv);
            let inv = f.inv(m.get(r, c)).expect("pivot is nonzero");
            for j in c..m.cols {
                let v = f.mul(m.get(r, j), inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c);
                if factor.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let v = f.sub(m.get(i, j), f.mul(factor, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref {
            reduced: m,
            rank: r,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// The nonzero rows of the RREF: a canonical basis of the row space.
    pub fn row_space_basis(&self) -> Matrix {
        let Rref { reduced, rank, .. } = self.rref();
        reduced.select_rows(&(0..rank).collect::<Vec<_>>())
    }

    /// True when every row of `other` lies in the row space of `self`.
    pub fn row_space_contains(&self, other: &Matrix) -> Result<bool> {
        let r = self.rank();
        Ok(self.vstack(other)?.rank() == r)
    }

    pub fn same_row_space(&self, other: &Matrix) -> Result<bool> {
        Ok(self.row_space_contains(other)? && other.row_space_contains(self)?)
    }

    /// Some `x` with `self * x = b`; free variables are set to zero.
    pub fn solve_right(&self, b: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if b.len() != self.rows {
            return Err(mismatch(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        let mut aug = Matrix::zeros(self.field, self.rows, self.cols + 1);
        for (i, &bi) in b.iter().enumerate() {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, bi);
        }
        let Rref { reduced, rank, pivots } = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Err(Error::Inconsistent);
        }
        let mut x = vec![FieldElement::ZERO; self.cols];
        for (i, &c) in pivots.iter().enumerate().take(rank) {
            x[c] = reduced.get(i, self.cols);
        }
        Ok(x)
    }

    /// Basis (as rows, in RREF) of `{x : self * x = 0}`.
    pub fn null_space_basis(&self) -> Matrix {
        let f = self.field;
        let Rref { reduced, pivots, .. } = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Matrix::zeros(f, free.len(), self.cols);
        for (k, &fc) in free.iter().enumerate() {
            basis.set(k, fc, FieldElement::ONE);
            for (i, &pc) in pivots.iter().enumerate() {
                basis.set(k, pc, f.neg(reduced.get(i, fc)));
            }
        }
        basis.rref().reduced
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Every `rows x rows` submatrix is invertible.
    pub fn is_mds(&self) -> Result<bool> {
        self.is_mds_with_limit(DEFAULT_MINOR_LIMIT)
    }

    pub fn is_mds_with_limit(&self, limit: u128) -> Result<bool> {
        if self.rows > self.cols {
            return Err(Error::RowsExceedCols {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if self.rows == 0 {
            return Ok(true);
        }
        if self.rows == 1 {
            return Ok(self.data.iter().all(|e| !e.is_zero()));
        }
        if self.rows == self.cols {
            return Ok(self.is_invertible());
        }
        let needed = binomial(self.cols, self.rows);
        if needed > limit {
            return Err(Error::WorkLimitExceeded { needed, limit });
        }
        Ok((0..self.cols)
            .combinations(self.rows)
            .all(|cols| self.select_columns(&cols).is_invertible()))
    }

    /// Basis of the codewords of `rowspace(self)` that vanish outside `support`,
    /// restricted to the coordinates in `support` (0-based, sorted).
    pub fn shortened_subcode(&self, support: &[usize]) -> Result<Matrix> {
        if let Some(&bad) = support.iter().find(|&&c| c >= self.cols) {
            return Err(mismatch(format!(
                "coordinate {bad} out of range for {} columns",
                self.cols
            )));
        }
        if !support.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::ParamInvalid("support must be strictly increasing".into()));
        }
        let outside: Vec<usize> = (0..self.cols).filter(|c| !support.contains(c)).collect();
        // x * G vanishes on `outside` iff x is in the left null space of G[:, outside].
        let combos = self.select_columns(&outside).transpose().null_space_basis();
        let words = combos.mul(&self.select_columns(support))?;
        Ok(words.row_space_basis())
    }
}

impl std::fmt::Display for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|e| e.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}
