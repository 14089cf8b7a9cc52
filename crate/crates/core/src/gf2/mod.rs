//! Dense GF(2) matrices and the elimination routines built on them.

mod elim;

pub use elim::{
    gauss_jordan, generalized_inverse, lifted_gauss_jordan, solve, solve_existence, Echelon,
    ForwardEliminator, Inserted, LiftedEchelon, SolveReport,
};

use alloc::vec::Vec;
use core::fmt;

use crate::bits::BitVec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Gf2Error {
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("row index {index} out of range for {rows} rows")]
    RowIndex { index: usize, rows: usize },
    #[error("column index {index} out of range for {cols} columns")]
    ColumnIndex { index: usize, cols: usize },
}

/// Row-major bit-packed matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: Vec<BitVec>,
    ncols: usize,
}

impl Gf2Matrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { rows: (0..nrows).map(|_| BitVec::zeros(ncols)).collect(), ncols }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds from rows; every row must have length `ncols`.
    pub fn from_rows(rows: Vec<BitVec>, ncols: usize) -> Result<Self, Gf2Error> {
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Gf2Error::Dimension("row length differs from column count"));
        }
        Ok(Self { rows, ncols })
    }

    /// Builds from a dense 0/1 table.
    pub fn from_dense<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let ncols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut m = Self::zeros(rows.len(), ncols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            assert_eq!(r.len(), ncols, "ragged dense matrix");
            for (j, &b) in r.iter().enumerate() {
                if b & 1 == 1 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Builds an `nrows x columns.len()` matrix from column supports.
    pub fn from_column_supports(nrows: usize, columns: &[Vec<usize>]) -> Self {
        let mut m = Self::zeros(nrows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for &i in col {
                m.rows[i].toggle(j);
            }
        }
        m
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.rows[i].set(j, v)
    }

    #[inline]
    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut BitVec {
        &mut self.rows[i]
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<BitVec> {
        self.rows
    }

    pub fn column(&self, j: usize) -> BitVec {
        let mut c = BitVec::zeros(self.nrows());
        for (i, r) in self.rows.iter().enumerate() {
            if r.get(j) {
                c.set(i, true);
            }
        }
        c
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitVec::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.ncols, self.nrows());
        for (i, r) in self.rows.iter().enumerate() {
            for j in r.iter_ones() {
                t.rows[j].set(i, true);
            }
        }
        t
    }

    pub fn mul(&self, other: &Gf2Matrix) -> Result<Gf2Matrix, Gf2Error> {
        if self.ncols != other.nrows() {
            return Err(Gf2Error::Dimension("inner dimensions differ"));
        }
        let mut out = Self::zeros(self.nrows(), other.ncols);
        for (i, r) in self.rows.iter().enumerate() {
            for k in r.iter_ones() {
                out.rows[i].xor_assign(&other.rows[k]);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &BitVec) -> Result<BitVec, Gf2Error> {
        if x.len() != self.ncols {
            return Err(Gf2Error::Dimension("vector length differs from column count"));
        }
        let mut y = BitVec::zeros(self.nrows());
        for (i, r) in self.rows.iter().enumerate() {
            if r.dot(x) {
                y.set(i, true);
            }
        }
        Ok(y)
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &Gf2Matrix) -> Result<Gf2Matrix, Gf2Error> {
        if self.nrows() != other.nrows() {
            return Err(Gf2Error::Dimension("row counts differ"));
        }
        let ncols = self.ncols + other.ncols;
        let mut out = Self::zeros(self.nrows(), ncols);
        for i in 0..self.nrows() {
            for j in self.rows[i].iter_ones() {
                out.rows[i].set(j, true);
            }
            for j in other.rows[i].iter_ones() {
                out.rows[i].set(self.ncols + j, true);
            }
        }
        Ok(out)
    }

    /// Submatrix on the given rows and columns, in the order given.
    pub fn extract_submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Gf2Matrix, Gf2Error> {
        for &r in rows {
            if r >= self.nrows() {
                return Err(Gf2Error::RowIndex { index: r, rows: self.nrows() });
            }
        }
        for &c in cols {
            if c >= self.ncols {
                return Err(Gf2Error::ColumnIndex { index: c, cols: self.ncols });
            }
        }
        let mut out = Self::zeros(rows.len(), cols.len());
        for (oi, &r) in rows.iter().enumerate() {
            let src = &self.rows[r];
            for (oj, &c) in cols.iter().enumerate() {
                if src.get(c) {
                    out.rows[oi].set(oj, true);
                }
            }
        }
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        let mut fe = ForwardEliminator::new(self.ncols);
        for r in &self.rows {
            fe.insert(r.clone());
        }
        fe.rank()
    }

    /// Basis of the right kernel `{x : self x = 0}`, one vector per free column.
    pub fn kernel_basis(&self) -> Vec<BitVec> {
        let n = self.ncols;
        let ech = gauss_jordan(self);
        let mut basis = Vec::new();
        for f in 0..n {
            if ech.pivot_mask.get(f) {
                continue;
            }
            let mut x = BitVec::zeros(n);
            x.set(f, true);
            for p in ech.pivot_mask.iter_ones() {
                if ech.rows.get(p, f) {
                    x.set(p, true);
                }
            }
            basis.push(x);
        }
        basis
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{} [", self.nrows(), self.ncols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        f.write_str("]")
    }
}
