use alloc::vec::Vec;

use super::{Gf2Error, Gf2Matrix};
use crate::bits::BitVec;

/// Streaming forward elimination.
///
/// Rows arrive one at a time. A row's pivot is its leftmost one inside the
/// first `pivot_width` columns. If that pivot slot is free the row is stored
/// there and locks it, otherwise the stored row is added and the search
/// repeats. Bits past `pivot_width` are spectators: they are carried along
/// but never chosen as pivots.
#[derive(Debug, Clone)]
pub struct ForwardEliminator {
    width: usize,
    pivot_width: usize,
    slots: Vec<Option<BitVec>>,
    rank: usize,
}

/// What happened to an inserted row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inserted {
    /// The row locked this pivot slot.
    Locked(usize),
    /// The row reduced to zero on the pivot columns; the remaining bits are
    /// returned (the spectator columns, possibly nonzero).
    Residual(BitVec),
}

impl ForwardEliminator {
    pub fn new(width: usize) -> Self {
        Self::with_spectators(width, 0)
    }

    /// `pivot_width` pivot columns followed by `spectators` columns.
    pub fn with_spectators(pivot_width: usize, spectators: usize) -> Self {
        Self {
            width: pivot_width + spectators,
            pivot_width,
            slots: (0..pivot_width).map(|_| None).collect(),
            rank: 0,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_locked(&self, p: usize) -> bool {
        self.slots[p].is_some()
    }

    pub fn slot(&self, p: usize) -> Option<&BitVec> {
        self.slots[p].as_ref()
    }

    pub fn insert(&mut self, mut v: BitVec) -> Inserted {
        assert_eq!(v.len(), self.width, "row width mismatch");
        loop {
            match v.first_one().filter(|&p| p < self.pivot_width) {
                None => return Inserted::Residual(self.spectator_part(&v)),
                Some(p) => match &self.slots[p] {
                    Some(stored) => v.xor_assign(stored),
                    None => {
                        self.slots[p] = Some(v);
                        self.rank += 1;
                        return Inserted::Locked(p);
                    }
                },
            }
        }
    }

    /// Reduces `v` against the stored rows without storing it.
    pub fn reduce(&self, v: &BitVec) -> BitVec {
        let mut v = v.clone();
        while let Some(p) = v.first_one().filter(|&p| p < self.pivot_width) {
            match &self.slots[p] {
                Some(stored) => v.xor_assign(stored),
                None => break,
            }
        }
        v
    }

    fn spectator_part(&self, v: &BitVec) -> BitVec {
        v.slice(self.pivot_width, self.width - self.pivot_width)
    }

    /// Backward pass: for every locked pivot `p`, from the last to the first,
    /// clear bit `p` from every locked row above it.
    pub fn backward(&mut self) {
        for p in (0..self.pivot_width).rev() {
            let Some(row_p) = self.slots[p].clone() else { continue };
            for q in 0..p {
                if let Some(row_q) = &mut self.slots[q] {
                    if row_q.get(p) {
                        row_q.xor_assign(&row_p);
                    }
                }
            }
        }
    }

    /// The stored rows as a `pivot_width x width` matrix; unlocked rows are zero.
    pub fn to_matrix(&self) -> Gf2Matrix {
        let rows = self
            .slots
            .iter()
            .map(|s| s.clone().unwrap_or_else(|| BitVec::zeros(self.width)))
            .collect();
        Gf2Matrix::from_rows(rows, self.width).expect("slot widths are uniform")
    }

    pub fn pivot_mask(&self) -> BitVec {
        let mut m = BitVec::zeros(self.pivot_width);
        for (p, s) in self.slots.iter().enumerate() {
            if s.is_some() {
                m.set(p, true);
            }
        }
        m
    }
}

/// Result of plain Gauss–Jordan elimination of an `m x n` matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Echelon {
    /// `n x n`: row `p` holds the reduced row with pivot `p`, zero if unlocked.
    pub rows: Gf2Matrix,
    pub pivot_mask: BitVec,
    pub rank: usize,
}

/// Result of lifted Gauss–Jordan elimination of `[A | B]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedEchelon {
    /// `n x (n + l)` reduced storage; row `p` has pivot `p` when locked.
    pub matrix: Gf2Matrix,
    pub pivot_mask: BitVec,
    pub rank: usize,
    /// `m x l`: the spectator bits left over by each input row that did not
    /// lock a pivot. Rows that locked are zero.
    pub residual: Gf2Matrix,
    pub n: usize,
    pub l: usize,
}

impl LiftedEchelon {
    /// `B''`: the spectator block of the reduced storage (`n x l`).
    pub fn spectator_block(&self) -> Gf2Matrix {
        let cols: Vec<usize> = (self.n..self.n + self.l).collect();
        let rows: Vec<usize> = (0..self.n).collect();
        self.matrix.extract_submatrix(&rows, &cols).expect("in range")
    }

    /// `A''`: the pivot block of the reduced storage (`n x n`).
    pub fn pivot_block(&self) -> Gf2Matrix {
        let idx: Vec<usize> = (0..self.n).collect();
        self.matrix.extract_submatrix(&idx, &idx).expect("in range")
    }

    /// Input rows whose spectator residual is nonzero.
    pub fn residual_rows(&self) -> Vec<usize> {
        (0..self.residual.nrows()).filter(|&i| !self.residual.row(i).is_zero()).collect()
    }
}

fn forward_rows(a: &Gf2Matrix, b: &Gf2Matrix) -> Result<(ForwardEliminator, Gf2Matrix), Gf2Error> {
    if a.nrows() != b.nrows() {
        return Err(Gf2Error::Dimension("A and B row counts differ"));
    }
    let (n, l) = (a.ncols(), b.ncols());
    let mut fe = ForwardEliminator::with_spectators(n, l);
    let mut residual = Gf2Matrix::zeros(a.nrows(), l);
    for i in 0..a.nrows() {
        let mut row = BitVec::zeros(n + l);
        for j in a.row(i).iter_ones() {
            row.set(j, true);
        }
        for j in b.row(i).iter_ones() {
            row.set(n + j, true);
        }
        if let Inserted::Residual(r) = fe.insert(row) {
            *residual.row_mut(i) = r;
        }
    }
    Ok((fe, residual))
}

/// Gauss–Jordan elimination of `A` (`m x n`) into `n x n` reduced storage.
pub fn gauss_jordan(a: &Gf2Matrix) -> Echelon {
    let e = lifted_gauss_jordan(a, &Gf2Matrix::zeros(a.nrows(), 0)).expect("row counts agree");
    Echelon { rows: e.matrix, pivot_mask: e.pivot_mask, rank: e.rank }
}

/// Gauss–Jordan elimination of `[A | B]` with pivots restricted to `A`.
pub fn lifted_gauss_jordan(a: &Gf2Matrix, b: &Gf2Matrix) -> Result<LiftedEchelon, Gf2Error> {
    let (mut fe, residual) = forward_rows(a, b)?;
    fe.backward();
    Ok(LiftedEchelon {
        matrix: fe.to_matrix(),
        pivot_mask: fe.pivot_mask(),
        rank: fe.rank(),
        residual,
        n: a.ncols(),
        l: b.ncols(),
    })
}

fn column_matrix(y: &BitVec) -> Gf2Matrix {
    let mut b = Gf2Matrix::zeros(y.len(), 1);
    for i in y.iter_ones() {
        b.set(i, 0, true);
    }
    b
}

/// Whether `y` lies in the column space of `A`, using the forward pass only.
pub fn solve_existence(a: &Gf2Matrix, y: &BitVec) -> Result<bool, Gf2Error> {
    if y.len() != a.nrows() {
        return Err(Gf2Error::Dimension("right-hand side length differs from row count"));
    }
    let (_, residual) = forward_rows(a, &column_matrix(y))?;
    Ok(residual.is_zero())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub solvable: bool,
    /// A solution with free variables set to zero, when one exists.
    pub solution: Option<BitVec>,
    /// Input rows left with a nonzero residual; empty iff solvable.
    pub residual_rows: Vec<usize>,
}

/// Solves `A x = y`.
pub fn solve(a: &Gf2Matrix, y: &BitVec) -> Result<SolveReport, Gf2Error> {
    if y.len() != a.nrows() {
        return Err(Gf2Error::Dimension("right-hand side length differs from row count"));
    }
    let e = lifted_gauss_jordan(a, &column_matrix(y))?;
    let residual_rows = e.residual_rows();
    if !residual_rows.is_empty() {
        return Ok(SolveReport { solvable: false, solution: None, residual_rows });
    }
    let n = a.ncols();
    let mut x = BitVec::zeros(n);
    for p in e.pivot_mask.iter_ones() {
        if e.matrix.get(p, n) {
            x.set(p, true);
        }
    }
    Ok(SolveReport { solvable: true, solution: Some(x), residual_rows })
}

/// An `n x m` matrix `X` with `A X A = A`.
pub fn generalized_inverse(a: &Gf2Matrix) -> Gf2Matrix {
    let m = a.nrows();
    let n = a.ncols();
    let e = lifted_gauss_jordan(a, &Gf2Matrix::identity(m)).expect("row counts agree");
    let mut x = Gf2Matrix::zeros(n, m);
    for p in e.pivot_mask.iter_ones() {
        for j in e.matrix.row(p).iter_ones().filter(|&j| j >= n) {
            x.set(p, j - n, true);
        }
    }
    x
}
