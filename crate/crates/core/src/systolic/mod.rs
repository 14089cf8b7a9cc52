//! Cycle-accurate simulation of systolic GF(2) elimination.
//!
//! The array is triangular. Array row `k` (for `k < n`) has a diagonal PE at
//! column `k` and square PEs at columns `k + 1 .. n + l`. Data bits move
//! south one PE per iteration and a 2-bit control word moves east one PE per
//! iteration. Every PE updates from the registers its north and west
//! neighbours wrote in the previous iteration, so the simulation is double
//! buffered and all communication is local.
//!
//! Row `i` of `[A | B]` enters column `j` at iteration `i + j + 1` (1-based),
//! which is the staggering that keeps data and control aligned. In the
//! combined mode a `reduce` signal follows the last row into PE `(0, 0)` and
//! triggers the backward sweep; every later array row is triggered locally
//! by the PE above its diagonal.

pub mod line;

pub use line::{h_line, run_h_example, HLineOutput};

use alloc::vec;
use alloc::vec::Vec;

use crate::bits::BitVec;
use crate::gf2::{Gf2Matrix, SolveReport};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SystolicError {
    #[error("A has {a} rows but B has {b}")]
    RowMismatch { a: usize, b: usize },
    #[error("the array needs at least one pivot column and one input row")]
    Empty,
    #[error("right-hand side has length {found}, expected {expected}")]
    RhsLength { expected: usize, found: usize },
    #[error("bit strings have lengths {a} and {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("padded width {width} is smaller than the {n} input columns")]
    PaddedWidth { width: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Phase {
    Forward,
    Backward,
}

/// A data bit travelling south.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Token {
    pub bit: bool,
    pub phase: Phase,
    /// Set on the bit a released row hands to the next diagonal; that
    /// diagonal releases its own row one iteration later.
    pub trigger: bool,
}

/// The control word travelling east: which 2x2 map to apply to
/// `(incoming bit, stored bit)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Control {
    /// out = x
    Pass,
    /// out = x + s
    Add,
    /// out = s, then s = x
    Lock,
    /// out = s as a backward bit
    Release,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum North {
    Data(Token),
    Reduce,
}

#[derive(Debug, Clone, Copy, Default)]
struct Pe {
    stored: bool,
    locked: bool,
    release_pending: bool,
    down: Option<Token>,
    right: Option<Control>,
}

/// One PE's registers after an iteration, for traces.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PeSnapshot {
    pub row: usize,
    pub col: usize,
    pub stored: bool,
    pub locked: bool,
    pub down: Option<Token>,
    pub right: Option<Control>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IterationRecord {
    pub iteration: u64,
    /// PEs holding at least one valid output register.
    pub active: Vec<PeSnapshot>,
}

/// A forward bit leaving the bottom of a spectator column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Emission {
    /// Iteration at which the bottom sink absorbed the bit.
    pub iteration: u64,
    /// Spectator column index in `0..l`.
    pub column: usize,
    pub bit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Forward elimination only; stops when the array has drained.
    Forward,
    /// Forward elimination followed by the `reduce` sweep; stops when every
    /// result bit is latched at the boundary.
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystolicRun {
    /// Iterations counted by stepping the simulator.
    pub iterations: u64,
    /// `n x (n + l)`: the stored rows (forward mode) or the latched reduced
    /// rows (full mode).
    pub matrix: Gf2Matrix,
    pub pivot_mask: BitVec,
    /// `m x l`: spectator bits emitted at the bottom for every input row.
    pub residual: Gf2Matrix,
    pub emissions: Vec<Emission>,
    /// Iteration at which the last bit of `A` entered the array.
    pub last_a_injection: u64,
    /// Extra cycles to read the stored memories out of the array.
    pub readout_cycles: u64,
    /// Number of register reads performed; all were neighbour reads.
    pub reads: u64,
    pub trace: Option<Vec<IterationRecord>>,
}

/// The simulator state.
struct Machine {
    n: usize,
    w: usize,
    rows: Vec<BitVec>,
    /// PE `(k, j)` lives at `grid[k][j - k]`.
    grid: Vec<Vec<Pe>>,
    iteration: u64,
    reduce_at: Option<u64>,
    /// Column collectors below each diagonal, then bottom collectors of the
    /// spectator columns. Entries arrive in row order.
    col_latch: Vec<Vec<bool>>,
    bottom_latch: Vec<Vec<bool>>,
    latched: usize,
    emissions: Vec<Emission>,
    /// Boundary registers waiting for their sinks.
    pending_bottom: Vec<(usize, Token)>,
    pending_right: usize,
    last_a_injection: u64,
    reads: u64,
    trace: Option<Vec<IterationRecord>>,
}

impl Machine {
    fn new(a: &Gf2Matrix, b: &Gf2Matrix, reduce_at: Option<u64>, trace: bool) -> Self {
        let n = a.ncols();
        let w = n + b.ncols();
        let rows = (0..a.nrows())
            .map(|i| {
                let mut r = BitVec::zeros(w);
                for j in a.row(i).iter_ones() {
                    r.set(j, true);
                }
                for j in b.row(i).iter_ones() {
                    r.set(n + j, true);
                }
                r
            })
            .collect();
        Self {
            n,
            w,
            rows,
            grid: (0..n).map(|k| vec![Pe::default(); w - k]).collect(),
            iteration: 0,
            reduce_at,
            col_latch: vec![Vec::new(); n],
            bottom_latch: vec![Vec::new(); w - n],
            latched: 0,
            emissions: Vec::new(),
            pending_bottom: Vec::new(),
            pending_right: 0,
            last_a_injection: 0,
            reads: 0,
            trace: trace.then(Vec::new),
        }
    }

    fn total_latches(&self) -> usize {
        self.n * (self.n + 1) / 2 + self.n * (self.w - self.n)
    }

    fn injection_done(&self) -> bool {
        let m = self.rows.len() as u64;
        // The last bit of the last row enters column w - 1 at iteration m + w - 1.
        self.iteration >= m + self.w as u64 - 1
    }

    fn registers_empty(&self) -> bool {
        self.pending_bottom.is_empty()
            && self.pending_right == 0
            && self.grid.iter().flatten().all(|pe| pe.down.is_none() && pe.right.is_none())
    }

    /// Reads a register written by `(sk, sj)` on behalf of `(rk, rj)`.
    fn read_down(&mut self, prev: &[Vec<Pe>], sk: usize, sj: usize, rk: usize, rj: usize) -> Option<Token> {
        assert!(rk == sk + 1 && rj == sj, "non-local read of ({sk},{sj}) by ({rk},{rj})");
        self.reads += 1;
        prev[sk][sj - sk].down
    }

    fn read_right(&mut self, prev: &[Vec<Pe>], sk: usize, sj: usize, rk: usize, rj: usize) -> Option<Control> {
        assert!(rk == sk && rj == sj + 1, "non-local read of ({sk},{sj}) by ({rk},{rj})");
        self.reads += 1;
        prev[sk][sj - sk].right
    }

    fn inject(&mut self, j: usize) -> Option<North> {
        let t = self.iteration;
        if j == 0 && self.reduce_at == Some(t) {
            return Some(North::Reduce);
        }
        // Row i's bit j enters at iteration i + j + 1.
        let i = t.checked_sub(j as u64 + 1)? as usize;
        let row = self.rows.get(i)?;
        if j < self.n && i + 1 == self.rows.len() && j + 1 == self.n {
            self.last_a_injection = t;
        }
        Some(North::Data(Token { bit: row.get(j), phase: Phase::Forward, trigger: false }))
    }

    fn step(&mut self) {
        self.iteration += 1;
        let t = self.iteration;

        // Sinks absorb what the boundary produced last iteration.
        for (col, tok) in core::mem::take(&mut self.pending_bottom) {
            self.emissions.push(Emission { iteration: t, column: col, bit: tok.bit });
        }
        self.pending_right = 0;

        let prev = self.grid.clone();
        let n = self.n;
        let w = self.w;
        for k in 0..n {
            for j in k..w {
                let north = if k == 0 {
                    self.inject(j)
                } else {
                    self.read_down(&prev, k - 1, j, k, j).map(North::Data)
                };
                if j == k {
                    self.diagonal(k, north);
                } else {
                    let west = self.read_right(&prev, k, j - 1, k, j);
                    let tok = north.map(|nt| match nt {
                        North::Data(tok) => tok,
                        North::Reduce => unreachable!("reduce only enters the first diagonal"),
                    });
                    self.square(k, j, tok, west);
                }
            }
        }

        if let Some(trace) = &mut self.trace {
            let mut active = Vec::new();
            for (k, row) in self.grid.iter().enumerate() {
                for (off, pe) in row.iter().enumerate() {
                    if pe.down.is_some() || pe.right.is_some() {
                        active.push(PeSnapshot {
                            row: k,
                            col: k + off,
                            stored: pe.stored,
                            locked: pe.locked,
                            down: pe.down,
                            right: pe.right,
                        });
                    }
                }
            }
            trace.push(IterationRecord { iteration: t, active });
        }
    }

    fn emit_right(&mut self, k: usize, j: usize, c: Option<Control>) {
        self.grid[k][j - k].right = c;
        if c.is_some() && j + 1 == self.w {
            self.pending_right += 1;
        }
    }

    fn diagonal(&mut self, k: usize, north: Option<North>) {
        let pe = self.grid[k][0];
        let mut next = pe;
        next.down = None;
        let mut right = None;
        if pe.release_pending {
            assert!(north.is_none(), "diagonal {k} received data while releasing");
            next.release_pending = false;
            self.col_latch[k].push(pe.stored);
            self.latched += 1;
            right = Some(Control::Release);
        } else {
            match north {
                None => {}
                Some(North::Reduce) => {
                    self.col_latch[k].push(pe.stored);
                    self.latched += 1;
                    right = Some(Control::Release);
                }
                Some(North::Data(tok)) => match tok.phase {
                    Phase::Forward => {
                        right = Some(if !pe.locked && tok.bit {
                            next.locked = true;
                            next.stored = true;
                            Control::Lock
                        } else if pe.locked && tok.bit {
                            Control::Add
                        } else {
                            Control::Pass
                        });
                    }
                    Phase::Backward => {
                        let add = pe.locked && tok.bit;
                        right = Some(if add { Control::Add } else { Control::Pass });
                        self.col_latch[k].push(tok.bit && !add);
                        self.latched += 1;
                        if tok.trigger {
                            next.release_pending = true;
                        }
                    }
                },
            }
        }
        self.grid[k][0] = next;
        self.emit_right(k, k, right);
    }

    fn square(&mut self, k: usize, j: usize, north: Option<Token>, west: Option<Control>) {
        let pe = self.grid[k][j - k];
        let mut next = pe;
        let down = match (west, north) {
            (None, None) => None,
            (Some(Control::Release), None) => {
                Some(Token { bit: pe.stored, phase: Phase::Backward, trigger: true })
            }
            (Some(c), Some(x)) => {
                let bit = match (c, x.phase) {
                    (Control::Pass, _) => x.bit,
                    (Control::Add, _) => x.bit ^ pe.stored,
                    (Control::Lock, Phase::Forward) => {
                        next.stored = x.bit;
                        pe.stored
                    }
                    (c, p) => panic!("PE ({k},{j}) got control {c:?} with a {p:?} bit"),
                };
                Some(Token { bit, phase: x.phase, trigger: false })
            }
            (c, x) => panic!("PE ({k},{j}) misaligned: control {c:?}, data {x:?}"),
        };
        next.down = None;
        self.grid[k][j - k] = next;
        if let Some(tok) = down {
            if k + 1 < self.n && k < j {
                self.grid[k][j - k].down = Some(tok);
            } else {
                // Bottom of a spectator column.
                let col = j - self.n;
                match tok.phase {
                    Phase::Forward => self.pending_bottom.push((col, tok)),
                    Phase::Backward => {
                        self.bottom_latch[col].push(tok.bit);
                        self.latched += 1;
                    }
                }
            }
        }
        self.emit_right(k, j, west);
    }

    fn stored_matrix(&self) -> Gf2Matrix {
        let mut m = Gf2Matrix::zeros(self.n, self.w);
        for k in 0..self.n {
            for j in k..self.w {
                if self.grid[k][j - k].stored {
                    m.set(k, j, true);
                }
            }
        }
        m
    }

    fn latched_matrix(&self) -> Gf2Matrix {
        let mut m = Gf2Matrix::zeros(self.n, self.w);
        for (j, col) in self.col_latch.iter().enumerate() {
            for (r, &bit) in col.iter().enumerate() {
                m.set(r, j, bit);
            }
        }
        for (s, col) in self.bottom_latch.iter().enumerate() {
            for (r, &bit) in col.iter().enumerate() {
                m.set(r, self.n + s, bit);
            }
        }
        m
    }

    fn pivot_mask(&self) -> BitVec {
        let mut mask = BitVec::zeros(self.n);
        for k in 0..self.n {
            if self.grid[k][0].locked {
                mask.set(k, true);
            }
        }
        mask
    }

    fn residual(&self) -> Gf2Matrix {
        let l = self.w - self.n;
        let mut r = Gf2Matrix::zeros(self.rows.len(), l);
        let mut seen = vec![0usize; l];
        for e in &self.emissions {
            r.set(seen[e.column], e.column, e.bit);
            seen[e.column] += 1;
        }
        r
    }
}

fn check_shapes(a: &Gf2Matrix, b: &Gf2Matrix) -> Result<(), SystolicError> {
    if a.nrows() != b.nrows() {
        return Err(SystolicError::RowMismatch { a: a.nrows(), b: b.nrows() });
    }
    if a.ncols() == 0 || a.nrows() == 0 {
        return Err(SystolicError::Empty);
    }
    Ok(())
}

fn finish(mut mach: Machine, matrix: Gf2Matrix) -> SystolicRun {
    SystolicRun {
        iterations: mach.iteration,
        pivot_mask: mach.pivot_mask(),
        residual: mach.residual(),
        emissions: core::mem::take(&mut mach.emissions),
        last_a_injection: mach.last_a_injection,
        readout_cycles: mach.n as u64,
        reads: mach.reads,
        trace: mach.trace.take(),
        matrix,
    }
}

/// Runs the forward array on `[A | B]` until it drains.
///
/// Takes `2n + m + l - 1` iterations: the last PE works at `2n + m + l - 2`
/// and its outputs are absorbed by the sinks one iteration later.
pub fn run_forward(a: &Gf2Matrix, b: &Gf2Matrix, trace: bool) -> Result<SystolicRun, SystolicError> {
    check_shapes(a, b)?;
    let mut mach = Machine::new(a, b, None, trace);
    loop {
        mach.step();
        if mach.injection_done() && mach.registers_empty() {
            break;
        }
    }
    let stored = mach.stored_matrix();
    Ok(finish(mach, stored))
}

/// Runs forward elimination and the `reduce` sweep back to back.
///
/// The reduce signal reaches PE `(0, 0)` at iteration `m + 1`; the run ends
/// when the boundary has latched all `n(n+1)/2 + nl` result bits, which is
/// iteration `3n + m + l - 2`.
pub fn run_full(a: &Gf2Matrix, b: &Gf2Matrix, trace: bool) -> Result<SystolicRun, SystolicError> {
    check_shapes(a, b)?;
    let mut mach = Machine::new(a, b, Some(a.nrows() as u64 + 1), trace);
    let total = mach.total_latches();
    while mach.latched < total {
        mach.step();
    }
    let latched = mach.latched_matrix();
    Ok(finish(mach, latched))
}

/// Runs the array in the requested mode.
pub fn run(a: &Gf2Matrix, b: &Gf2Matrix, mode: Mode, trace: bool) -> Result<SystolicRun, SystolicError> {
    match mode {
        Mode::Forward => run_forward(a, b, trace),
        Mode::Full => run_full(a, b, trace),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverTiming {
    /// The array is sized to the instance.
    #[default]
    Compact,
    /// The instance is zero-padded to a fixed array width.
    Padded(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverRun {
    pub report: SolveReport,
    /// Billed cycles: the simulator step at which the verdict is available.
    pub cycles: u64,
    /// First iteration at which a one reached the bottom sink (unsolvable only).
    pub detection_iteration: Option<u64>,
}

/// Solves `A x = y` on the array.
///
/// An unsolvable system is billed up to the step at which the last bit of
/// `A` enters the array (`n + m - 1`); a solvable one up to the latching of
/// the reduced result (`3n + m - 1`).
pub fn run_solver(a: &Gf2Matrix, y: &BitVec, timing: SolverTiming) -> Result<SolverRun, SystolicError> {
    if y.len() != a.nrows() {
        return Err(SystolicError::RhsLength { expected: a.nrows(), found: y.len() });
    }
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        return Err(SystolicError::Empty);
    }
    let a = match timing {
        SolverTiming::Compact => a.clone(),
        SolverTiming::Padded(width) => {
            if width < n {
                return Err(SystolicError::PaddedWidth { width, n });
            }
            a.hstack(&Gf2Matrix::zeros(a.nrows(), width - n)).expect("row counts agree")
        }
    };
    let mut b = Gf2Matrix::zeros(y.len(), 1);
    for i in y.iter_ones() {
        b.set(i, 0, true);
    }
    let fwd = run_forward(&a, &b, false)?;
    let residual_rows: Vec<usize> =
        (0..fwd.residual.nrows()).filter(|&i| fwd.residual.get(i, 0)).collect();
    if !residual_rows.is_empty() {
        let detection = fwd.emissions.iter().find(|e| e.bit).map(|e| e.iteration);
        return Ok(SolverRun {
            report: SolveReport { solvable: false, solution: None, residual_rows },
            cycles: fwd.last_a_injection,
            detection_iteration: detection,
        });
    }
    let full = run_full(&a, &b, false)?;
    let w = a.ncols();
    let mut x = BitVec::zeros(n);
    for p in full.pivot_mask.iter_ones().filter(|&p| p < n) {
        if full.matrix.get(p, w) {
            x.set(p, true);
        }
    }
    Ok(SolverRun {
        report: SolveReport { solvable: true, solution: Some(x), residual_rows },
        cycles: full.iterations,
        detection_iteration: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayUse {
    Solve,
    GeneralizedInverse,
}

/// Processing elements for an `n`-column array.
pub fn pe_count(n: u64, usage: ArrayUse) -> u64 {
    let tri = n * (n + 1) / 2;
    match usage {
        ArrayUse::Solve => tri + n,
        ArrayUse::GeneralizedInverse => tri + n * n,
    }
}

/// `2n + m + l - 1`.
pub fn forward_iterations(n: u64, m: u64, l: u64) -> u64 {
    2 * n + m + l - 1
}

/// `3n + m + l - 2`.
pub fn full_iterations(n: u64, m: u64, l: u64) -> u64 {
    3 * n + m + l - 2
}

/// Solver cycles for an `m x n` system: `3n + m - 1` if solvable, else `n + m - 1`.
pub fn solver_cycles(n: u64, m: u64, solvable: bool) -> u64 {
    if solvable {
        3 * n + m - 1
    } else {
        n + m - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::{lifted_gauss_jordan, ForwardEliminator};

    fn forward_oracle(a: &Gf2Matrix, b: &Gf2Matrix) -> (Gf2Matrix, Gf2Matrix) {
        let (n, l) = (a.ncols(), b.ncols());
        let mut fe = ForwardEliminator::with_spectators(n, l);
        let mut residual = Gf2Matrix::zeros(a.nrows(), l);
        let ab = a.hstack(b).unwrap();
        for i in 0..a.nrows() {
            if let crate::gf2::Inserted::Residual(r) = fe.insert(ab.row(i).clone()) {
                *residual.row_mut(i) = r;
            }
        }
        (fe.to_matrix(), residual)
    }

    #[test]
    fn small_forward_matches_oracle() {
        let a = Gf2Matrix::from_dense(&[[1u8, 1, 0], [1, 0, 1], [0, 1, 1], [1, 1, 1]]);
        let b = Gf2Matrix::from_dense(&[[1u8], [0], [1], [1]]);
        let run = run_forward(&a, &b, false).unwrap();
        let (stored, residual) = forward_oracle(&a, &b);
        assert_eq!(run.matrix, stored);
        assert_eq!(run.residual, residual);
        assert_eq!(run.iterations, forward_iterations(3, 4, 1));
    }

    #[test]
    fn small_full_matches_oracle() {
        let a = Gf2Matrix::from_dense(&[[1u8, 1, 0, 1, 0], [0, 1, 1, 0, 1], [1, 0, 1, 1, 1], [0, 0, 1, 1, 0]]);
        let b = Gf2Matrix::identity(4);
        let run = run_full(&a, &b, false).unwrap();
        let e = lifted_gauss_jordan(&a, &b).unwrap();
        assert_eq!(run.matrix, e.matrix);
        assert_eq!(run.pivot_mask, e.pivot_mask);
        assert_eq!(run.iterations, full_iterations(5, 4, 4));
    }

    #[test]
    fn no_spectators_still_counts_the_sink() {
        let a = Gf2Matrix::identity(3);
        let b = Gf2Matrix::zeros(3, 0);
        assert_eq!(run_forward(&a, &b, false).unwrap().iterations, forward_iterations(3, 3, 0));
        assert_eq!(run_full(&a, &b, false).unwrap().iterations, full_iterations(3, 3, 0));
    }

    #[test]
    fn pe_counts() {
        assert_eq!(pe_count(1, ArrayUse::Solve), 2);
        assert_eq!(pe_count(500, ArrayUse::Solve), 125_750);
        assert_eq!(pe_count(4, ArrayUse::GeneralizedInverse), 26);
    }

    #[test]
    fn trace_is_deterministic() {
        let a = Gf2Matrix::from_dense(&[[1u8, 0], [1, 1]]);
        let b = Gf2Matrix::from_dense(&[[1u8], [0]]);
        let r1 = run_full(&a, &b, true).unwrap();
        let r2 = run_full(&a, &b, true).unwrap();
        assert_eq!(r1.trace, r2.trace);
        assert_eq!(r1.trace.unwrap().len() as u64, r1.iterations);
    }

    #[test]
    fn empty_inputs_are_rejected() {
        assert_eq!(
            run_forward(&Gf2Matrix::zeros(0, 3), &Gf2Matrix::zeros(0, 0), false),
            Err(SystolicError::Empty)
        );
        assert!(matches!(
            run_solver(&Gf2Matrix::zeros(2, 2), &BitVec::zeros(3), SolverTiming::Compact),
            Err(SystolicError::RhsLength { .. })
        ));
    }
}
