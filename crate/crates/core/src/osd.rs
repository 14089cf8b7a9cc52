//! Filtered ordered-statistics decoding and standard OSD-0.
//!
//! Filtered OSD keeps only faults whose marginal LLR is below a confidence
//! threshold, sorts them, extracts those columns of `H`, drops rows that are
//! all zero and solves the remaining (possibly rank-deficient) system
//! directly. Each hardware stage is modelled by a small step-counting
//! simulation whose count must match the closed-form stage cost.

use alloc::vec;
use alloc::vec::Vec;

use crate::bits::BitVec;
use crate::gf2::{self, generalized_inverse, ForwardEliminator, Gf2Matrix, Inserted};
use crate::outcome::StageCycles;
use crate::problem::DecodingProblem;
use crate::systolic::{self, SolverTiming};

#[derive(Debug, Clone, PartialEq)]
pub struct OsdConfig {
    pub lambda_confident: f64,
    pub r_max: usize,
    pub banking: usize,
    pub zero_filter_blocks: usize,
    /// Bill `r_max` for the sort and extract stages regardless of `|R|`.
    pub padded_timing: bool,
    /// Run the PE-level systolic simulator for the solve stage.
    pub use_systolic: bool,
}

impl Default for OsdConfig {
    fn default() -> Self {
        Self {
            lambda_confident: 0.0,
            r_max: 500,
            banking: 8,
            zero_filter_blocks: 9,
            padded_timing: false,
            use_systolic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OsdError {
    #[error("expected {expected} LLRs, found {found}")]
    LlrCount { expected: usize, found: usize },
    #[error("expected a syndrome of length {expected}, found {found}")]
    SyndromeLength { expected: usize, found: usize },
    #[error("configuration: {0}")]
    Config(&'static str),
}

impl OsdConfig {
    fn validate(&self) -> Result<(), OsdError> {
        if self.r_max == 0 {
            return Err(OsdError::Config("r_max must be at least 1"));
        }
        if self.banking == 0 {
            return Err(OsdError::Config("banking must be at least 1"));
        }
        if self.zero_filter_blocks == 0 {
            return Err(OsdError::Config("zero_filter_blocks must be at least 1"));
        }
        Ok(())
    }
}

/// Survivors of the filter in ascending `(llr, index)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub entries: Vec<(f64, usize)>,
    pub overflowed: bool,
}

impl RankedList {
    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|&(_, j)| j).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OsdStatus {
    Success,
    OverflowFail,
    UnsolvableFail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OsdOutcome {
    pub status: OsdStatus,
    /// Zero unless the status is success.
    pub correction: BitVec,
    pub cycles: u64,
    pub stages: StageCycles,
    pub ranked: usize,
    pub kept_rows: usize,
}

/// `⌈N / (2 · banking)⌉`: every bank reads two LLRs per cycle.
pub fn filter_cycles(n: usize, banking: usize) -> u64 {
    n.div_ceil(2 * banking) as u64
}

/// One element enters the sorter per cycle.
pub fn sort_cycles(r: usize) -> u64 {
    r as u64
}

/// Two columns per cycle from dual-port memory.
pub fn extract_cycles(r: usize) -> u64 {
    r.div_ceil(2) as u64
}

/// Each block tests one row per cycle.
pub fn zero_filter_cycles(m: usize, blocks: usize) -> u64 {
    m.div_ceil(blocks) as u64
}

/// Systolic solve of a `kept_m x r` system; zero if either side is empty.
pub fn solve_cycles(kept_m: usize, r: usize, solvable: bool) -> u64 {
    if kept_m == 0 || r == 0 {
        0
    } else {
        systolic::solver_cycles(r as u64, kept_m as u64, solvable)
    }
}

/// Two correction bits written per cycle.
pub fn unpermute_cycles(r: usize) -> u64 {
    r.div_ceil(2) as u64
}

/// `3M + 2N`.
pub fn standard_osd_cycles(m: usize, n: usize) -> u64 {
    3 * m as u64 + 2 * n as u64
}

/// Banked filter: bank `b` holds a contiguous slice of the LLR memory and
/// reads two entries per cycle. Returns survivors in arrival order.
fn simulate_filter(llrs: &[f64], threshold: f64, banking: usize) -> (Vec<(f64, usize)>, u64) {
    let chunk = llrs.len().div_ceil(banking).max(1);
    let mut cursors: Vec<usize> = (0..banking).map(|b| (b * chunk).min(llrs.len())).collect();
    let mut survivors = Vec::new();
    let mut cycles = 0;
    loop {
        let mut busy = false;
        for (b, cur) in cursors.iter_mut().enumerate() {
            let end = ((b + 1) * chunk).min(llrs.len());
            for _ in 0..2 {
                if *cur < end {
                    busy = true;
                    if llrs[*cur] < threshold {
                        survivors.push((llrs[*cur], *cur));
                    }
                    *cur += 1;
                }
            }
        }
        if !busy {
            break;
        }
        cycles += 1;
    }
    (survivors, cycles)
}

#[inline]
fn key_lt(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Broadcast insertion sorter.
///
/// Each cycle the next input is broadcast to every register node. Node `k`
/// compares it with its own entry and its left neighbour's entry from the
/// previous cycle: it stores the input if it falls between them, shifts in
/// the left neighbour's entry if the input is smaller than that, and keeps
/// its entry otherwise. Empty nodes behave as `+∞`.
fn simulate_sorter(items: &[(f64, usize)], capacity: usize, pad_to: usize) -> (Vec<(f64, usize)>, u64) {
    let mut regs: Vec<Option<(f64, usize)>> = vec![None; capacity];
    let mut cycles = 0;
    let feed = items.iter().copied().map(Some).chain(core::iter::repeat(None));
    for x in feed.take(items.len().max(pad_to)) {
        cycles += 1;
        let Some(x) = x else { continue };
        let prev = regs.clone();
        for k in 0..capacity {
            let stored = prev[k];
            let left = if k == 0 { None } else { prev[k - 1] };
            let above_left = k == 0 || left.is_some_and(|l| key_lt(l, x));
            let below_stored = stored.is_none_or(|s| key_lt(x, s));
            regs[k] = if above_left && below_stored {
                Some(x)
            } else if !above_left {
                left
            } else {
                stored
            };
        }
    }
    (regs.into_iter().flatten().collect(), cycles)
}

/// Filters and sorts; returns the list with the filter and sort cycles.
pub fn filter_and_rank(llrs: &[f64], config: &OsdConfig) -> Result<(RankedList, u64, u64), OsdError> {
    config.validate()?;
    let (survivors, fcycles) = simulate_filter(llrs, config.lambda_confident, config.banking);
    debug_assert_eq!(fcycles, filter_cycles(llrs.len(), config.banking));
    if survivors.len() > config.r_max {
        return Ok((RankedList { entries: survivors, overflowed: true }, fcycles, 0));
    }
    let pad = if config.padded_timing { config.r_max } else { 0 };
    let (sorted, scycles) = simulate_sorter(&survivors, survivors.len(), pad);
    Ok((RankedList { entries: sorted, overflowed: false }, fcycles, scycles))
}

/// Extracted and row-filtered submatrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extracted {
    /// `H_R` with all-zero rows removed.
    pub matrix: Gf2Matrix,
    pub kept_rows: Vec<usize>,
    pub extract_cycles: u64,
    pub zero_filter_cycles: u64,
}

/// Columns of `H` in ranked order, then removal of all-zero rows.
pub fn extract_and_zero_filter(
    problem: &DecodingProblem,
    ranked: &RankedList,
    config: &OsdConfig,
) -> Extracted {
    let cols = ranked.indices();
    let r = cols.len();
    // Two columns per cycle; the padded variant reads empty slots too.
    let mut h_r = Gf2Matrix::zeros(problem.m(), r);
    let slots = if config.padded_timing { config.r_max.max(r) } else { r };
    let mut ecycles = 0;
    for pair in (0..slots).collect::<Vec<_>>().chunks(2) {
        ecycles += 1;
        for &pos in pair {
            if let Some(&j) = cols.get(pos) {
                for &i in &problem.h_columns()[j] {
                    h_r.set(i, pos, true);
                }
            }
        }
    }
    // Blocks scan their share of rows, one per cycle.
    let m = problem.m();
    let blocks = config.zero_filter_blocks;
    let share = m.div_ceil(blocks).max(1);
    let mut kept = Vec::new();
    let mut zcycles = 0;
    for step in 0..share {
        let mut active = false;
        for b in 0..blocks {
            let i = b * share + step;
            if i < m {
                active = true;
                if !h_r.row(i).is_zero() {
                    kept.push(i);
                }
            }
        }
        if active {
            zcycles += 1;
        }
    }
    kept.sort_unstable();
    let matrix = h_r.extract_submatrix(&kept, &(0..r).collect::<Vec<_>>()).expect("indices in range");
    Extracted { matrix, kept_rows: kept, extract_cycles: ecycles, zero_filter_cycles: zcycles }
}

/// Places solver output bit `k` at fault `ranked[k]`, two per cycle.
fn simulate_unpermute(x: &BitVec, ranked: &[usize], n: usize) -> (BitVec, u64) {
    let mut out = BitVec::zeros(n);
    let mut written = BitVec::zeros(n);
    let mut cycles = 0;
    for pair in (0..ranked.len()).collect::<Vec<_>>().chunks(2) {
        cycles += 1;
        for &k in pair {
            let j = ranked[k];
            assert!(!written.get(j), "fault {j} written twice");
            written.set(j, true);
            out.set(j, x.get(k));
        }
    }
    (out, cycles)
}

fn check_inputs(problem: &DecodingProblem, syndrome: &BitVec, llrs: &[f64]) -> Result<(), OsdError> {
    if llrs.len() != problem.n() {
        return Err(OsdError::LlrCount { expected: problem.n(), found: llrs.len() });
    }
    if syndrome.len() != problem.m() {
        return Err(OsdError::SyndromeLength { expected: problem.m(), found: syndrome.len() });
    }
    Ok(())
}

pub fn filtered_osd(
    problem: &DecodingProblem,
    syndrome: &BitVec,
    llrs: &[f64],
    config: &OsdConfig,
) -> Result<OsdOutcome, OsdError> {
    check_inputs(problem, syndrome, llrs)?;
    let n = problem.n();
    let mut stages = StageCycles::new();
    let (ranked, fcycles, scycles) = filter_and_rank(llrs, config)?;
    stages.add("filter", fcycles);
    let fail = |status, stages: StageCycles, ranked: usize, kept: usize| OsdOutcome {
        status,
        correction: BitVec::zeros(n),
        cycles: stages.total(),
        stages,
        ranked,
        kept_rows: kept,
    };
    if ranked.overflowed {
        return Ok(fail(OsdStatus::OverflowFail, stages, ranked.entries.len(), 0));
    }
    stages.add("sort", scycles);
    let r = ranked.entries.len();
    let ex = extract_and_zero_filter(problem, &ranked, config);
    stages.add("extract", ex.extract_cycles);
    stages.add("zero_filter", ex.zero_filter_cycles);

    // A one on a deleted row can never be produced.
    let mut on_kept = BitVec::zeros(problem.m());
    for &i in &ex.kept_rows {
        on_kept.set(i, true);
    }
    if !syndrome.is_subset_of(&on_kept) {
        stages.add("solve", 0);
        return Ok(fail(OsdStatus::UnsolvableFail, stages, r, ex.kept_rows.len()));
    }
    let kept_m = ex.kept_rows.len();
    let mut sigma = BitVec::zeros(kept_m);
    for (k, &i) in ex.kept_rows.iter().enumerate() {
        sigma.set(k, syndrome.get(i));
    }

    let (solution, cycles) = if kept_m == 0 || r == 0 {
        (Some(BitVec::zeros(r)), 0)
    } else if config.use_systolic {
        let run = systolic::run_solver(&ex.matrix, &sigma, SolverTiming::Compact).expect("non-empty system");
        (run.report.solution, run.cycles)
    } else {
        let rep = gf2::solve(&ex.matrix, &sigma).expect("shapes agree");
        let c = solve_cycles(kept_m, r, rep.solvable);
        (rep.solution, c)
    };
    stages.add("solve", cycles);
    let Some(x) = solution else {
        return Ok(fail(OsdStatus::UnsolvableFail, stages, r, kept_m));
    };
    let (correction, ucycles) = simulate_unpermute(&x, &ranked.indices(), n);
    stages.add("unpermute", ucycles);
    Ok(OsdOutcome {
        status: OsdStatus::Success,
        correction,
        cycles: stages.total(),
        stages,
        ranked: r,
        kept_rows: kept_m,
    })
}

/// OSD-0 with `rank(H)` cached.
#[derive(Debug, Clone)]
pub struct StandardOsd {
    columns: Vec<BitVec>,
    rank: usize,
    m: usize,
}

impl StandardOsd {
    pub fn new(problem: &DecodingProblem) -> Self {
        let columns: Vec<BitVec> =
            problem.h_columns().iter().map(|c| BitVec::from_indices(problem.m(), c)).collect();
        let mut fe = ForwardEliminator::new(problem.m());
        for c in &columns {
            fe.insert(c.clone());
        }
        Self { columns, rank: fe.rank(), m: problem.m() }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Picks the first `rank(H)` independent columns in LLR order and solves
    /// with a generalized inverse of that submatrix.
    pub fn decode(&self, syndrome: &BitVec, llrs: &[f64]) -> Result<OsdOutcome, OsdError> {
        let n = self.columns.len();
        if llrs.len() != n {
            return Err(OsdError::LlrCount { expected: n, found: llrs.len() });
        }
        if syndrome.len() != self.m {
            return Err(OsdError::SyndromeLength { expected: self.m, found: syndrome.len() });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| llrs[a].total_cmp(&llrs[b]).then(a.cmp(&b)));
        let mut fe = ForwardEliminator::new(self.m);
        let mut selected = Vec::with_capacity(self.rank);
        for &j in &order {
            if selected.len() == self.rank {
                break;
            }
            if matches!(fe.insert(self.columns[j].clone()), Inserted::Locked(_)) {
                selected.push(j);
            }
        }
        let mut h_s = Gf2Matrix::zeros(self.m, selected.len());
        for (k, &j) in selected.iter().enumerate() {
            for i in self.columns[j].iter_ones() {
                h_s.set(i, k, true);
            }
        }
        let x = generalized_inverse(&h_s).mul_vec(syndrome).expect("shapes agree");
        let mut stages = StageCycles::new();
        stages.add("osd", standard_osd_cycles(self.m, n));
        let mut correction = BitVec::zeros(n);
        let status = if h_s.mul_vec(&x).expect("shapes agree") == *syndrome {
            for k in x.iter_ones() {
                correction.set(selected[k], true);
            }
            OsdStatus::Success
        } else {
            OsdStatus::UnsolvableFail
        };
        Ok(OsdOutcome {
            status,
            correction,
            cycles: stages.total(),
            stages,
            ranked: n,
            kept_rows: self.m,
        })
    }
}

pub fn standard_osd(problem: &DecodingProblem, syndrome: &BitVec, llrs: &[f64]) -> Result<OsdOutcome, OsdError> {
    check_inputs(problem, syndrome, llrs)?;
    StandardOsd::new(problem).decode(syndrome, llrs)
}
