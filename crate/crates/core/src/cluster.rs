//! Bitmap cluster decoder (generalized Union–Find).
//!
//! Nodes are the `M` checks followed by the `N` faults; a cluster is a bitmap
//! over all `M + N` nodes. The pre-decoder's confident faults are applied up
//! front, uncertain faults become erasure seeds, and every remaining
//! syndrome bit seeds a unit cluster. Invalid clusters grow by one
//! neighbourhood hop, absorb any cluster they touch, and are re-tested until
//! their syndrome lies in the image of their interior columns.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::bits::BitVec;
use crate::gf2::{self, Gf2Matrix};
use crate::outcome::StageCycles;
use crate::problem::DecodingProblem;
use crate::systolic;

/// `H^ext`: identity plus the Tanner-graph adjacency, by column.
#[derive(Debug, Clone)]
pub struct ExtendedAdjacency {
    m: usize,
    n: usize,
    cols: Vec<BitVec>,
}

impl ExtendedAdjacency {
    pub fn new(problem: &DecodingProblem) -> Self {
        let (m, n) = (problem.m(), problem.n());
        let k = m + n;
        let mut cols: Vec<BitVec> = (0..k).map(|i| BitVec::from_indices(k, &[i])).collect();
        for (j, col) in problem.h_columns().iter().enumerate() {
            for &i in col {
                cols[i].set(m + j, true);
                cols[m + j].set(i, true);
            }
        }
        Self { m, n, cols }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> usize {
        self.m + self.n
    }

    pub fn column(&self, i: usize) -> &BitVec {
        &self.cols[i]
    }

    /// OR of the columns selected by `b`: `b ∪ N(b)`.
    pub fn grow(&self, b: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.nodes());
        for i in b.iter_ones() {
            out.or_assign(&self.cols[i]);
        }
        out
    }

    /// `(¬c) & t`, where `t` is the fault part of `b` and `c` is the OR of the
    /// rows of `H^ext` for checks outside `b`, restricted to faults.
    pub fn interior(&self, b: &BitVec) -> BitVec {
        let mut c = BitVec::zeros(self.nodes());
        for i in 0..self.m {
            if !b.get(i) {
                c.or_assign(&self.cols[i]);
            }
        }
        let mut not_c = c.slice(self.m, self.n);
        not_c.not_assign();
        let mut t = b.slice(self.m, self.n);
        t.and_assign(&not_c);
        t
    }

    /// Cluster nodes with at least one neighbour outside the cluster.
    pub fn boundary(&self, b: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.nodes());
        for i in b.iter_ones() {
            if !self.cols[i].is_subset_of(b) {
                out.set(i, true);
            }
        }
        out
    }
}

/// `⌈log₆ k⌉`: depth of an OR tree built from 6-input LUTs.
pub fn ceil_log6(k: usize) -> u64 {
    let mut depth = 0;
    let mut reach = 1usize;
    while reach < k {
        reach = reach.saturating_mul(6);
        depth += 1;
    }
    depth
}

#[derive(Debug, Clone, PartialEq)]
pub struct UfConfig {
    pub lambda_accept: f64,
    pub lambda_suspicious: f64,
    pub n_clus: usize,
    /// `(rows, cols)` solver capacities, tried in ascending order of area.
    pub solver_sizes: Vec<(usize, usize)>,
    pub bucket_width: u64,
    /// Keep every grown bitmap in the outcome for inspection.
    pub record_growth: bool,
}

impl UfConfig {
    pub fn gross() -> Self {
        Self {
            lambda_accept: -4.0,
            lambda_suspicious: 2.0,
            n_clus: 50,
            solver_sizes: vec![(18, 18), (18, 36), (36, 72), (72, 144), (144, 288)],
            bucket_width: 32,
            record_growth: false,
        }
    }

    pub fn two_gross() -> Self {
        let mut c = Self::gross();
        c.n_clus = 100;
        c.solver_sizes.extend([(288, 576), (576, 1152)]);
        c
    }
}

impl Default for UfConfig {
    fn default() -> Self {
        Self::gross()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClusterError {
    #[error("expected {expected} LLRs, found {found}")]
    LlrCount { expected: usize, found: usize },
    #[error("expected a syndrome of length {expected}, found {found}")]
    SyndromeLength { expected: usize, found: usize },
    #[error("lambda_accept must not exceed lambda_suspicious")]
    Thresholds,
}

/// Output of the pre-decoder mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mapped {
    pub residual: BitVec,
    pub erasures: BitVec,
    pub partial: BitVec,
}

/// Applies confident faults and marks uncertain ones as erasures.
pub fn map_predecoder(problem: &DecodingProblem, syndrome: &BitVec, llrs: &[f64], config: &UfConfig) -> Mapped {
    let n = problem.n();
    let mut partial = BitVec::zeros(n);
    let mut erasures = BitVec::zeros(n);
    for (j, &l) in llrs.iter().enumerate() {
        if l <= config.lambda_accept {
            partial.set(j, true);
        } else if l <= config.lambda_suspicious {
            erasures.set(j, true);
        }
    }
    let mut residual = syndrome.clone();
    residual.xor_assign(&problem.syndrome(&partial));
    Mapped { residual, erasures, partial }
}

/// Splits `b` into unit bitmaps, lowest bit first, with the carry trick:
/// `c = ¬b + 1`, `d = b & c` isolates the lowest one, then `b ← b ⊕ d`.
/// Returns the units and the number of loop iterations.
pub fn isolate_units(b: &BitVec) -> (Vec<BitVec>, u64) {
    let len = b.len();
    let mut b = b.clone();
    let mut out = Vec::new();
    let mut iterations = 0;
    if len == 0 {
        return (out, 0);
    }
    let u = BitVec::from_indices(len, &[0]);
    while !b.is_zero() {
        iterations += 1;
        let mut c = b.clone();
        c.not_assign();
        c.wrapping_add_assign(&u);
        let d = b.and(&c);
        b.xor_assign(&d);
        out.push(d);
    }
    (out, iterations)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub bitmap: BitVec,
    pub interior: BitVec,
    pub in_use: bool,
    pub valid: bool,
    /// Set once the cluster has absorbed another one.
    pub merged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Invalid,
    SizeOverflow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityCheck {
    pub verdict: Validity,
    pub cycles: u64,
    /// Enclosed checks and interior faults, in ascending order.
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub solver: Option<(usize, usize)>,
}

/// Smallest fitting solver, by area then list order.
fn pick_solver(sizes: &[(usize, usize)], m: usize, n: usize) -> Option<(usize, usize)> {
    sizes.iter().copied().filter(|&(r, c)| r >= m && c >= n).min_by_key(|&(r, c)| r * c)
}

/// Tests `σ|_G ∈ Im(H[checks(G), interior(G)])`.
pub fn check_validity(
    cluster: &Cluster,
    problem: &DecodingProblem,
    residual: &BitVec,
    config: &UfConfig,
) -> ValidityCheck {
    let m = problem.m();
    let rows: Vec<usize> = cluster.bitmap.iter_ones().take_while(|&i| i < m).collect();
    let cols: Vec<usize> = cluster.interior.iter_ones().collect();
    // Index extraction, then shifting rows up and columns left until the
    // last needed index has passed.
    let shifts = rows.last().map_or(0, |&r| r as u64 + 1) + cols.last().map_or(0, |&c| c as u64 + 1);
    let mut cycles = config.bucket_width + shifts;
    let sigma: Vec<bool> = rows.iter().map(|&i| residual.get(i)).collect();
    if rows.is_empty() {
        return ValidityCheck { verdict: Validity::Valid, cycles, rows, cols, solver: None };
    }
    let Some(solver) = pick_solver(&config.solver_sizes, rows.len(), cols.len()) else {
        return ValidityCheck { verdict: Validity::SizeOverflow, cycles, rows, cols, solver: None };
    };
    let sub = submatrix(problem, &rows, &cols);
    let ok = gf2::solve_existence(&sub, &BitVec::from_bools(&sigma)).expect("shapes agree");
    if !cols.is_empty() {
        cycles += systolic::solver_cycles(cols.len() as u64, rows.len() as u64, ok);
    }
    let verdict = if ok { Validity::Valid } else { Validity::Invalid };
    ValidityCheck { verdict, cycles, rows, cols, solver: Some(solver) }
}

fn submatrix(problem: &DecodingProblem, rows: &[usize], cols: &[usize]) -> Gf2Matrix {
    let mut row_pos = vec![usize::MAX; problem.m()];
    for (k, &i) in rows.iter().enumerate() {
        row_pos[i] = k;
    }
    let mut sub = Gf2Matrix::zeros(rows.len(), cols.len());
    for (c, &j) in cols.iter().enumerate() {
        for &i in &problem.h_columns()[j] {
            if row_pos[i] != usize::MAX {
                sub.set(row_pos[i], c, true);
            }
        }
    }
    sub
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterFailure {
    PoolOverflow,
    SizeOverflow,
    NonTermination,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthRecord {
    /// Bitmap right after growing, before merging.
    pub bitmap: BitVec,
    /// Whether the cluster had absorbed another one before this step.
    pub merged: bool,
}

#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub failure: Option<ClusterFailure>,
    pub correction: BitVec,
    pub cycles: u64,
    pub stages: StageCycles,
    /// In-use clusters when the decoder stopped.
    pub clusters: Vec<Cluster>,
    /// Every growth step, when recording is enabled.
    pub growth_log: Vec<GrowthRecord>,
    pub mapped: Mapped,
}

/// A decoder bound to one problem; `H^ext` is built once.
#[derive(Debug, Clone)]
pub struct ClusterDecoder<'a> {
    problem: &'a DecodingProblem,
    adjacency: ExtendedAdjacency,
    config: UfConfig,
}

impl<'a> ClusterDecoder<'a> {
    pub fn new(problem: &'a DecodingProblem, config: UfConfig) -> Result<Self, ClusterError> {
        if config.lambda_accept > config.lambda_suspicious {
            return Err(ClusterError::Thresholds);
        }
        Ok(Self { problem, adjacency: ExtendedAdjacency::new(problem), config })
    }

    pub fn adjacency(&self) -> &ExtendedAdjacency {
        &self.adjacency
    }

    pub fn config(&self) -> &UfConfig {
        &self.config
    }

    pub fn decode(&self, syndrome: &BitVec, llrs: &[f64]) -> Result<ClusterOutcome, ClusterError> {
        let p = self.problem;
        let (m, n) = (p.m(), p.n());
        if llrs.len() != n {
            return Err(ClusterError::LlrCount { expected: n, found: llrs.len() });
        }
        if syndrome.len() != m {
            return Err(ClusterError::SyndromeLength { expected: m, found: syndrome.len() });
        }
        let cfg = &self.config;
        let adj = &self.adjacency;
        let k = m + n;
        let tree = ceil_log6(k);
        let mut stages = StageCycles::new();
        let mut growth_log = Vec::new();

        let mapped = map_predecoder(p, syndrome, llrs, cfg);
        stages.add("map", 1);

        let fail = |failure, stages: StageCycles, clusters: Vec<Cluster>, growth_log, mapped| ClusterOutcome {
            failure: Some(failure),
            correction: BitVec::zeros(n),
            cycles: stages.total(),
            stages,
            clusters,
            growth_log,
            mapped,
        };

        if mapped.residual.count_ones() + mapped.erasures.count_ones() > cfg.n_clus {
            return Ok(fail(ClusterFailure::PoolOverflow, stages, Vec::new(), growth_log, mapped));
        }

        // Check and fault parts are split independently and in parallel.
        let (check_units, ci) = isolate_units(&mapped.residual);
        let (fault_units, fi) = isolate_units(&mapped.erasures);
        stages.add("init", ci.max(fi));
        let mut slots: Vec<Cluster> = (0..cfg.n_clus)
            .map(|_| Cluster { bitmap: BitVec::zeros(k), interior: BitVec::zeros(n), in_use: false, valid: false, merged: false })
            .collect();
        let mut next = 0;
        for u in &check_units {
            let mut b = BitVec::zeros(k);
            for i in u.iter_ones() {
                b.set(i, true);
            }
            slots[next].bitmap = b;
            slots[next].in_use = true;
            next += 1;
        }
        for u in &fault_units {
            let mut b = BitVec::zeros(k);
            for j in u.iter_ones() {
                b.set(m + j, true);
            }
            slots[next].bitmap = b;
            slots[next].in_use = true;
            next += 1;
        }

        let mut queue: VecDeque<usize> = VecDeque::new();
        for s in 0..next {
            slots[s].interior = adj.interior(&slots[s].bitmap);
            stages.add("interior", tree);
            let v = check_validity(&slots[s], p, &mapped.residual, cfg);
            stages.add("validity", v.cycles);
            match v.verdict {
                Validity::Valid => slots[s].valid = true,
                Validity::Invalid => {
                    queue.push_back(s);
                    stages.add("queue", 1);
                }
                Validity::SizeOverflow => {
                    return Ok(fail(ClusterFailure::SizeOverflow, stages, in_use(&slots), growth_log, mapped));
                }
            }
        }

        let guard = 4 * k + 4 * cfg.n_clus + 16;
        let mut rounds = 0;
        while let Some(s) = queue.pop_front() {
            stages.add("queue", 1);
            rounds += 1;
            if rounds > guard {
                return Ok(fail(ClusterFailure::NonTermination, stages, in_use(&slots), growth_log, mapped));
            }
            let before = slots[s].bitmap.clone();
            let grown = adj.grow(&before);
            stages.add("grow", tree);
            if cfg.record_growth {
                growth_log.push(GrowthRecord { bitmap: grown.clone(), merged: slots[s].merged });
            }
            slots[s].bitmap = grown;

            let active = slots.iter().filter(|c| c.in_use).count() as u64;
            stages.add("merge", active.saturating_sub(1) * tree);
            for d in 0..slots.len() {
                if d == s || !slots[d].in_use {
                    continue;
                }
                if slots[s].bitmap.intersects(&slots[d].bitmap) {
                    let donor = core::mem::replace(&mut slots[d].bitmap, BitVec::zeros(k));
                    slots[s].bitmap.or_assign(&donor);
                    slots[d].in_use = false;
                    slots[d].valid = false;
                    slots[d].interior = BitVec::zeros(n);
                    slots[s].merged = true;
                    queue.retain(|&q| q != d);
                    stages.add("merge", 1);
                }
            }

            debug_assert!(pairwise_disjoint(&slots));
            slots[s].interior = adj.interior(&slots[s].bitmap);
            stages.add("interior", tree);
            let v = check_validity(&slots[s], p, &mapped.residual, cfg);
            stages.add("validity", v.cycles);
            match v.verdict {
                Validity::Valid => slots[s].valid = true,
                Validity::SizeOverflow => {
                    return Ok(fail(ClusterFailure::SizeOverflow, stages, in_use(&slots), growth_log, mapped));
                }
                Validity::Invalid => {
                    slots[s].valid = false;
                    if slots[s].bitmap == before {
                        // A closed component that still cannot explain its syndrome.
                        return Ok(fail(ClusterFailure::NonTermination, stages, in_use(&slots), growth_log, mapped));
                    }
                    queue.push_back(s);
                    stages.add("queue", 1);
                }
            }
        }

        let mut correction = mapped.partial.clone();
        for c in slots.iter().filter(|c| c.in_use) {
            debug_assert!(c.valid);
            let rows: Vec<usize> = c.bitmap.iter_ones().take_while(|&i| i < m).collect();
            let cols: Vec<usize> = c.interior.iter_ones().collect();
            if rows.is_empty() || cols.is_empty() {
                continue;
            }
            let sigma = BitVec::from_bools(&rows.iter().map(|&i| mapped.residual.get(i)).collect::<Vec<_>>());
            if sigma.is_zero() {
                continue;
            }
            let rep = gf2::solve(&submatrix(p, &rows, &cols), &sigma).expect("shapes agree");
            stages.add("solve", systolic::solver_cycles(cols.len() as u64, rows.len() as u64, true));
            let x = rep.solution.expect("valid clusters are solvable");
            for b in x.iter_ones() {
                correction.toggle(cols[b]);
            }
        }
        Ok(ClusterOutcome {
            failure: None,
            correction,
            cycles: stages.total(),
            stages,
            clusters: in_use(&slots),
            growth_log,
            mapped,
        })
    }
}

/// True when no two in-use bitmaps share a node.
pub fn pairwise_disjoint(clusters: &[Cluster]) -> bool {
    let live: Vec<&Cluster> = clusters.iter().filter(|c| c.in_use).collect();
    live.iter().enumerate().all(|(i, a)| live[i + 1..].iter().all(|b| !a.bitmap.intersects(&b.bitmap)))
}

fn in_use(slots: &[Cluster]) -> Vec<Cluster> {
    slots.iter().filter(|c| c.in_use).cloned().collect()
}
