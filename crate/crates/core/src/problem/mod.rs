//! The decoding model.
//!
//! A problem has `M` checks, `N` independent faults and `K` logical
//! observables. Fault `j` fires with probability `p[j]`, flips the checks in
//! column `j` of `H` and the observables in column `j` of `A`. A correction
//! `F̂` for syndrome `σ = H F` succeeds iff `H F̂ = σ` and `A (F + F̂) = 0`.

mod codes;
mod phenomenological;

pub use codes::{bivariate_bicycle, css_logicals, repetition, BbCode, BbSpec};
pub use phenomenological::phenomenological;

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitVec;
use crate::gf2::Gf2Matrix;

pub type FaultSet = BitVec;
pub type Syndrome = BitVec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("H column {column} references check {index} but M = {m}")]
    CheckIndex { column: usize, index: usize, m: usize },
    #[error("A column {column} references logical {index} but K = {k}")]
    LogicalIndex { column: usize, index: usize, k: usize },
    #[error("expected {expected} fault probabilities, found {found}")]
    ProbabilityCount { expected: usize, found: usize },
    #[error("expected {expected} A columns, found {found}")]
    LogicalColumnCount { expected: usize, found: usize },
    #[error("fault {column} has probability {value} outside [0, 1]")]
    Probability { column: usize, value: f64 },
    #[error("fault {column} triggers no check")]
    EmptyColumn { column: usize },
    #[error("invalid generator parameters: {0}")]
    Parameters(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodingProblem {
    name: String,
    m: usize,
    k: usize,
    h_cols: Vec<Vec<usize>>,
    a_cols: Vec<Vec<usize>>,
    p: Vec<f64>,
    h_rows: Vec<Vec<usize>>,
}

fn canonical(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

impl DecodingProblem {
    /// Validates and canonicalizes (sorts, removes duplicate indices).
    pub fn new(
        name: impl Into<String>,
        m: usize,
        k: usize,
        h_cols: Vec<Vec<usize>>,
        a_cols: Vec<Vec<usize>>,
        p: Vec<f64>,
    ) -> Result<Self, ProblemError> {
        let n = h_cols.len();
        if p.len() != n {
            return Err(ProblemError::ProbabilityCount { expected: n, found: p.len() });
        }
        if a_cols.len() != n {
            return Err(ProblemError::LogicalColumnCount { expected: n, found: a_cols.len() });
        }
        let h_cols: Vec<Vec<usize>> = h_cols.into_iter().map(canonical).collect();
        let a_cols: Vec<Vec<usize>> = a_cols.into_iter().map(canonical).collect();
        for (j, col) in h_cols.iter().enumerate() {
            if col.is_empty() {
                return Err(ProblemError::EmptyColumn { column: j });
            }
            if let Some(&i) = col.iter().find(|&&i| i >= m) {
                return Err(ProblemError::CheckIndex { column: j, index: i, m });
            }
        }
        for (j, col) in a_cols.iter().enumerate() {
            if let Some(&i) = col.iter().find(|&&i| i >= k) {
                return Err(ProblemError::LogicalIndex { column: j, index: i, k });
            }
        }
        for (j, &q) in p.iter().enumerate() {
            if !(0.0..=1.0).contains(&q) {
                return Err(ProblemError::Probability { column: j, value: q });
            }
        }
        let mut h_rows = alloc::vec![Vec::new(); m];
        for (j, col) in h_cols.iter().enumerate() {
            for &i in col {
                h_rows[i].push(j);
            }
        }
        Ok(Self { name: name.into(), m, k, h_cols, a_cols, p, h_rows })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of checks.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of faults.
    pub fn n(&self) -> usize {
        self.h_cols.len()
    }

    /// Number of logical observables.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn h_columns(&self) -> &[Vec<usize>] {
        &self.h_cols
    }

    pub fn a_columns(&self) -> &[Vec<usize>] {
        &self.a_cols
    }

    /// Faults touching each check.
    pub fn h_rows(&self) -> &[Vec<usize>] {
        &self.h_rows
    }

    pub fn priors(&self) -> &[f64] {
        &self.p
    }

    /// Replaces the fault probabilities.
    pub fn with_priors(mut self, p: Vec<f64>) -> Result<Self, ProblemError> {
        if p.len() != self.n() {
            return Err(ProblemError::ProbabilityCount { expected: self.n(), found: p.len() });
        }
        for (j, &q) in p.iter().enumerate() {
            if !(0.0..=1.0).contains(&q) {
                return Err(ProblemError::Probability { column: j, value: q });
            }
        }
        self.p = p;
        Ok(self)
    }

    /// `H` as a dense `M x N` matrix.
    pub fn h_matrix(&self) -> Gf2Matrix {
        Gf2Matrix::from_column_supports(self.m, &self.h_cols)
    }

    /// `A` as a dense `K x N` matrix.
    pub fn a_matrix(&self) -> Gf2Matrix {
        Gf2Matrix::from_column_supports(self.k, &self.a_cols)
    }

    /// `σ = H F`.
    pub fn syndrome(&self, faults: &FaultSet) -> Syndrome {
        assert_eq!(faults.len(), self.n(), "fault set length");
        let mut s = BitVec::zeros(self.m);
        for j in faults.iter_ones() {
            for &i in &self.h_cols[j] {
                s.toggle(i);
            }
        }
        s
    }

    /// `A F`.
    pub fn logical_action(&self, faults: &FaultSet) -> BitVec {
        assert_eq!(faults.len(), self.n(), "fault set length");
        let mut s = BitVec::zeros(self.k);
        for j in faults.iter_ones() {
            for &i in &self.a_cols[j] {
                s.toggle(i);
            }
        }
        s
    }

    /// True iff `A (F + F̂) ≠ 0`.
    pub fn is_logical_failure(&self, faults: &FaultSet, correction: &FaultSet) -> bool {
        !self.logical_action(&faults.xor(correction)).is_zero()
    }

    pub fn explains(&self, correction: &FaultSet, syndrome: &Syndrome) -> bool {
        self.syndrome(correction) == *syndrome
    }

    /// Draws `F_j = 1` with probability `p_j`, one uniform per fault in index order.
    pub fn sample_faults<R: Rng + ?Sized>(&self, rng: &mut R) -> FaultSet {
        let mut f = BitVec::zeros(self.n());
        for (j, &q) in self.p.iter().enumerate() {
            let u: f64 = rng.random();
            if u < q {
                f.set(j, true);
            }
        }
        f
    }
}

/// The RNG used for trial `index` of a run seeded with `base`.
pub fn trial_rng(base: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(base.wrapping_add(index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn canonicalizes_supports() {
        let p = DecodingProblem::new("t", 3, 1, vec![vec![2, 0, 2], vec![1]], vec![vec![0], vec![]], vec![0.1, 0.2])
            .unwrap();
        assert_eq!(p.h_columns()[0], vec![0, 2]);
        assert_eq!(p.h_rows()[2], vec![0]);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(
            DecodingProblem::new("t", 2, 0, vec![vec![2]], vec![vec![]], vec![0.1]),
            Err(ProblemError::CheckIndex { .. })
        ));
        assert!(matches!(
            DecodingProblem::new("t", 2, 0, vec![vec![1]], vec![vec![]], vec![0.1, 0.2]),
            Err(ProblemError::ProbabilityCount { .. })
        ));
        assert!(matches!(
            DecodingProblem::new("t", 2, 0, vec![vec![]], vec![vec![]], vec![0.1]),
            Err(ProblemError::EmptyColumn { column: 0 })
        ));
        assert!(matches!(
            DecodingProblem::new("t", 2, 0, vec![vec![0]], vec![vec![]], vec![1.5]),
            Err(ProblemError::Probability { .. })
        ));
    }

    #[test]
    fn syndrome_and_logical_action() {
        let p = repetition(3, 0.1).unwrap();
        let f = BitVec::from_indices(3, &[1]);
        assert_eq!(p.syndrome(&f).to_indices(), vec![0, 1]);
        assert!(p.is_logical_failure(&f, &BitVec::zeros(3)));
        assert!(!p.is_logical_failure(&f, &f));
        // Complement has the same syndrome but the opposite logical action.
        let c = BitVec::from_indices(3, &[0, 2]);
        assert!(p.explains(&c, &p.syndrome(&f)));
        assert!(p.is_logical_failure(&f, &c));
    }

    #[test]
    fn sampling_is_reproducible() {
        let p = repetition(5, 0.3).unwrap();
        let a = p.sample_faults(&mut trial_rng(7, 3));
        let b = p.sample_faults(&mut trial_rng(7, 3));
        assert_eq!(a, b);
    }
}
