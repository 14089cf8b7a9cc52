use alloc::format;
use alloc::vec::Vec;

use super::{DecodingProblem, ProblemError};
use crate::bits::BitVec;
use crate::gf2::{ForwardEliminator, Gf2Matrix, Inserted};

/// Distance-`d` repetition code under bit flips.
///
/// Check `i` compares bits `i` and `i + 1`; the single observable is the
/// parity of all `d` bits. `d` must be odd and at least 3.
pub fn repetition(d: usize, p: f64) -> Result<DecodingProblem, ProblemError> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(ProblemError::Parameters("repetition distance must be odd and >= 3"));
    }
    let h_cols = (0..d)
        .map(|j| {
            let mut c = Vec::new();
            if j > 0 {
                c.push(j - 1);
            }
            if j + 1 < d {
                c.push(j);
            }
            c
        })
        .collect();
    let a_cols = (0..d).map(|_| alloc::vec![0]).collect();
    DecodingProblem::new(format!("repetition-d{d}"), d - 1, 1, h_cols, a_cols, alloc::vec![p; d])
}

/// Parameters of a bivariate bicycle code: `A` and `B` are sums of monomials
/// `x^i y^j` over the group algebra of `Z_l x Z_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BbSpec {
    pub l: usize,
    pub m: usize,
    pub a_terms: Vec<(usize, usize)>,
    pub b_terms: Vec<(usize, usize)>,
}

impl BbSpec {
    /// `[[144, 12, 12]]`.
    pub fn gross() -> Self {
        Self { l: 12, m: 6, a_terms: alloc::vec![(3, 0), (0, 1), (0, 2)], b_terms: alloc::vec![(0, 3), (1, 0), (2, 0)] }
    }

    /// `[[72, 12, 6]]`, small enough for exhaustive desk checks.
    pub fn bb72() -> Self {
        Self { l: 6, m: 6, a_terms: alloc::vec![(3, 0), (0, 1), (0, 2)], b_terms: alloc::vec![(0, 3), (1, 0), (2, 0)] }
    }

    /// `[[288, 12, 18]]`.
    pub fn two_gross() -> Self {
        Self { l: 12, m: 12, a_terms: alloc::vec![(3, 0), (0, 2), (0, 7)], b_terms: alloc::vec![(0, 3), (1, 0), (2, 0)] }
    }

    fn polynomial(&self, terms: &[(usize, usize)]) -> Gf2Matrix {
        let n = self.l * self.m;
        let mut out = Gf2Matrix::zeros(n, n);
        for &(i, j) in terms {
            for a in 0..self.l {
                for b in 0..self.m {
                    let col = a * self.m + b;
                    let row = ((a + i) % self.l) * self.m + (b + j) % self.m;
                    let v = out.get(row, col);
                    out.set(row, col, !v);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct BbCode {
    pub spec: BbSpec,
    /// `[A | B]`.
    pub hx: Gf2Matrix,
    /// `[Bᵀ | Aᵀ]`.
    pub hz: Gf2Matrix,
    /// Logical representatives detecting the errors that `hz` sees.
    pub logicals: Vec<BitVec>,
}

pub fn bivariate_bicycle(spec: BbSpec) -> Result<BbCode, ProblemError> {
    if spec.l == 0 || spec.m == 0 {
        return Err(ProblemError::Parameters("l and m must be positive"));
    }
    if spec.a_terms.is_empty() || spec.b_terms.is_empty() {
        return Err(ProblemError::Parameters("A and B need at least one term"));
    }
    let a = spec.polynomial(&spec.a_terms);
    let b = spec.polynomial(&spec.b_terms);
    let hx = a.hstack(&b).expect("square blocks");
    let hz = b.transpose().hstack(&a.transpose()).expect("square blocks");
    let logicals = css_logicals(&hx, &hz);
    Ok(BbCode { spec, hx, hz, logicals })
}

impl BbCode {
    pub fn n(&self) -> usize {
        self.hx.ncols()
    }

    pub fn k(&self) -> usize {
        self.logicals.len()
    }

    /// Code-capacity problem: checks are the rows of `hz`, faults are the
    /// qubits, each failing with probability `p`.
    pub fn decoding_problem(&self, p: f64) -> Result<DecodingProblem, ProblemError> {
        let n = self.n();
        let mut h_cols = alloc::vec![Vec::new(); n];
        for i in 0..self.hz.nrows() {
            for j in self.hz.row(i).iter_ones() {
                h_cols[j].push(i);
            }
        }
        let mut a_cols = alloc::vec![Vec::new(); n];
        for (r, l) in self.logicals.iter().enumerate() {
            for j in l.iter_ones() {
                a_cols[j].push(r);
            }
        }
        let name = format!("bb-{}x{}", self.spec.l, self.spec.m);
        DecodingProblem::new(name, self.hz.nrows(), self.k(), h_cols, a_cols, alloc::vec![p; n])
    }
}

/// A basis of `ker(hx)` modulo the row space of `hz`.
pub fn css_logicals(hx: &Gf2Matrix, hz: &Gf2Matrix) -> Vec<BitVec> {
    let mut fe = ForwardEliminator::new(hz.ncols());
    for r in hz.rows() {
        fe.insert(r.clone());
    }
    hx.kernel_basis()
        .into_iter()
        .filter(|v| matches!(fe.insert(v.clone()), Inserted::Locked(_)))
        .collect()
}
