use alloc::format;
use alloc::vec::Vec;

use super::{DecodingProblem, ProblemError};

/// Repeats a code-capacity problem over `rounds` noisy syndrome rounds.
///
/// Check `(t, i)` is the difference between round `t` and round `t - 1` of
/// base check `i`. Data fault `(t, q)` keeps the base probability and flips
/// the round-`t` copies of its checks. Measurement fault `(t, i)` fires with
/// probability `q_meas` and flips checks `(t, i)` and `(t + 1, i)`; in the
/// last round only the first. Data faults come first, then measurement faults.
pub fn phenomenological(
    base: &DecodingProblem,
    rounds: usize,
    q_meas: f64,
) -> Result<DecodingProblem, ProblemError> {
    if rounds == 0 {
        return Err(ProblemError::Parameters("at least one round is required"));
    }
    let mc = base.m();
    let mut h_cols = Vec::with_capacity(rounds * (base.n() + mc));
    let mut a_cols = Vec::with_capacity(h_cols.capacity());
    let mut p = Vec::with_capacity(h_cols.capacity());
    for t in 0..rounds {
        for (q, col) in base.h_columns().iter().enumerate() {
            h_cols.push(col.iter().map(|&i| t * mc + i).collect());
            a_cols.push(base.a_columns()[q].clone());
            p.push(base.priors()[q]);
        }
    }
    for t in 0..rounds {
        for i in 0..mc {
            let mut col = alloc::vec![t * mc + i];
            if t + 1 < rounds {
                col.push((t + 1) * mc + i);
            }
            h_cols.push(col);
            a_cols.push(Vec::new());
            p.push(q_meas);
        }
    }
    DecodingProblem::new(
        format!("{}-phen{}", base.name(), rounds),
        rounds * mc,
        base.k(),
        h_cols,
        a_cols,
        p,
    )
}
