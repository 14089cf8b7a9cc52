//! Cutoff-time performance curves and latency CDFs.

use anyhow::{bail, Result};
use rtdec_core::realtime::LatencyHistogram;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

/// What the curve needs from one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSummary {
    /// Failed regardless of budget.
    pub failed: bool,
    pub cycles: u64,
    /// Cycles counted from the end of the pre-decoder leg.
    pub post_cycles: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub budget: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Failure rate at each budget, counting runs slower than the budget as
/// failures. `u64::MAX` acts as an unlimited budget.
pub fn cutoff_curve(trials: &[TrialSummary], budgets: &[u64], post_only: bool) -> Result<Vec<CurvePoint>> {
    if !budgets.windows(2).all(|w| w[0] <= w[1]) {
        bail!("budgets must be sorted ascending");
    }
    let n = trials.len() as u64;
    let mut cycles: Vec<u64> =
        trials.iter().filter(|t| !t.failed).map(|t| if post_only { t.post_cycles } else { t.cycles }).collect();
    cycles.sort_unstable();
    let hard = trials.iter().filter(|t| t.failed).count() as u64;
    Ok(budgets
        .iter()
        .map(|&b| {
            let late = (cycles.len() - cycles.partition_point(|&c| c <= b)) as u64;
            let k = hard + late;
            let rate = if n == 0 { 0.0 } else { k as f64 / n as f64 };
            let (ci_low, ci_high) = wilson(k, n, Z95);
            CurvePoint { budget: b, rate, ci_low, ci_high }
        })
        .collect())
}

/// Empirical CDF of the cycle counts.
pub fn latency_cdf(trials: &[TrialSummary], post_only: bool) -> Result<LatencyHistogram> {
    if trials.is_empty() {
        bail!("latency CDF needs at least one trial");
    }
    let cycles: Vec<u64> = trials.iter().map(|t| if post_only { t.post_cycles } else { t.cycles }).collect();
    Ok(LatencyHistogram::from_samples(&cycles))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(failed: bool, cycles: u64) -> TrialSummary {
        TrialSummary { failed, cycles, post_cycles: cycles / 2 }
    }

    #[test]
    fn step_curve_by_recount() {
        let trials = [t(false, 10), t(false, 20), t(true, 5), t(false, 30)];
        let c = cutoff_curve(&trials, &[0, 10, 25, 30, u64::MAX], false).unwrap();
        let rates: Vec<f64> = c.iter().map(|p| p.rate).collect();
        assert_eq!(rates, vec![1.0, 0.75, 0.5, 0.25, 0.25]);
        let post = cutoff_curve(&trials, &[10], true).unwrap();
        assert_eq!(post[0].rate, 0.5);
    }

    #[test]
    fn wilson_brackets_rate() {
        let (lo, hi) = wilson(0, 10_000, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - 3.84e-4).abs() < 1e-5);
        let (lo, hi) = wilson(50, 100, Z95);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn unsorted_budgets_rejected() {
        assert!(cutoff_curve(&[t(false, 1)], &[5, 1], false).is_err());
    }

    #[test]
    fn cdf_of_constant_cycles_is_one_step() {
        let h = latency_cdf(&[t(false, 7), t(true, 7)], false).unwrap();
        assert_eq!(h.points(), &[(7, 1.0)]);
    }
}
