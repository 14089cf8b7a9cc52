//! CSV and JSON writers and readers.

use std::io::{Read, Write};

use anyhow::{anyhow, Context, Result};
use rtdec_core::realtime::LatencyHistogram;
use rtdec_core::FailureKind;

use crate::curve::{CurvePoint, TrialSummary};
use crate::harness::{stage_names, TrialRecord};

/// Decimal rendering with 9 significant digits.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x.is_infinite() { (if x > 0.0 { "inf" } else { "-inf" }).into() } else { "0".into() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding may carry into a new leading digit; one fewer decimal then.
    let digits = s.chars().filter(|c| c.is_ascii_digit()).collect::<String>();
    if digits.trim_start_matches('0').len() > 9 && decimals > 0 {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

pub const TRIAL_COLUMNS: [&str; 7] = ["trial", "seed", "status", "failure_kind", "cycles", "post_cycles", "post_invoked"];

pub fn write_trials<W: Write>(w: W, records: &[TrialRecord]) -> Result<()> {
    let stages = stage_names(records);
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = TRIAL_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(stages.iter().map(|s| format!("stage_{s}")));
    out.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.trial.to_string(),
            r.seed.to_string(),
            r.outcome.status.as_str().to_string(),
            r.outcome.failure_kind.map_or("", FailureKind::as_str).to_string(),
            r.cycles().to_string(),
            r.post_cycles().to_string(),
            r.post_invoked.to_string(),
        ];
        row.extend(stages.iter().map(|s| r.outcome.stages.get(s).to_string()));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads the columns of `trials.csv` the curve and CDF need.
pub fn read_trial_summaries<R: Read>(r: R) -> Result<Vec<TrialSummary>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| anyhow!("trials file lacks column `{name}`"));
    let (kind, cycles, post) = (col("failure_kind")?, col("cycles")?, col("post_cycles")?);
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or_default();
        let k = field(kind);
        out.push(TrialSummary {
            failed: !(k.is_empty() || k == FailureKind::Cutoff.as_str()),
            cycles: field(cycles).parse().with_context(|| format!("row {}: cycles", line + 1))?,
            post_cycles: field(post).parse().with_context(|| format!("row {}: post_cycles", line + 1))?,
        });
    }
    Ok(out)
}

pub fn summaries(records: &[TrialRecord]) -> Vec<TrialSummary> {
    records
        .iter()
        .map(|r| TrialSummary {
            failed: r.is_failure() && r.outcome.failure_kind != Some(FailureKind::Cutoff),
            cycles: r.cycles(),
            post_cycles: r.post_cycles(),
        })
        .collect()
}

fn budget_str(b: u64) -> String {
    if b == u64::MAX {
        "inf".into()
    } else {
        b.to_string()
    }
}

pub fn write_curve<W: Write>(w: W, points: &[CurvePoint]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["budget", "rate", "ci_low", "ci_high"])?;
    for p in points {
        out.write_record([budget_str(p.budget), fmt_sig9(p.rate), fmt_sig9(p.ci_low), fmt_sig9(p.ci_high)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_latency<W: Write>(w: W, hist: &LatencyHistogram) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["budget", "cumulative_fraction"])?;
    for &(b, f) in hist.points() {
        out.write_record([b.to_string(), fmt_sig9(f)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_latency<R: Read>(r: R) -> Result<LatencyHistogram> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let b: u64 = rec.get(0).unwrap_or_default().parse().context("budget column")?;
        let f: f64 = rec.get(1).unwrap_or_default().parse().context("cumulative_fraction column")?;
        points.push((b, f));
    }
    Ok(LatencyHistogram::new(points)?)
}

/// Parses a comma-separated budget list; `inf` means unlimited.
pub fn parse_budgets(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| if t == "inf" { Ok(u64::MAX) } else { t.parse().with_context(|| format!("budget `{t}`")) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_sig9(0.5), "0.500000000");
        assert_eq!(fmt_sig9(1.0), "1.00000000");
        assert_eq!(fmt_sig9(9.85e-6), "0.00000985000000");
        assert_eq!(fmt_sig9(123456.7891), "123456.789");
        assert_eq!(fmt_sig9(0.0), "0");
        assert_eq!(fmt_sig9(0.9999999999), "1.00000000");
    }

    #[test]
    fn budgets_parse() {
        assert_eq!(parse_budgets("0, 10,inf").unwrap(), vec![0, 10, u64::MAX]);
        assert!(parse_budgets("x").is_err());
    }
}
