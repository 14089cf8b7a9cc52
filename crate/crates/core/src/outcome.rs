//! Decoder-agnostic result type.

use alloc::vec::Vec;

use crate::bits::BitVec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DecodeStatus {
    Success,
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FailureKind {
    /// A syndrome-consistent correction that flips a logical observable.
    Logical,
    /// No syndrome-consistent correction was produced.
    NonConvergence,
    /// A fixed hardware capacity was exceeded.
    Overflow,
    /// The decoder finished, but later than the latency budget.
    Cutoff,
}

impl FailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureKind::Logical => "logical",
            FailureKind::NonConvergence => "non_convergence",
            FailureKind::Overflow => "overflow",
            FailureKind::Cutoff => "cutoff",
        }
    }
}

impl DecodeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            DecodeStatus::Success => "success",
            DecodeStatus::Failure => "failure",
        }
    }
}

/// Ordered per-stage cycle counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StageCycles {
    entries: Vec<(&'static str, u64)>,
}

impl StageCycles {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `cycles` to `stage`, creating it at the end if new.
    pub fn add(&mut self, stage: &'static str, cycles: u64) {
        match self.entries.iter_mut().find(|(s, _)| *s == stage) {
            Some((_, c)) => *c += cycles,
            None => self.entries.push((stage, cycles)),
        }
    }

    pub fn get(&self, stage: &str) -> u64 {
        self.entries.iter().find(|(s, _)| *s == stage).map_or(0, |(_, c)| *c)
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|(_, c)| c).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, u64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn extend(&mut self, other: &StageCycles) {
        for (s, c) in other.iter() {
            self.add(s, c);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    pub status: DecodeStatus,
    pub failure_kind: Option<FailureKind>,
    /// The proposed fault set; absent when the decoder gave up.
    pub correction: Option<BitVec>,
    /// Total cycles; always equals `stages.total()`.
    pub cycles: u64,
    pub stages: StageCycles,
}

impl DecodeOutcome {
    pub fn from_stages(
        correction: Option<BitVec>,
        failure_kind: Option<FailureKind>,
        stages: StageCycles,
    ) -> Self {
        let status =
            if failure_kind.is_none() { DecodeStatus::Success } else { DecodeStatus::Failure };
        Self { status, failure_kind, correction, cycles: stages.total(), stages }
    }
}
