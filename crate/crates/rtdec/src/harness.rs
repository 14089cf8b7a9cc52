//! Monte Carlo trial runner.
//!
//! Trial `i` samples its faults from `trial_rng(seed, i)`, so results do not
//! depend on scheduling. Trials run on the rayon pool and are collected in
//! index order.

use anyhow::Result;
use rayon::prelude::*;
use rtdec_core::bp::{self, llr_priors, relay, relay_cycles, run_leg, Gamma, RelayPlan, TannerGraph};
use rtdec_core::cluster::{ClusterDecoder, ClusterFailure, UfConfig};
use rtdec_core::osd::{filtered_osd, OsdConfig, OsdOutcome, OsdStatus, StandardOsd};
use rtdec_core::problem::trial_rng;
use rtdec_core::{BitVec, DecodeOutcome, DecodingProblem, FailureKind, StageCycles};

use crate::config::{DecoderSpec, PredecoderSpec, RunConfig};

const ALPHA: u64 = bp::CYCLES_PER_ITERATION;

/// One row of `trials.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub outcome: DecodeOutcome,
    /// Cycles spent in the pre-decoder leg (zero without one).
    pub pre_cycles: u64,
    /// Whether the post-processing decoder ran.
    pub post_invoked: bool,
}

impl TrialRecord {
    pub fn cycles(&self) -> u64 {
        self.outcome.cycles
    }

    /// Cycles counted from the end of the pre-decoder leg.
    pub fn post_cycles(&self) -> u64 {
        self.outcome.cycles - self.pre_cycles
    }

    pub fn is_failure(&self) -> bool {
        self.outcome.failure_kind.is_some()
    }
}

enum Decoder<'a> {
    Bp { gamma: Gamma, max_iterations: u32 },
    Relay(RelayPlan),
    FilteredOsd(OsdConfig),
    StandardOsd(StandardOsd),
    Cluster(ClusterDecoder<'a>),
}

/// A problem bound to a decoder pipeline.
pub struct Harness<'a> {
    problem: &'a DecodingProblem,
    graph: TannerGraph,
    priors: Vec<f64>,
    predecoder: Option<PredecoderSpec>,
    decoder: Decoder<'a>,
    cutoff: Option<u64>,
}

impl<'a> Harness<'a> {
    pub fn new(problem: &'a DecodingProblem, config: &RunConfig) -> Result<Self> {
        Self::with_parts(problem, config.predecoder.clone(), &config.decoder, config.cutoff)
    }

    pub fn with_parts(
        problem: &'a DecodingProblem,
        predecoder: Option<PredecoderSpec>,
        decoder: &DecoderSpec,
        cutoff: Option<u64>,
    ) -> Result<Self> {
        if predecoder.is_some() && !decoder.is_post_processor() {
            anyhow::bail!("a pre-decoder can only precede filtered_osd, standard_osd or cluster");
        }
        let decoder = match decoder {
            DecoderSpec::Bp { max_iterations, gamma } => {
                Decoder::Bp { gamma: Gamma::Uniform(*gamma), max_iterations: *max_iterations }
            }
            DecoderSpec::Relay(r) => Decoder::Relay(r.to_config().plan(problem.n())),
            DecoderSpec::FilteredOsd(o) => Decoder::FilteredOsd(o.to_config()),
            DecoderSpec::StandardOsd => Decoder::StandardOsd(StandardOsd::new(problem)),
            DecoderSpec::Cluster(c) => Decoder::Cluster(ClusterDecoder::new(problem, c.to_config())?),
        };
        Ok(Self::assemble(problem, predecoder, decoder, cutoff))
    }

    fn assemble(
        problem: &'a DecodingProblem,
        predecoder: Option<PredecoderSpec>,
        decoder: Decoder<'a>,
        cutoff: Option<u64>,
    ) -> Self {
        Self { problem, graph: TannerGraph::new(problem), priors: llr_priors(problem.priors()), predecoder, decoder, cutoff }
    }

    /// Cluster decoder with an explicit configuration, for callers that need
    /// `UfConfig` fields the file format does not expose.
    pub fn with_cluster(problem: &'a DecodingProblem, predecoder: Option<PredecoderSpec>, config: UfConfig) -> Result<Self> {
        let decoder = Decoder::Cluster(ClusterDecoder::new(problem, config)?);
        Ok(Self::assemble(problem, predecoder, decoder, None))
    }

    pub fn problem(&self) -> &DecodingProblem {
        self.problem
    }

    /// Decodes one syndrome. `truth` classifies logical failures.
    pub fn decode(&self, syndrome: &BitVec, truth: &BitVec) -> (DecodeOutcome, u64, bool) {
        let mut stages = StageCycles::new();
        let mut pre_cycles = 0;
        let llrs = match &self.predecoder {
            Some(pre) => {
                let leg = run_leg(&self.graph, syndrome, &self.priors, &Gamma::Uniform(pre.gamma), pre.iterations, true);
                pre_cycles = relay_cycles(leg.iterations as u64, ALPHA);
                stages.add("predecoder", pre_cycles);
                if leg.converged {
                    return (self.finish(Some(leg.correction), None, stages, truth), pre_cycles, false);
                }
                let refresh =
                    run_leg(&self.graph, syndrome, &self.priors, &Gamma::Uniform(0.0), pre.refresh_iterations, false);
                stages.add("refresh", relay_cycles(refresh.iterations as u64, ALPHA));
                refresh.marginals
            }
            None => self.priors.clone(),
        };
        let (correction, failure) = match &self.decoder {
            Decoder::Bp { gamma, max_iterations } => {
                let leg = run_leg(&self.graph, syndrome, &llrs, gamma, *max_iterations, true);
                stages.add("bp", relay_cycles(leg.iterations as u64, ALPHA));
                converged(leg.converged, leg.correction)
            }
            Decoder::Relay(plan) => {
                let out = relay(&self.graph, &llrs, syndrome, plan);
                stages.add("relay", relay_cycles(out.iterations, ALPHA));
                converged(out.converged, out.correction)
            }
            Decoder::FilteredOsd(cfg) => {
                let out = filtered_osd(self.problem, syndrome, &llrs, cfg).expect("inputs sized by the harness");
                osd_result(out, &mut stages)
            }
            Decoder::StandardOsd(osd) => {
                let out = osd.decode(syndrome, &llrs).expect("inputs sized by the harness");
                osd_result(out, &mut stages)
            }
            Decoder::Cluster(dec) => {
                let out = dec.decode(syndrome, &llrs).expect("inputs sized by the harness");
                stages.extend(&out.stages);
                match out.failure {
                    None => (Some(out.correction), None),
                    Some(ClusterFailure::PoolOverflow | ClusterFailure::SizeOverflow) => {
                        (None, Some(FailureKind::Overflow))
                    }
                    Some(ClusterFailure::NonTermination) => (None, Some(FailureKind::NonConvergence)),
                }
            }
        };
        (self.finish(correction, failure, stages, truth), pre_cycles, true)
    }

    fn finish(
        &self,
        correction: Option<BitVec>,
        failure: Option<FailureKind>,
        stages: StageCycles,
        truth: &BitVec,
    ) -> DecodeOutcome {
        let failure = failure.or_else(|| {
            let c = correction.as_ref().expect("success carries a correction");
            self.problem.is_logical_failure(truth, c).then_some(FailureKind::Logical)
        });
        let failure = match (failure, self.cutoff) {
            (None, Some(limit)) if stages.total() > limit => Some(FailureKind::Cutoff),
            (f, _) => f,
        };
        DecodeOutcome::from_stages(correction, failure, stages)
    }

    pub fn run_trial(&self, base_seed: u64, trial: u64) -> TrialRecord {
        let mut rng = trial_rng(base_seed, trial);
        let faults = self.problem.sample_faults(&mut rng);
        let syndrome = self.problem.syndrome(&faults);
        let (outcome, pre_cycles, post_invoked) = self.decode(&syndrome, &faults);
        if outcome.failure_kind != Some(FailureKind::Cutoff) {
            if let Some(c) = outcome.correction.as_ref().filter(|_| outcome.failure_kind.is_none()) {
                assert!(self.problem.explains(c, &syndrome), "successful correction must explain the syndrome");
            }
        }
        assert_eq!(outcome.cycles, outcome.stages.total(), "every cycle is billed to a stage");
        TrialRecord { trial, seed: base_seed.wrapping_add(trial), outcome, pre_cycles, post_invoked }
    }

    pub fn run_trials(&self, base_seed: u64, trials: u64) -> Vec<TrialRecord>
    where
        Self: Sync,
    {
        (0..trials).into_par_iter().map(|t| self.run_trial(base_seed, t)).collect()
    }
}

fn converged(ok: bool, correction: BitVec) -> (Option<BitVec>, Option<FailureKind>) {
    if ok {
        (Some(correction), None)
    } else {
        (None, Some(FailureKind::NonConvergence))
    }
}

fn osd_result(out: OsdOutcome, stages: &mut StageCycles) -> (Option<BitVec>, Option<FailureKind>) {
    stages.extend(&out.stages);
    match out.status {
        OsdStatus::Success => (Some(out.correction), None),
        OsdStatus::OverflowFail => (None, Some(FailureKind::Overflow)),
        OsdStatus::UnsolvableFail => (None, Some(FailureKind::NonConvergence)),
    }
}

/// Builds the problem and runs every trial of `config`.
pub fn run_config(config: &RunConfig, base_dir: &std::path::Path) -> Result<(DecodingProblem, Vec<TrialRecord>)> {
    let problem = config.problem.build(base_dir)?;
    let records = {
        let harness = Harness::new(&problem, config)?;
        harness.run_trials(config.seed, config.trials)
    };
    Ok((problem, records))
}

/// Stage names in first-seen order across the records.
pub fn stage_names(records: &[TrialRecord]) -> Vec<&'static str> {
    let mut names: Vec<&'static str> = Vec::new();
    for r in records {
        for (s, _) in r.outcome.stages.iter() {
            if !names.contains(&s) {
                names.push(s);
            }
        }
    }
    names
}
