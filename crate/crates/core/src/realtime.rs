//! Latency-tail condition, slowdown bound and a backlog simulator.
//!
//! A decoder that finishes within `t_ref` with probability `1 − ε` and never
//! takes longer than `t_max` keeps up with syndrome generation (one layer per
//! `t_gen`) when `γ = ε·C·L < 1`, where `L = ⌈(t_max − t_ref)/(t_gen − t_ref)⌉`
//! idle layers absorb one slow run.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RealtimeError {
    #[error("timings must satisfy 0 < t_ref < t_gen < t_max")]
    Timings,
    #[error("epsilon must lie in [0, 1], got {0}")]
    Epsilon(f64),
    #[error("block count must be at least 1")]
    Blocks,
    #[error("histogram breakpoints must be strictly increasing with non-decreasing cumulative fractions in [0, 1]")]
    Histogram,
    #[error("t_ref = {0} lies past the last breakpoint of an incomplete histogram")]
    OutsideDomain(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LatencyModel {
    pub t_ref: u64,
    pub t_max: u64,
    pub t_gen: u64,
    pub epsilon: f64,
    pub blocks: u64,
}

impl LatencyModel {
    pub fn new(t_ref: u64, t_max: u64, t_gen: u64, epsilon: f64, blocks: u64) -> Result<Self, RealtimeError> {
        if !(0 < t_ref && t_ref < t_gen && t_gen < t_max) {
            return Err(RealtimeError::Timings);
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(RealtimeError::Epsilon(epsilon));
        }
        if blocks == 0 {
            return Err(RealtimeError::Blocks);
        }
        Ok(Self { t_ref, t_max, t_gen, epsilon, blocks })
    }

    /// Idle layers inserted after a slow run.
    pub fn idle_layers(&self) -> u64 {
        (self.t_max - self.t_ref).div_ceil(self.t_gen - self.t_ref)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TailVerdict {
    pub l: u64,
    pub gamma: f64,
    pub satisfied: bool,
    /// `+∞` when the condition fails.
    pub slowdown_bound: f64,
}

pub fn tail_verdict(model: &LatencyModel) -> TailVerdict {
    let l = model.idle_layers();
    let gamma = model.epsilon * model.blocks as f64 * l as f64;
    let satisfied = model.t_ref < model.t_gen && gamma < 1.0;
    let slowdown_bound = if satisfied {
        1.0 + model.t_ref as f64 / model.t_gen as f64 + 2.0 * gamma / (1.0 - gamma)
    } else {
        f64::INFINITY
    };
    TailVerdict { l, gamma, satisfied, slowdown_bound }
}

/// Largest block counts satisfying `ε·C·L < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BlockLimit {
    pub l: u64,
    /// `None` means unbounded (`ε = 0`).
    pub strict: Option<u64>,
    /// Same condition with `L + 1` layers.
    pub conservative: Option<u64>,
}

fn limit_for(epsilon: f64, l: u64) -> Option<u64> {
    if epsilon <= 0.0 || l == 0 {
        return None;
    }
    let x = 1.0 / (epsilon * l as f64);
    let mut c = libm::ceil(x) as u64;
    // Walk to the exact boundary to absorb floating-point noise.
    while c > 0 && epsilon * (c as f64) * (l as f64) >= 1.0 {
        c -= 1;
    }
    while epsilon * ((c + 1) as f64) * (l as f64) < 1.0 {
        c += 1;
    }
    Some(c)
}

/// The model's `blocks` field is ignored.
pub fn max_blocks(model: &LatencyModel) -> BlockLimit {
    let l = model.idle_layers();
    BlockLimit { l, strict: limit_for(model.epsilon, l), conservative: limit_for(model.epsilon, l + 1) }
}

/// Cumulative fraction of decodes finished within each budget.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyHistogram {
    points: Vec<(u64, f64)>,
}

impl LatencyHistogram {
    pub fn new(points: Vec<(u64, f64)>) -> Result<Self, RealtimeError> {
        let ok = points.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1)
            && points.iter().all(|&(_, f)| (0.0..=1.0).contains(&f));
        if !ok {
            return Err(RealtimeError::Histogram);
        }
        Ok(Self { points })
    }

    /// Empirical CDF of a sample of cycle counts.
    pub fn from_samples(samples: &[u64]) -> Self {
        let mut s = samples.to_vec();
        s.sort_unstable();
        let total = s.len() as f64;
        let mut points: Vec<(u64, f64)> = Vec::new();
        for (i, &c) in s.iter().enumerate() {
            let frac = (i + 1) as f64 / total;
            match points.last_mut() {
                Some(last) if last.0 == c => last.1 = frac,
                _ => points.push((c, frac)),
            }
        }
        Self { points }
    }

    pub fn points(&self) -> &[(u64, f64)] {
        &self.points
    }

    /// Step-function value at `t`; zero before the first breakpoint.
    pub fn cumulative(&self, t: u64) -> f64 {
        match self.points.partition_point(|&(b, _)| b <= t) {
            0 => 0.0,
            k => self.points[k - 1].1,
        }
    }

    fn is_complete(&self) -> bool {
        self.points.last().is_some_and(|&(_, f)| f >= 1.0)
    }
}

/// `ε = 1 − cumulative(t_ref)`.
pub fn epsilon_from_histogram(hist: &LatencyHistogram, t_ref: u64) -> Result<f64, RealtimeError> {
    let last = hist.points.last().map_or(0, |p| p.0);
    if t_ref > last && !hist.is_complete() {
        return Err(RealtimeError::OutsideDomain(t_ref));
    }
    Ok(1.0 - hist.cumulative(t_ref))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BacklogResult {
    pub mean_slowdown: f64,
    pub layers: u64,
    pub slow_layers: u64,
    pub max_segments: u64,
    pub diverged: bool,
}

/// Segments per cascade before the run is declared divergent.
pub const SEGMENT_GUARD: u64 = 100_000;

/// Pessimistic layered model: each logical layer owns `2C` decodes. If all
/// are fast a baseline idle layer of `t_ref` follows; otherwise `L` idle
/// layers of `t_gen` follow, and every further segment of `L − 1` layers is
/// appended while the previous segment's `C(L − 1)` decodes contain a slow run.
pub fn simulate_backlog(model: &LatencyModel, layers: u64, seed: u64) -> BacklogResult {
    let eps = model.epsilon;
    simulate_with(model, layers, seed, |rng, draws| any_slow_two_point(rng, eps, draws))
}

/// Like [`simulate_backlog`] but each decode's latency is drawn from `hist`
/// and counts as slow when it exceeds `t_ref`. Not part of the analytic model.
pub fn simulate_backlog_histogram(model: &LatencyModel, hist: &LatencyHistogram, layers: u64, seed: u64) -> BacklogResult {
    let eps = 1.0 - hist.cumulative(model.t_ref);
    simulate_with(model, layers, seed, |rng, draws| (0..draws).any(|_| rng.random::<f64>() < eps))
}

fn any_slow_two_point(rng: &mut ChaCha8Rng, eps: f64, draws: u64) -> bool {
    if eps <= 0.0 {
        return false;
    }
    if eps >= 1.0 {
        return draws > 0;
    }
    // P(at least one slow among `draws`) in one uniform.
    let p = -libm::expm1(draws as f64 * libm::log1p(-eps));
    rng.random::<f64>() < p
}

fn simulate_with(
    model: &LatencyModel,
    layers: u64,
    seed: u64,
    mut any_slow: impl FnMut(&mut ChaCha8Rng, u64) -> bool,
) -> BacklogResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = model.idle_layers();
    let c = model.blocks;
    let (t_ref, t_gen) = (model.t_ref as f64, model.t_gen as f64);
    let mut duration = 0.0;
    let mut slow_layers = 0;
    let mut max_segments = 0;
    let mut diverged = false;
    for _ in 0..layers {
        duration += t_gen;
        if !any_slow(&mut rng, 2 * c) {
            duration += t_ref;
            continue;
        }
        slow_layers += 1;
        let mut idle = l;
        let mut segments = 1;
        while l > 1 && any_slow(&mut rng, c * (l - 1)) {
            idle += l - 1;
            segments += 1;
            if segments > SEGMENT_GUARD {
                diverged = true;
                break;
            }
        }
        max_segments = max_segments.max(segments);
        duration += idle as f64 * t_gen;
        if diverged {
            break;
        }
    }
    let mean_slowdown = if diverged { f64::INFINITY } else { duration / (layers.max(1) as f64 * t_gen) };
    BacklogResult { mean_slowdown, layers, slow_layers, max_segments, diverged }
}
