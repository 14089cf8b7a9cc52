//! MinSum belief propagation, memory BP legs and Relay chaining.
//!
//! Messages are log-likelihood ratios: positive means "no fault". The hard
//! decision is `F̂_j = 1` iff `Λ_j < 0`; a marginal of exactly zero decides 0.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitVec;
use crate::problem::DecodingProblem;

/// Magnitude bound applied to every message.
pub const MESSAGE_CLAMP: f64 = 64.0;

/// Probabilities are clamped into `[P_FLOOR, 1 - P_FLOOR]` before taking logs.
pub const P_FLOOR: f64 = 1e-12;

/// FPGA cycles per BP iteration.
pub const CYCLES_PER_ITERATION: u64 = 2;

#[inline]
fn clamp(x: f64) -> f64 {
    x.clamp(-MESSAGE_CLAMP, MESSAGE_CLAMP)
}

/// `ln((1 - p) / p)` per fault.
pub fn llr_priors(p: &[f64]) -> Vec<f64> {
    p.iter()
        .map(|&q| {
            let q = q.clamp(P_FLOOR, 1.0 - P_FLOOR);
            libm::log((1.0 - q) / q)
        })
        .collect()
}

/// Edges of `H` grouped by fault (column-major), with a check-to-edge index.
#[derive(Debug, Clone)]
pub struct TannerGraph {
    m: usize,
    n: usize,
    /// Check of each edge.
    edge_check: Vec<u32>,
    /// Edges of fault `j` are `var_start[j]..var_start[j + 1]`.
    var_start: Vec<usize>,
    check_edges: Vec<Vec<u32>>,
}

impl TannerGraph {
    pub fn new(problem: &DecodingProblem) -> Self {
        let n = problem.n();
        let m = problem.m();
        let mut edge_check = Vec::new();
        let mut var_start = Vec::with_capacity(n + 1);
        let mut check_edges = vec![Vec::new(); m];
        var_start.push(0);
        for col in problem.h_columns() {
            for &i in col {
                check_edges[i].push(edge_check.len() as u32);
                edge_check.push(i as u32);
            }
            var_start.push(edge_check.len());
        }
        Self { m, n, edge_check, var_start, check_edges }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> usize {
        self.edge_check.len()
    }

    /// `H F̂` for a hard decision.
    pub fn syndrome_of(&self, f: &BitVec) -> BitVec {
        let mut s = BitVec::zeros(self.m);
        for j in f.iter_ones() {
            for e in self.var_start[j]..self.var_start[j + 1] {
                s.toggle(self.edge_check[e] as usize);
            }
        }
        s
    }
}

/// Memory strengths for one leg.
#[derive(Debug, Clone, PartialEq)]
pub enum Gamma {
    /// The same strength for every fault.
    Uniform(f64),
    /// One strength per fault.
    PerFault(Vec<f64>),
}

impl Gamma {
    #[inline]
    fn get(&self, j: usize) -> f64 {
        match self {
            Gamma::Uniform(g) => *g,
            Gamma::PerFault(v) => v[j],
        }
    }
}

/// Message state of one BP run.
#[derive(Debug, Clone)]
pub struct BpState {
    /// `λ_j(0)`.
    pub prior: Vec<f64>,
    /// `λ_j(t)`, the memory-biased prior used in the latest iteration.
    pub bias: Vec<f64>,
    /// `ν_{j→i}`, indexed by edge.
    pub v2c: Vec<f64>,
    /// `μ_{i→j}`, indexed by edge.
    pub c2v: Vec<f64>,
    /// `Λ_j`.
    pub marginals: Vec<f64>,
    pub hard: BitVec,
    pub iteration: u32,
}

impl BpState {
    /// `ν(0) = λ(0) = Λ(0) = init`.
    pub fn new(graph: &TannerGraph, init: &[f64]) -> Self {
        assert_eq!(init.len(), graph.n, "one initial value per fault");
        let mut v2c = vec![0.0; graph.edges()];
        for (j, &x) in init.iter().enumerate() {
            v2c[graph.var_start[j]..graph.var_start[j + 1]].fill(clamp(x));
        }
        Self {
            prior: init.to_vec(),
            bias: init.to_vec(),
            v2c,
            c2v: vec![0.0; graph.edges()],
            marginals: init.to_vec(),
            hard: BitVec::zeros(graph.n),
            iteration: 0,
        }
    }

    /// One check update followed by one variable update. Returns whether the
    /// new hard decision reproduces `syndrome`.
    pub fn iterate(&mut self, graph: &TannerGraph, syndrome: &BitVec, gamma: &Gamma) -> bool {
        for (i, edges) in graph.check_edges.iter().enumerate() {
            let mut negative = syndrome.get(i);
            let mut min1 = MESSAGE_CLAMP;
            let mut min2 = MESSAGE_CLAMP;
            let mut arg = usize::MAX;
            for &e in edges {
                let v = self.v2c[e as usize];
                negative ^= v < 0.0;
                let a = v.abs();
                if a < min1 {
                    min2 = min1;
                    min1 = a;
                    arg = e as usize;
                } else if a < min2 {
                    min2 = a;
                }
            }
            for &e in edges {
                let e = e as usize;
                let v = self.v2c[e];
                let mag = if e == arg { min2 } else { min1 };
                let neg = negative ^ (v < 0.0);
                self.c2v[e] = if neg { -mag } else { mag };
            }
        }
        for j in 0..graph.n {
            let g = gamma.get(j);
            let bias = (1.0 - g) * self.prior[j] + g * self.marginals[j];
            self.bias[j] = bias;
            let range = graph.var_start[j]..graph.var_start[j + 1];
            let total: f64 = self.c2v[range.clone()].iter().sum();
            let marginal = bias + total;
            self.marginals[j] = marginal;
            for e in range {
                self.v2c[e] = clamp(marginal - self.c2v[e]);
            }
            self.hard.set(j, marginal < 0.0);
        }
        self.iteration += 1;
        graph.syndrome_of(&self.hard) == *syndrome
    }
}

/// Result of one leg.
#[derive(Debug, Clone)]
pub struct LegResult {
    pub converged: bool,
    pub iterations: u32,
    pub correction: BitVec,
    pub marginals: Vec<f64>,
}

/// Runs up to `max_iterations` iterations from `init`.
///
/// With `halt_on_convergence` the leg stops at the first iteration whose hard
/// decision explains the syndrome; otherwise it always runs
/// `max_iterations` and reports whether the final decision converged.
pub fn run_leg(
    graph: &TannerGraph,
    syndrome: &BitVec,
    init: &[f64],
    gamma: &Gamma,
    max_iterations: u32,
    halt_on_convergence: bool,
) -> LegResult {
    let mut st = BpState::new(graph, init);
    let mut converged = false;
    for _ in 0..max_iterations {
        converged = st.iterate(graph, syndrome, gamma);
        if converged && halt_on_convergence {
            break;
        }
    }
    LegResult { converged, iterations: st.iteration, correction: st.hard, marginals: st.marginals }
}

/// Plain MinSum from the problem's priors.
pub fn min_sum(problem: &DecodingProblem, syndrome: &BitVec, max_iterations: u32) -> LegResult {
    let graph = TannerGraph::new(problem);
    run_leg(&graph, syndrome, &llr_priors(problem.priors()), &Gamma::Uniform(0.0), max_iterations, true)
}

/// How a leg's memory strengths are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaSpec {
    Constant(f64),
    /// Each fault draws its own strength uniformly from `[lo, hi]`.
    Random { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegSpec {
    pub gamma: GammaSpec,
    pub max_iterations: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelayConfig {
    pub legs: Vec<LegSpec>,
    /// Seed for the random memory strengths; leg `r` uses `seed + r`.
    pub gamma_seed: u64,
}

impl RelayConfig {
    /// A first leg with constant `gamma0` and `first_iterations`, followed by
    /// `later_legs` legs with random strengths in `[lo, hi]`.
    pub fn chained(
        gamma0: f64,
        first_iterations: u32,
        later_legs: usize,
        later_iterations: u32,
        lo: f64,
        hi: f64,
        gamma_seed: u64,
    ) -> Self {
        let mut legs = vec![LegSpec { gamma: GammaSpec::Constant(gamma0), max_iterations: first_iterations }];
        legs.extend((0..later_legs).map(|_| LegSpec {
            gamma: GammaSpec::Random { lo, hi },
            max_iterations: later_iterations,
        }));
        Self { legs, gamma_seed }
    }

    /// Gross-code settings: 1 + 299 legs.
    pub fn gross(gamma_seed: u64) -> Self {
        Self::chained(0.125, 80, 299, 60, -0.24, 0.66, gamma_seed)
    }

    /// Two-gross-code settings: 1 + 300 legs.
    pub fn two_gross(gamma_seed: u64) -> Self {
        Self::chained(0.125, 80, 300, 60, -0.161, 0.815, gamma_seed)
    }

    pub fn max_iterations(&self) -> u64 {
        self.legs.iter().map(|l| l.max_iterations as u64).sum()
    }

    pub fn max_cycles(&self, alpha: u64) -> u64 {
        relay_cycles(self.max_iterations(), alpha)
    }

    /// Draws the per-fault strengths once so every decode reuses them.
    pub fn plan(&self, n: usize) -> RelayPlan {
        let legs = self
            .legs
            .iter()
            .enumerate()
            .map(|(r, leg)| {
                let gamma = match leg.gamma {
                    GammaSpec::Constant(g) => Gamma::Uniform(g),
                    GammaSpec::Random { lo, hi } => {
                        let mut rng = ChaCha8Rng::seed_from_u64(self.gamma_seed.wrapping_add(r as u64));
                        Gamma::PerFault((0..n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect())
                    }
                };
                (gamma, leg.max_iterations)
            })
            .collect();
        RelayPlan { legs }
    }
}

/// Materialized legs: strengths and iteration caps.
#[derive(Debug, Clone)]
pub struct RelayPlan {
    pub legs: Vec<(Gamma, u32)>,
}

#[derive(Debug, Clone)]
pub struct RelayOutcome {
    pub converged: bool,
    /// Index of the leg that produced the answer, or of the last leg run.
    pub leg: usize,
    pub leg_iterations: Vec<u32>,
    pub iterations: u64,
    pub correction: BitVec,
    pub marginals: Vec<f64>,
}

/// Runs legs until one converges.
///
/// Leg 1 starts from `priors`. Every later leg re-initializes all three of
/// `Λ(0)`, `λ(0)` and `ν(0)` to the previous leg's final marginals.
pub fn relay(graph: &TannerGraph, priors: &[f64], syndrome: &BitVec, plan: &RelayPlan) -> RelayOutcome {
    let mut init = priors.to_vec();
    let mut leg_iterations = Vec::with_capacity(plan.legs.len());
    let mut last = None;
    for (r, (gamma, t)) in plan.legs.iter().enumerate() {
        let res = run_leg(graph, syndrome, &init, gamma, *t, true);
        leg_iterations.push(res.iterations);
        if res.converged {
            return RelayOutcome {
                converged: true,
                leg: r,
                iterations: leg_iterations.iter().map(|&i| i as u64).sum(),
                leg_iterations,
                correction: res.correction,
                marginals: res.marginals,
            };
        }
        init.clone_from(&res.marginals);
        last = Some((r, res));
    }
    let (leg, res) = match last {
        Some((r, res)) => (r, res),
        None => (0, LegResult { converged: false, iterations: 0, correction: BitVec::zeros(graph.n), marginals: init }),
    };
    RelayOutcome {
        converged: false,
        leg,
        iterations: leg_iterations.iter().map(|&i| i as u64).sum(),
        leg_iterations,
        correction: res.correction,
        marginals: res.marginals,
    }
}

/// `α · iterations`.
pub fn relay_cycles(iterations: u64, alpha: u64) -> u64 {
    alpha * iterations
}
