//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rtdec::config::{DecoderSpec, OsdSettings, PredecoderSpec, ProblemSpec, RunConfig};
use rtdec::curve::{cutoff_curve, wilson, Z95};
use rtdec::harness::{run_config, Harness, TrialRecord};
use rtdec::output::summaries;
use rtdec_core::bp::{llr_priors, relay_cycles, run_leg, Gamma, RelayConfig, TannerGraph};
use rtdec_core::cluster::{check_validity, pairwise_disjoint, Cluster, ClusterDecoder, ExtendedAdjacency, UfConfig, Validity};
use rtdec_core::cost::{estimate_osd_resources, h_storage_brams, h_storage_urams, utilization, DeviceProfile, OsdParams};
use rtdec_core::gf2::{generalized_inverse, lifted_gauss_jordan, solve, solve_existence, ForwardEliminator, Inserted};
use rtdec_core::osd::standard_osd_cycles;
use rtdec_core::problem::{repetition, trial_rng};
use rtdec_core::realtime::{simulate_backlog, tail_verdict, LatencyModel};
use rtdec_core::systolic::{run_forward, run_full, run_solver, SolverTiming};
use rtdec_core::{BitVec, DecodingProblem, Gf2Matrix};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> Gf2Matrix {
    let mut a = Gf2Matrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            if rng.random::<f64>() < density {
                a.set(i, j, true);
            }
        }
    }
    a
}

fn random_bits(rng: &mut ChaCha8Rng, len: usize, p: f64) -> BitVec {
    BitVec::from_bools(&(0..len).map(|_| rng.random::<f64>() < p).collect::<Vec<_>>())
}

/// The systolic instances shared by the first two criteria.
fn systolic_instances() -> Vec<(Gf2Matrix, Gf2Matrix)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    (0..1000)
        .map(|_| {
            let m = rng.random_range(1..=12);
            let n = rng.random_range(1..=12);
            let l = rng.random_range(0..=4);
            let density = rng.random_range(0.1..0.9);
            (random_matrix(&mut rng, m, n, density), random_matrix(&mut rng, m, l, 0.5))
        })
        .collect()
}

fn systolic_oracle() -> Check {
    let start = Instant::now();
    let mut mismatches = 0;
    for (a, b) in systolic_instances() {
        let fwd = run_forward(&a, &b, false).map_err(|e| e.to_string())?;
        let mut fe = ForwardEliminator::with_spectators(a.ncols(), b.ncols());
        let ab = a.hstack(&b).map_err(|e| e.to_string())?;
        let mut residual = Gf2Matrix::zeros(a.nrows(), b.ncols());
        for i in 0..a.nrows() {
            if let Inserted::Residual(r) = fe.insert(ab.row(i).clone()) {
                *residual.row_mut(i) = r;
            }
        }
        mismatches += (fwd.matrix != fe.to_matrix() || fwd.residual != residual) as u32;
        let full = run_full(&a, &b, false).map_err(|e| e.to_string())?;
        let e = lifted_gauss_jordan(&a, &b).map_err(|e| e.to_string())?;
        mismatches += (full.matrix != e.matrix || full.pivot_mask != e.pivot_mask || full.residual != e.residual) as u32;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(mismatches == 0, || format!("{mismatches} mismatches"))?;
    ensure(secs < 10.0, || format!("took {secs:.1} s"))?;
    Ok(format!("1000 instances, 0 mismatches, {secs:.2} s"))
}

fn cycle_formulas() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut solves = 0;
    for (a, b) in systolic_instances() {
        let (m, n, l) = (a.nrows() as u64, a.ncols() as u64, b.ncols() as u64);
        let fwd = run_forward(&a, &b, false).map_err(|e| e.to_string())?;
        ensure(fwd.iterations == 2 * n + m + l - 1, || format!("forward {m}x{n}+{l}: {}", fwd.iterations))?;
        let full = run_full(&a, &b, false).map_err(|e| e.to_string())?;
        ensure(full.iterations == 3 * n + m + l - 2, || format!("full {m}x{n}+{l}: {}", full.iterations))?;
        let y = random_bits(&mut rng, a.nrows(), 0.5);
        let run = run_solver(&a, &y, SolverTiming::Compact).map_err(|e| e.to_string())?;
        let solvable = solve(&a, &y).map_err(|e| e.to_string())?.solvable;
        let billed = if solvable { 3 * n + m - 1 } else { n + m - 1 };
        ensure(run.report.solvable == solvable && run.cycles == billed, || {
            format!("solver {m}x{n}: billed {} expected {billed}", run.cycles)
        })?;
        solves += solvable as u32;
    }
    Ok(format!("1000 instances, {solves} solvable right-hand sides"))
}

fn h_vector() -> Check {
    let a = BitVec::parse("10110").ok_or("bad literal")?;
    let b = BitVec::parse("10101").ok_or("bad literal")?;
    let out = rtdec_core::systolic::line::run_h_example(&a, &b).map_err(|e| e.to_string())?;
    ensure(out.to_string() == "00011", || format!("got {out}"))?;
    Ok("00011".into())
}

fn gf2_suite() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut failures = 0;
    for _ in 0..200 {
        let m = rng.random_range(1..=12);
        let n = rng.random_range(1..=12);
        let density = rng.random_range(0.1..0.7);
        let a = random_matrix(&mut rng, m, n, density);
        let rank = a.rank();
        for word in 0..(1u64 << m) {
            let y = BitVec::from_bools(&(0..m).map(|i| word >> i & 1 == 1).collect::<Vec<_>>());
            let aug = a.hstack(&Gf2Matrix::from_column_supports(m, &[y.to_indices()])).map_err(|e| e.to_string())?;
            let expect = aug.rank() == rank;
            let rep = solve(&a, &y).map_err(|e| e.to_string())?;
            let sound = rep.solution.as_ref().is_none_or(|x| a.mul_vec(x).ok() == Some(y.clone()));
            failures += (solve_existence(&a, &y).ok() != Some(expect) || rep.solvable != expect || !sound) as u32;
        }
    }
    for _ in 0..500 {
        let m = rng.random_range(1..=12);
        let n = rng.random_range(1..=12);
        let r = rng.random_range(0..m.min(n).max(1));
        let a = random_matrix(&mut rng, m, r, 0.5).mul(&random_matrix(&mut rng, r, n, 0.5)).map_err(|e| e.to_string())?;
        let x = generalized_inverse(&a);
        failures += (a.mul(&x).and_then(|ax| ax.mul(&a)).ok() != Some(a.clone())) as u32;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(failures == 0, || format!("{failures} failures"))?;
    ensure(secs < 30.0, || format!("took {secs:.1} s"))?;
    Ok(format!("200 exhaustive systems, 500 generalized inverses, {secs:.2} s"))
}

fn minsum_hand_trace() -> Check {
    let p = DecodingProblem::new("pair", 1, 1, vec![vec![0], vec![0]], vec![vec![0], vec![]], vec![0.2, 0.1])
        .map_err(|e| e.to_string())?;
    let g = TannerGraph::new(&p);
    let leg = run_leg(&g, &BitVec::from_indices(1, &[0]), &llr_priors(p.priors()), &Gamma::Uniform(0.0), 10, true);
    let lam = &leg.marginals;
    ensure(leg.converged && leg.iterations == 1, || format!("converged {} after {}", leg.converged, leg.iterations))?;
    ensure((lam[0] + 0.811).abs() < 1e-3 && (lam[1] - 0.811).abs() < 1e-3, || format!("marginals {lam:?}"))?;
    ensure(leg.correction.to_indices() == vec![0], || format!("correction {}", leg.correction))?;
    Ok(format!("Λ = ({:.3}, {:+.3}), F = 10", lam[0], lam[1]))
}

fn relay_limits() -> Check {
    let gross = RelayConfig::gross(0).max_iterations();
    let cycles = RelayConfig::two_gross(0).max_cycles(2);
    ensure(gross == 18_020, || format!("gross {gross}"))?;
    ensure(cycles == 36_160, || format!("two-gross {cycles}"))?;
    ensure(relay_cycles(80 + 299 * 60, 2) == 36_040, || "alpha billing".into())?;
    Ok(format!("{gross} iterations, {cycles} cycles"))
}

fn standard_osd_constant() -> Check {
    let c = standard_osd_cycles(936, 8784);
    ensure(c == 20_376, || format!("{c}"))?;
    Ok(format!("{c}"))
}

fn resource_formulas() -> Check {
    let brams = h_storage_brams(936, 8784);
    let urams = h_storage_urams(2736, 26208);
    ensure(brams == 234, || format!("gross H {brams} BRAM"))?;
    ensure(urams == 266, || format!("two-gross H {urams} URAM"))?;
    let dev = DeviceProfile::vu19p();
    let est = estimate_osd_resources(&OsdParams::new(936, 8784), &dev);
    let u = utilization(&est.total, &dev);
    let got = [u.ffs, u.luts, u.brams, u.urams];
    let table = [9.0, 19.0, 14.0, 0.0];
    ensure(got.iter().zip(table).all(|(g, t)| (g - t).abs() <= 5.0), || format!("utilization {got:?}"))?;
    Ok(format!("{brams} BRAM, {urams} URAM, filtered OSD {:.1}/{:.1}/{:.1}/{:.1} %", got[0], got[1], got[2], got[3]))
}

fn realtime_arithmetic() -> Check {
    let model = |eps| LatencyModel::new(600, 6000, 1000, eps, 10).map_err(|e| e.to_string());
    let v = tail_verdict(&model(5e-5)?);
    ensure(v.slowdown_bound <= 1.62 && (v.slowdown_bound - 1.614).abs() < 0.005, || format!("{}", v.slowdown_bound))?;
    let zero = tail_verdict(&model(0.0)?).slowdown_bound;
    ensure(zero == 1.6, || format!("eps = 0 gives {zero}"))?;
    Ok(format!("bound {:.4}, eps = 0 bound {zero}", v.slowdown_bound))
}

fn backlog_dominance() -> Check {
    // Student t, 19 degrees of freedom, one-sided 99%.
    const T19_99: f64 = 2.539;
    const SEEDS: u64 = 20;
    const LAYERS: u64 = 100_000;
    let start = Instant::now();
    let mut worst = f64::NEG_INFINITY;
    let mut points = 0;
    for eps in [1e-4, 1e-3, 5e-3] {
        for c in [1u64, 5, 10] {
            for l in [2u64, 5, 10] {
                let m = LatencyModel::new(600, 600 + 400 * l, 1000, eps, c).map_err(|e| e.to_string())?;
                let v = tail_verdict(&m);
                ensure(v.l == l && v.gamma <= 0.5 + 1e-12, || format!("grid point eps {eps} C {c} L {l}"))?;
                let means: Vec<f64> = (0..SEEDS)
                    .map(|s| simulate_backlog(&m, LAYERS, s.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ points))
                    .map(|r| r.mean_slowdown)
                    .collect();
                let mean = means.iter().sum::<f64>() / SEEDS as f64;
                let var = means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (SEEDS - 1) as f64;
                let lower = mean - T19_99 * (var / SEEDS as f64).sqrt();
                ensure(lower <= v.slowdown_bound, || {
                    format!("eps {eps} C {c} L {l}: mean {mean:.5} exceeds bound {:.5}", v.slowdown_bound)
                })?;
                worst = worst.max(mean - v.slowdown_bound);
                points += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 300.0, || format!("took {secs:.0} s"))?;
    Ok(format!("{points} points, worst mean - bound = {worst:.5}, {secs:.1} s"))
}

fn soundness_config(problem: ProblemSpec, decoder: DecoderSpec) -> RunConfig {
    let predecoder = decoder.is_post_processor().then(PredecoderSpec::default);
    RunConfig { trials: 10_000, seed: 2024, budgets: vec![], cutoff: None, problem, predecoder, decoder, device: None }
}

fn monotone(records: &[TrialRecord]) -> Result<(), String> {
    let sums = summaries(records);
    let max = sums.iter().map(|s| s.cycles).max().unwrap_or(0);
    let mut budgets: Vec<u64> = (0..=64).map(|i| i * (max + 1) / 64).collect();
    budgets.push(u64::MAX);
    for post_only in [false, true] {
        let curve = cutoff_curve(&sums, &budgets, post_only).map_err(|e| e.to_string())?;
        ensure(curve.windows(2).all(|w| w[0].rate >= w[1].rate), || "curve not monotone".into())?;
    }
    Ok(())
}

fn cluster_clusters(problem: &DecodingProblem, trials: u64) -> Result<(), String> {
    // The same pipeline the harness runs, keeping the final clusters.
    let dec = ClusterDecoder::new(problem, UfConfig::default()).map_err(|e| e.to_string())?;
    let graph = TannerGraph::new(problem);
    let priors = llr_priors(problem.priors());
    let pre = PredecoderSpec::default();
    for t in 0..trials {
        let f = problem.sample_faults(&mut trial_rng(2024, t));
        let s = problem.syndrome(&f);
        let leg = run_leg(&graph, &s, &priors, &Gamma::Uniform(pre.gamma), pre.iterations, true);
        if leg.converged {
            continue;
        }
        let llrs = run_leg(&graph, &s, &priors, &Gamma::Uniform(0.0), pre.refresh_iterations, false).marginals;
        let out = dec.decode(&s, &llrs).map_err(|e| e.to_string())?;
        ensure(pairwise_disjoint(&out.clusters), || format!("trial {t}: overlapping clusters"))?;
        if out.failure.is_none() {
            ensure(out.clusters.iter().all(|c| c.valid), || format!("trial {t}: invalid cluster left"))?;
        }
    }
    Ok(())
}

fn soundness() -> Check {
    let problems = [
        ("repetition d=5", ProblemSpec::Repetition { d: 5, p: 0.01 }),
        ("bb72", ProblemSpec::Bb { code: Some("bb72".into()), l: None, m: None, a_terms: vec![], b_terms: vec![], p: 0.02 }),
    ];
    let decoders = [
        DecoderSpec::Bp { max_iterations: 100, gamma: 0.0 },
        DecoderSpec::FilteredOsd(OsdSettings::default()),
        DecoderSpec::Cluster(Default::default()),
    ];
    let mut summary = Vec::new();
    for (name, problem) in &problems {
        for decoder in &decoders {
            let cfg = soundness_config(problem.clone(), decoder.clone());
            // run_trial asserts that every success explains its syndrome.
            let (p, records) = std::panic::catch_unwind(|| run_config(&cfg, Path::new(".")))
                .map_err(|_| format!("{name}/{}: a success missed its syndrome", decoder.id()))?
                .map_err(|e| e.to_string())?;
            for r in &records {
                if let (None, Some(c)) = (r.outcome.failure_kind, &r.outcome.correction) {
                    let s = p.syndrome(&p.sample_faults(&mut trial_rng(cfg.seed, r.trial)));
                    ensure(p.explains(c, &s), || format!("{name}/{}: trial {}", decoder.id(), r.trial))?;
                }
            }
            monotone(&records)?;
            if matches!(decoder, DecoderSpec::Cluster(_)) {
                cluster_clusters(&p, cfg.trials)?;
            }
            let failures = records.iter().filter(|r| r.is_failure()).count();
            summary.push(format!("{name}/{} {failures}", decoder.id()));
        }
    }
    Ok(format!("failures per 10^4: {}", summary.join(", ")))
}

/// Extended-graph instances with at most 40 nodes.
fn cluster_validity_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut mismatches = 0;
    let mut valid = 0;
    let cfg = UfConfig { solver_sizes: vec![(64, 64)], ..UfConfig::default() };
    for _ in 0..500 {
        let m = rng.random_range(2..=14);
        let n = rng.random_range(2..=(40 - m).min(24));
        let h: Vec<Vec<usize>> = (0..n)
            .map(|_| {
                let mut c: Vec<usize> = (0..m).filter(|_| rng.random::<f64>() < 0.25).collect();
                if c.is_empty() {
                    c.push(rng.random_range(0..m));
                }
                c
            })
            .collect();
        let p = DecodingProblem::new("random", m, 0, h, vec![vec![]; n], vec![0.05; n]).map_err(|e| e.to_string())?;
        let adj = ExtendedAdjacency::new(&p);
        let density = rng.random_range(0.2..0.9);
        let bitmap = random_bits(&mut rng, m + n, density);
        let interior = adj.interior(&bitmap);
        let sigma = random_bits(&mut rng, m, 0.5);
        // Enumerate every subset of interior faults against the enclosed checks.
        let rows: Vec<usize> = (0..m).filter(|&i| bitmap.get(i)).collect();
        let cols = interior.to_indices();
        let target = rows.iter().enumerate().fold(0u64, |acc, (k, &i)| acc | (sigma.get(i) as u64) << k);
        let masks: Vec<u64> = cols
            .iter()
            .map(|&j| rows.iter().enumerate().fold(0u64, |acc, (k, &i)| acc | (p.h_columns()[j].contains(&i) as u64) << k))
            .collect();
        let expect = (0u64..1 << cols.len()).any(|sel| {
            masks.iter().enumerate().filter(|(c, _)| sel >> c & 1 == 1).fold(0, |acc, (_, &b)| acc ^ b) == target
        });
        let c = Cluster { bitmap, interior, in_use: true, valid: false, merged: false };
        let got = check_validity(&c, &p, &sigma, &cfg).verdict == Validity::Valid;
        mismatches += (got != expect) as u32;
        valid += expect as u32;
    }
    ensure(mismatches == 0, || format!("{mismatches} mismatches"))?;
    Ok(format!("500 clusters, {valid} valid, 0 mismatches"))
}

fn bp_exact_rate() -> Check {
    let (d, p) = (5usize, 0.01);
    let problem = repetition(d, p).map_err(|e| e.to_string())?;
    // Bitwise MAP: each bit is set when its posterior given the syndrome
    // exceeds one half; the exact failure rate sums over all 2^d patterns.
    let patterns: Vec<(BitVec, f64)> = (0..1u32 << d)
        .map(|w| {
            let f = BitVec::from_bools(&(0..d).map(|i| w >> i & 1 == 1).collect::<Vec<_>>());
            let k = f.count_ones() as i32;
            (f, p.powi(k) * (1.0 - p).powi(d as i32 - k))
        })
        .collect();
    let mut exact = 0.0;
    for (truth, prob) in &patterns {
        let s = problem.syndrome(truth);
        let coset: Vec<&(BitVec, f64)> = patterns.iter().filter(|(f, _)| problem.syndrome(f) == s).collect();
        let z: f64 = coset.iter().map(|(_, q)| q).sum();
        let guess = BitVec::from_bools(
            &(0..d).map(|j| coset.iter().filter(|(f, _)| f.get(j)).map(|(_, q)| q).sum::<f64>() / z > 0.5).collect::<Vec<_>>(),
        );
        if !problem.explains(&guess, &s) || problem.is_logical_failure(truth, &guess) {
            exact += prob;
        }
    }
    let cfg = soundness_config(ProblemSpec::Repetition { d, p }, DecoderSpec::Bp { max_iterations: 100, gamma: 0.0 });
    let h = Harness::new(&problem, &cfg).map_err(|e| e.to_string())?;
    let records = h.run_trials(cfg.seed, cfg.trials);
    let k = records.iter().filter(|r| r.is_failure()).count() as u64;
    let (lo, hi) = wilson(k, cfg.trials, Z95);
    ensure(lo <= exact && exact <= hi, || format!("exact {exact:.3e} outside [{lo:.3e}, {hi:.3e}] ({k} failures)"))?;
    Ok(format!("exact {exact:.3e}, harness {k}/10^4, CI [{lo:.2e}, {hi:.2e}]"))
}

fn main() {
    let checks: [Criterion; 13] = [
        ("systolic oracle equivalence", systolic_oracle),
        ("systolic cycle formulas", cycle_formulas),
        ("worked H vector", h_vector),
        ("gf2 core", gf2_suite),
        ("min-sum hand trace", minsum_hand_trace),
        ("relay parameters", relay_limits),
        ("standard OSD cycle constant", standard_osd_constant),
        ("resource formulas", resource_formulas),
        ("real-time arithmetic", realtime_arithmetic),
        ("backlog bound dominance", backlog_dominance),
        ("decoder soundness", soundness),
        ("cluster validity oracle", cluster_validity_oracle),
        ("BP exact rate", bp_exact_rate),
    ];
    // Filters from the test runner select checks by name substring.
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in checks {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
