use std::time::Instant;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rtdec_core::gf2::{lifted_gauss_jordan, solve, ForwardEliminator, Inserted};
use rtdec_core::systolic::{
    self, forward_iterations, full_iterations, run_forward, run_full, run_solver, solver_cycles, SolverTiming,
};
use rtdec_core::{BitVec, Gf2Matrix};

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

fn forward_oracle(a: &Gf2Matrix, b: &Gf2Matrix) -> (Gf2Matrix, Gf2Matrix) {
    let (n, l) = (a.ncols(), b.ncols());
    let mut fe = ForwardEliminator::with_spectators(n, l);
    let mut residual = Gf2Matrix::zeros(a.nrows(), l);
    let ab = a.hstack(b).unwrap();
    for i in 0..a.nrows() {
        if let Inserted::Residual(r) = fe.insert(ab.row(i).clone()) {
            *residual.row_mut(i) = r;
        }
    }
    (fe.to_matrix(), residual)
}

#[test]
fn thousand_random_instances_match_elimination() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let m = rng.random_range(1..=12);
        let n = rng.random_range(1..=12);
        let l = rng.random_range(0..=4);
        let density = rng.random_range(0.1..0.9);
        let a = random_matrix(&mut rng, m, n, density);
        let b = random_matrix(&mut rng, m, l, 0.5);

        let fwd = run_forward(&a, &b, false).unwrap();
        let (stored, residual) = forward_oracle(&a, &b);
        assert_eq!(fwd.matrix, stored);
        assert_eq!(fwd.residual, residual);
        assert_eq!(fwd.iterations, forward_iterations(n as u64, m as u64, l as u64));

        let full = run_full(&a, &b, false).unwrap();
        let e = lifted_gauss_jordan(&a, &b).unwrap();
        assert_eq!(full.matrix, e.matrix);
        assert_eq!(full.pivot_mask, e.pivot_mask);
        assert_eq!(full.residual, e.residual);
        assert_eq!(full.iterations, full_iterations(n as u64, m as u64, l as u64));
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn solver_billing_follows_solvability() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut seen_solvable, mut seen_unsolvable) = (0, 0);
    for _ in 0..500 {
        let m = rng.random_range(1..=10);
        let n = rng.random_range(1..=10);
        let a = random_matrix(&mut rng, m, n, 0.4);
        let y = BitVec::from_bools(&(0..m).map(|_| rng.random::<bool>()).collect::<Vec<_>>());
        let run = run_solver(&a, &y, SolverTiming::Compact).unwrap();
        let oracle = solve(&a, &y).unwrap();
        assert_eq!(run.report.solvable, oracle.solvable);
        assert_eq!(run.cycles, solver_cycles(n as u64, m as u64, oracle.solvable));
        if oracle.solvable {
            seen_solvable += 1;
            assert_eq!(a.mul_vec(run.report.solution.as_ref().unwrap()).unwrap(), y);
        } else {
            seen_unsolvable += 1;
            assert!(run.detection_iteration.is_some());
        }
    }
    assert!(seen_solvable > 50 && seen_unsolvable > 50);
}

#[test]
fn padded_solver_bills_the_padded_width() {
    let a = Gf2Matrix::from_dense(&[[1u8, 0], [1, 1], [0, 1]]);
    let y = BitVec::parse("111").unwrap();
    let run = run_solver(&a, &y, SolverTiming::Padded(6)).unwrap();
    assert!(!run.report.solvable);
    assert_eq!(run.cycles, solver_cycles(6, 3, false));
    let y = BitVec::parse("110").unwrap();
    let run = run_solver(&a, &y, SolverTiming::Padded(6)).unwrap();
    assert!(run.report.solvable);
    assert_eq!(run.cycles, solver_cycles(6, 3, true));
    assert_eq!(run.report.solution.unwrap().len(), 2);
}

#[test]
fn reads_stay_local_and_are_counted() {
    let a = Gf2Matrix::from_dense(&[[1u8, 1, 0], [0, 1, 1], [1, 0, 1]]);
    let b = Gf2Matrix::identity(3);
    let run = run_full(&a, &b, true).unwrap();
    assert!(run.reads > 0);
    let trace = run.trace.unwrap();
    assert_eq!(trace.len() as u64, run.iterations);
    assert_eq!(run.readout_cycles, 3);
}

#[test]
fn worked_h_vector() {
    let out = systolic::line::run_h_example(&BitVec::parse("10110").unwrap(), &BitVec::parse("10101").unwrap()).unwrap();
    assert_eq!(out.to_string(), "00011");
}

proptest! {
    #[test]
    fn full_run_is_deterministic(seed in any::<u64>(), m in 1usize..8, n in 1usize..8, l in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, m, n, 0.5);
        let b = random_matrix(&mut rng, m, l, 0.5);
        let r1 = run_full(&a, &b, true).unwrap();
        let r2 = run_full(&a, &b, true).unwrap();
        prop_assert_eq!(r1, r2);
    }

    #[test]
    fn pivot_count_is_rank(seed in any::<u64>(), m in 1usize..10, n in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, m, n, 0.3);
        let run = run_forward(&a, &Gf2Matrix::zeros(m, 0), false).unwrap();
        prop_assert_eq!(run.pivot_mask.count_ones(), a.rank());
    }
}
