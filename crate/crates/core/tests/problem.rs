use proptest::prelude::*;
use rtdec_core::problem::{bivariate_bicycle, phenomenological, repetition, trial_rng, BbSpec};
use rtdec_core::{BitVec, DecodingProblem, Gf2Matrix};

#[test]
fn repetition_d3_layout() {
    let p = repetition(3, 0.1).unwrap();
    assert_eq!(p.h_matrix(), Gf2Matrix::from_dense(&[[1u8, 1, 0], [0, 1, 1]]));
    assert_eq!(p.a_matrix(), Gf2Matrix::from_dense(&[[1u8, 1, 1]]));
    assert!(repetition(2, 0.1).is_err());
}

#[test]
fn logical_failure_examples() {
    let p = repetition(3, 0.1).unwrap();
    let truth = BitVec::from_indices(3, &[0]);
    assert!(!p.is_logical_failure(&truth, &truth));
    assert!(p.is_logical_failure(&truth, &BitVec::from_indices(3, &[1, 2])));
}

#[test]
fn gross_code_dimension_from_dense_ranks() {
    let code = bivariate_bicycle(BbSpec::gross()).unwrap();
    assert_eq!(code.n(), 144);
    let k = code.n() - code.hx.rank() - code.hz.rank();
    assert_eq!(k, 12);
    assert_eq!(code.k(), 12);
    assert!(code.hx.mul(&code.hz.transpose()).unwrap().is_zero());
    let p = code.decoding_problem(0.01).unwrap();
    assert_eq!((p.m(), p.n(), p.k()), (72, 144, 12));
}

#[test]
fn trivial_bicycle_is_one_by_two() {
    let spec = BbSpec { l: 1, m: 1, a_terms: vec![(0, 0)], b_terms: vec![(0, 0)] };
    let code = bivariate_bicycle(spec).unwrap();
    assert_eq!(code.hz, Gf2Matrix::from_dense(&[[1u8, 1]]));
}

#[test]
fn two_gross_commutes() {
    let code = bivariate_bicycle(BbSpec::two_gross()).unwrap();
    assert_eq!(code.n(), 288);
    assert!(code.hx.mul(&code.hz.transpose()).unwrap().is_zero());
    assert_eq!(code.k(), 12);
}

#[test]
fn measurement_columns_touch_their_difference_rows() {
    let base = repetition(3, 0.1).unwrap();
    let p = phenomenological(&base, 2, 0.05).unwrap();
    assert_eq!(p.n(), 2 * 3 + 2 * 2);
    assert_eq!(p.m(), 4);
    let meas = &p.h_columns()[6..];
    assert_eq!(meas, &[vec![0, 2], vec![1, 3], vec![2], vec![3]]);
}

#[test]
fn empirical_fault_rates_within_five_sigma() {
    let p = DecodingProblem::new("rates", 1, 0, vec![vec![0]; 4], vec![vec![]; 4], vec![0.0, 0.02, 0.3, 1.0]).unwrap();
    let trials = 10_000;
    let mut counts = [0u32; 4];
    for t in 0..trials {
        let f = p.sample_faults(&mut trial_rng(5, t));
        for (j, c) in counts.iter_mut().enumerate() {
            *c += f.get(j) as u32;
        }
    }
    for (j, &c) in counts.iter().enumerate() {
        let q = p.priors()[j];
        let sd = (q * (1.0 - q) / trials as f64).sqrt();
        assert!((c as f64 / trials as f64 - q).abs() <= 5.0 * sd + 1e-12);
    }
    assert_eq!(counts[0], 0);
    assert_eq!(counts[3], trials as u32);
}

proptest! {
    #[test]
    fn syndrome_matches_column_accumulation(seed in any::<u64>()) {
        let code = bivariate_bicycle(BbSpec::bb72()).unwrap();
        let p = code.decoding_problem(0.05).unwrap();
        let f = p.sample_faults(&mut trial_rng(seed, 0));
        let mut s = vec![false; p.m()];
        for j in f.iter_ones() {
            for &i in &p.h_columns()[j] {
                s[i] ^= true;
            }
        }
        prop_assert_eq!(p.syndrome(&f), BitVec::from_bools(&s));
        let again = p.sample_faults(&mut trial_rng(seed, 0));
        prop_assert_eq!(again, f);
    }
}
