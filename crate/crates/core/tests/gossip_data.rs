use std::f64::consts::PI;

use proptest::prelude::*;

use pmgt_core::gossip::{
    build_lazy_ring, build_random_two_neighbor, contraction_bound, fast_mix, min_rounds_for_rho,
};
use pmgt_core::problems::{gen_bernoulli_matrix, load_libsvm, DataMatrix};
use pmgt_core::{AgentMatrix, GossipMatrix};

#[test]
fn lazy_ring_second_eigenvalue_matches_circulant_formula() {
    for m in 3..=32 {
        for c in [0.5, 0.6, 0.9] {
            let w = build_lazy_ring(m, c).unwrap();
            let closed = c + (1.0 - c) * (2.0 * PI / m as f64).cos();
            assert!((w.lambda2() - closed).abs() < 1e-10, "m={m} c={c}");
        }
    }
}

#[test]
fn invalid_matrices_are_rejected() {
    // not symmetric
    assert!(GossipMatrix::new(2, vec![0.6, 0.4, 0.5, 0.5]).is_err());
    // rows do not sum to one
    assert!(GossipMatrix::new(2, vec![0.6, 0.3, 0.3, 0.6]).is_err());
    // negative eigenvalue
    assert!(GossipMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).is_err());
    // disconnected
    assert!(GossipMatrix::new(2, vec![1.0, 0.0, 0.0, 1.0]).is_err());
    assert!(build_lazy_ring(5, 0.3).is_err());
    assert!(build_random_two_neighbor(2, 0).is_err());
}

#[test]
fn rounds_for_target_are_minimal() {
    for lambda2 in [0.0, 0.3, 0.8415, 0.99] {
        let m = min_rounds_for_rho(lambda2, 0.1).unwrap();
        assert!(contraction_bound(lambda2, m).unwrap() <= 0.1);
        if m > 0 {
            assert!(contraction_bound(lambda2, m - 1).unwrap() > 0.1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fast_mix_keeps_average_and_contracts(
        m in 3usize..12,
        seed in 0u64..1000,
        rounds in 0usize..25,
        values in prop::collection::vec(-5.0f64..5.0, 36),
    ) {
        let w = build_random_two_neighbor(m, seed).unwrap();
        let d = 3;
        let x = AgentMatrix::from_vec(m, d, values[..m * d].to_vec()).unwrap();
        let out = fast_mix(&x, &w, rounds).unwrap();
        for (a, b) in out.row_mean().iter().zip(x.row_mean()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        let bound = contraction_bound(w.lambda2(), rounds).unwrap();
        prop_assert!(out.consensus_error() <= bound * x.consensus_error() + 1e-12);
    }

    #[test]
    fn consensual_input_is_a_fixed_point(m in 2usize..10, rounds in 0usize..10, v in -3.0f64..3.0) {
        let w = build_lazy_ring(m, 0.5).unwrap();
        let x = AgentMatrix::broadcast(m, &[v, -v]);
        let out = fast_mix(&x, &w, rounds).unwrap();
        prop_assert!(out.max_abs_diff(&x) <= 1e-12);
    }
}

#[test]
fn bernoulli_data_is_signed_and_seeded() {
    let a = gen_bernoulli_matrix(100, 7, 3).unwrap();
    assert_eq!(a, gen_bernoulli_matrix(100, 7, 3).unwrap());
    assert_ne!(a, gen_bernoulli_matrix(100, 7, 4).unwrap());
    assert!(a.entries().iter().all(|&v| v == 1.0 || v == -1.0));
    let mean = a.entries().iter().sum::<f64>() / a.entries().len() as f64;
    assert!(mean.abs() < 0.1);
}

#[test]
fn libsvm_file_and_cache_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.libsvm");
    std::fs::write(&path, "+1 1:0.5 3:-2\n-1 2:1.5\n+1 1:1 2:1 3:1\n").unwrap();
    let data = load_libsvm(&path, None, None).unwrap();
    assert_eq!((data.rows(), data.cols()), (3, 3));
    assert_eq!(data.row(0), &[0.5, 0.0, -2.0]);
    assert_eq!(data.row(1), &[0.0, 1.5, 0.0]);

    let capped = load_libsvm(&path, Some(2), Some(2)).unwrap();
    assert_eq!((capped.rows(), capped.cols()), (2, 2));

    let cache = dir.path().join("tiny.bin");
    data.write_cache(&cache).unwrap();
    assert_eq!(DataMatrix::read_cache(&cache).unwrap(), data);
    assert!(load_libsvm(dir.path().join("missing"), None, None).is_err());
}
