use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn small_instance(m: usize, n: usize, d: usize, r: f64) -> ProblemInstance {
    let data = gen_bernoulli_matrix(m * n, d, 5).unwrap();
    make_shift_invert_pca(data, m, r, 9, RegularizerSpec::None).unwrap()
}

fn random_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum::<f64>().sqrt()
}

#[test]
fn scalar_shift_invert() {
    let data = DataMatrix::new(1, 1, vec![1.0]).unwrap();
    let inst = make_shift_invert_pca(data, 1, 1.0, 3, RegularizerSpec::None).unwrap();
    let q = inst.quadratic_data().unwrap();
    assert!((q.shift() - 2.0).abs() < 1e-15);
    let b = q.linear()[0];
    assert_eq!(b.abs(), 1.0);
    let x = inst.closed_form_minimizer().unwrap();
    assert!((x[0] + b).abs() < 1e-14);
    // F(x) = x^2 / 2 + b x
    let f = inst.objective_value(&[0.7]).unwrap();
    assert!((f - (0.5 * 0.49 + 0.7 * b)).abs() < 1e-15);
}

#[test]
fn degenerate_gap_rejected() {
    // identical rows: A = a a^T has eigenvalues {2, 0}; fine. A multiple of the
    // identity has no gap.
    let data = DataMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
    let err = make_shift_invert_pca(data, 1, 2.0, 0, RegularizerSpec::None).unwrap_err();
    assert!(matches!(err, Error::DegenerateEigengap { .. }));
}

#[test]
fn uneven_sharding_rejected() {
    let data = gen_bernoulli_matrix(10, 3, 1).unwrap();
    assert!(make_shift_invert_pca(data, 3, 2.0, 0, RegularizerSpec::None).is_err());
}

#[test]
fn ratio_only_changes_shift() {
    let data = gen_bernoulli_matrix(256, 6, 17).unwrap();
    let a = shift_invert_quadratic(data.clone(), 4, 2.0, 1).unwrap();
    let b = shift_invert_quadratic(data, 4, 300.0, 1).unwrap();
    assert_eq!(a.second_moment(), b.second_moment());
    assert_eq!(a.linear(), b.linear());
    assert!(a.shift() > b.shift());
    let (ca, cb) = (a.smoothness_constants(), b.smoothness_constants());
    assert!(ca.sigma_f > cb.sigma_f);
    assert!(ca.l_smooth / ca.sigma_f < cb.l_smooth / cb.sigma_f);
}

#[test]
fn sigma_f_is_gap_over_r() {
    let data = gen_bernoulli_matrix(512, 8, 3).unwrap();
    for r in [1.0, 2.0, 10.0, 300.0] {
        let q = shift_invert_quadratic(data.clone(), 8, r, 0).unwrap();
        let (l1, l2) = top_two_eigenvalues(&q);
        let c = q.smoothness_constants();
        assert!((c.sigma_f - (l1 - l2) / r).abs() < 1e-12, "r={r}");
        // eigensolver on the Hessian itself
        let h = q.hessian();
        let eig = nalgebra::SymmetricEigen::new(h).eigenvalues;
        let hmin = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        let hmax = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((c.sigma_f - hmin).abs() < 1e-10);
        assert!((c.l_smooth - hmax).abs() < 1e-10);
        assert!(c.l_smooth <= c.ell1);
        assert!(c.ell2 >= c.ell1 && c.ell1 > 0.0);
    }
}

#[test]
fn zero_data_constants() {
    let data = DataMatrix::new(4, 3, vec![0.0; 12]).unwrap();
    let q = ShardedQuadratic::new(data, 2, 1.0, vec![0.0; 3]).unwrap();
    let c = q.smoothness_constants();
    assert_eq!(
        (c.l_smooth, c.ell1, c.ell2, c.sigma_f),
        (1.0, 1.0, 1.0, 1.0)
    );
}

#[test]
fn component_hessian_spectrum() {
    let data = DataMatrix::new(1, 3, vec![1.0, 2.0, -1.0]).unwrap();
    let q = ShardedQuadratic::new(data, 1, 1.5, vec![0.0; 3]).unwrap();
    let eig = nalgebra::SymmetricEigen::new(q.local_hessian(0)).eigenvalues;
    let mut e: Vec<f64> = eig.iter().cloned().collect();
    e.sort_by(f64::total_cmp);
    // {c - |a|^2, c, c}
    assert!((e[0] - (1.5 - 6.0)).abs() < 1e-12);
    assert!((e[1] - 1.5).abs() < 1e-12 && (e[2] - 1.5).abs() < 1e-12);
    let c = q.smoothness_constants();
    assert_eq!(c.ell1, 1.5);
    assert_eq!(c.ell2, 4.5);
}

#[test]
fn gradients_at_origin_equal_linear_term() {
    let inst = small_instance(4, 8, 5, 2.0);
    let b = inst.quadratic_data().unwrap().linear().to_vec();
    let zero = vec![0.0; 5];
    assert_eq!(inst.component_grad(1, 3, &zero).unwrap(), b);
    assert_eq!(inst.local_full_grad(2, &zero).unwrap(), b);
    assert_eq!(inst.global_grad(&zero).unwrap(), b);
}

#[test]
fn component_gradient_formula() {
    let inst = small_instance(2, 4, 3, 2.0);
    let q = inst.quadratic_data().unwrap();
    let x = [0.3, -1.0, 2.0];
    let a = q.data().row(5);
    let ax: f64 = a.iter().zip(&x).map(|(p, v)| p * v).sum();
    let expected: Vec<f64> = (0..3)
        .map(|k| q.shift() * x[k] - a[k] * ax + q.linear()[k])
        .collect();
    let got = inst.component_grad(1, 1, &x).unwrap();
    for (g, e) in got.iter().zip(&expected) {
        assert!((g - e).abs() < 1e-14);
    }
}

#[test]
fn index_checks() {
    let inst = small_instance(2, 4, 3, 2.0);
    let x = [0.0; 3];
    assert!(matches!(
        inst.component_grad(2, 0, &x),
        Err(Error::IndexOutOfRange(_))
    ));
    assert!(matches!(
        inst.component_grad(0, 4, &x),
        Err(Error::IndexOutOfRange(_))
    ));
    assert!(matches!(
        inst.local_full_grad(5, &x),
        Err(Error::IndexOutOfRange(_))
    ));
    assert!(matches!(
        inst.global_grad(&[0.0; 2]),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn local_gradients_average_to_global() {
    let inst = small_instance(8, 16, 6, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let x = random_point(&mut rng, 6);
        let g = inst.global_grad(&x).unwrap();
        let mut avg = [0.0; 6];
        for i in 0..8 {
            for (a, v) in avg.iter_mut().zip(inst.local_full_grad(i, &x).unwrap()) {
                *a += v / 8.0;
            }
        }
        for (a, b) in avg.iter().zip(&g) {
            assert!((a - b).abs() < 1e-10);
        }
        // local gradient equals the average of its components
        let mut comp = [0.0; 6];
        for j in 0..16 {
            for (a, v) in comp.iter_mut().zip(inst.component_grad(3, j, &x).unwrap()) {
                *a += v / 16.0;
            }
        }
        for (a, b) in comp.iter().zip(&inst.local_full_grad(3, &x).unwrap()) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn hessian_is_average_of_component_hessians() {
    let inst = small_instance(4, 8, 4, 3.0);
    let q = inst.quadratic_data().unwrap();
    let mut avg = nalgebra::DMatrix::zeros(4, 4);
    for i in 0..4 {
        avg += q.local_hessian(i) / 4.0;
    }
    assert!((avg - q.hessian()).amax() < 1e-10);
}

#[test]
fn finite_difference_gradient() {
    let inst = small_instance(4, 8, 5, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-5;
    for _ in 0..20 {
        let x = random_point(&mut rng, 5);
        let g = inst.global_grad(&x).unwrap();
        for k in 0..5 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let fd = (inst.objective_value(&xp).unwrap() - inst.objective_value(&xm).unwrap())
                / (2.0 * h);
            assert!(
                (fd - g[k]).abs() <= 1e-5 * (1.0 + g[k].abs()),
                "fd {fd} vs {}",
                g[k]
            );
        }
    }
}

#[test]
fn closed_form_simple_cases() {
    let data = DataMatrix::new(2, 2, vec![0.0; 4]).unwrap();
    let q = ShardedQuadratic::new(data, 1, 2.0, vec![-4.0, 0.0]).unwrap();
    let inst = ProblemInstance::quadratic(q, RegularizerSpec::None).unwrap();
    let x = inst.closed_form_minimizer().unwrap();
    assert!((x[0] - 2.0).abs() < 1e-15 && x[1].abs() < 1e-15);

    let inst = small_instance(4, 16, 6, 5.0);
    let x = inst.closed_form_minimizer().unwrap();
    let g = inst.global_grad(&x).unwrap();
    assert!(norm(&g) <= 1e-10 * norm(inst.quadratic_data().unwrap().linear()));
}

#[test]
fn closed_form_rejects_l1_and_indefinite() {
    let inst = small_instance(2, 4, 3, 2.0);
    let l1 = ProblemInstance::quadratic(
        inst.quadratic_data().unwrap().clone(),
        RegularizerSpec::L1 { lambda: 0.1 },
    )
    .unwrap();
    assert!(matches!(
        l1.closed_form_minimizer(),
        Err(Error::Unsupported(_))
    ));
    let data = DataMatrix::new(1, 2, vec![2.0, 0.0]).unwrap();
    let q = ShardedQuadratic::new(data, 1, 1.0, vec![1.0, 1.0]).unwrap();
    let bad = ProblemInstance::quadratic(q, RegularizerSpec::None).unwrap();
    assert!(matches!(
        bad.closed_form_minimizer(),
        Err(Error::NotPositiveDefinite)
    ));
}

#[test]
fn epsilon_regularization() {
    let inst = small_instance(4, 16, 6, 2.0);
    assert!(inst.regularize_epsilon(0.0).is_err());
    let reg = inst.regularize_epsilon(1.0).unwrap();
    assert_eq!(reg.regularizer().sigma_psi(), 1.0);
    assert!((reg.sigma().unwrap() - (inst.sigma().unwrap() + 1.0)).abs() < 1e-15);
    // smooth gradient unchanged; the eps term lives in psi
    let x = [0.5, -0.2, 0.1, 0.0, 1.0, 2.0];
    assert_eq!(reg.global_grad(&x).unwrap(), inst.global_grad(&x).unwrap());
    let xx: f64 = x.iter().map(|v| v * v).sum();
    let diff = reg.objective_value(&x).unwrap() - inst.objective_value(&x).unwrap();
    assert!((diff - 0.5 * xx).abs() < 1e-12);

    let x_star = inst.closed_form_minimizer().unwrap();
    let drift = |eps: f64| {
        let xe = inst
            .regularize_epsilon(eps)
            .unwrap()
            .closed_form_minimizer()
            .unwrap();
        norm(
            &xe.iter()
                .zip(&x_star)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        )
    };
    let (d2, d4) = (drift(1e-2), drift(1e-4));
    assert!(d4 < d2 && d4 < 1e-2 * d2 * 1.5, "drift {d2} -> {d4}");
}

#[test]
fn single_shard_preserves_objective() {
    let inst = small_instance(4, 8, 5, 2.0);
    let one = inst.single_shard().unwrap();
    assert_eq!((one.m(), one.n()), (1, 32));
    let x = [0.1, 0.2, -0.3, 0.4, 0.5];
    assert!((one.objective_value(&x).unwrap() - inst.objective_value(&x).unwrap()).abs() < 1e-12);
    assert_eq!(
        one.component_grad(0, 13, &x).unwrap(),
        inst.component_grad(1, 5, &x).unwrap()
    );
    assert_eq!(one.constants(), inst.constants());

    // generic oracle path
    let generic = ProblemInstance::from_oracle(
        std::sync::Arc::new(inst.quadratic_data().unwrap().clone()),
        RegularizerSpec::None,
        inst.constants(),
    )
    .unwrap()
    .single_shard()
    .unwrap();
    assert_eq!(generic.n(), 32);
    let ga = generic.global_grad(&x).unwrap();
    let gb = inst.global_grad(&x).unwrap();
    for (a, b) in ga.iter().zip(&gb) {
        assert!((a - b).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn components_are_ell1_ell2_smooth(seed in 0u64..1000, i in 0usize..4, j in 0usize..8) {
        let inst = small_instance(4, 8, 5, 2.0);
        let c = inst.constants().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_point(&mut rng, 5);
        let y = random_point(&mut rng, 5);
        let gy = inst.component_grad(i, j, &y).unwrap();
        let breg = inst.component_value(i, j, &x).unwrap()
            - inst.component_value(i, j, &y).unwrap()
            - gy.iter().zip(x.iter().zip(&y)).map(|(g, (a, b))| g * (a - b)).sum::<f64>();
        let dist2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
        prop_assert!(breg <= 0.5 * c.ell1 * dist2 + 1e-10);
        prop_assert!(breg >= -0.5 * c.ell2 * dist2 - 1e-10);
    }

    #[test]
    fn objective_is_sigma_strongly_convex(seed in 0u64..1000, eps in 0.0f64..0.5) {
        let base = small_instance(4, 8, 5, 3.0);
        let inst = if eps > 0.0 { base.regularize_epsilon(eps).unwrap() } else { base };
        let sigma = inst.sigma().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_point(&mut rng, 5);
        let y = random_point(&mut rng, 5);
        let mut g = inst.global_grad(&y).unwrap();
        for (gk, yk) in g.iter_mut().zip(&y) {
            *gk += inst.regularizer().sigma_psi() * yk;
        }
        let lhs = inst.objective_value(&x).unwrap() - inst.objective_value(&y).unwrap()
            - g.iter().zip(x.iter().zip(&y)).map(|(g, (a, b))| g * (a - b)).sum::<f64>();
        let dist2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
        prop_assert!(lhs >= 0.5 * sigma * dist2 - 1e-10);
    }
}
