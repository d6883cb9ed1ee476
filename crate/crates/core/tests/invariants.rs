use gramian_rk::adi_ref::{self, AdiState};
use gramian_rk::linalg::{self, c, CMat, RMat, C64};
use gramian_rk::lyapunov::{self, GramianState, SolverConfig};
use gramian_rk::operator::{CsrMatrix, DenseOperator, Operator, SparseOperator};
use gramian_rk::sylvester::{self, SylvesterShiftPair, SylvesterState};
use gramian_rk::tableau::{self, ButcherTableau};
use gramian_rk::{oracle, problems, shifts};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn shift() -> impl Strategy<Value = C64> {
    (0.05f64..3.0, -3.0f64..3.0, any::<bool>()).prop_map(|(re, im, real)| c(re, if real { 0.0 } else { im }))
}

fn rel(a: &CMat, b: &CMat) -> f64 {
    linalg::frobenius(&(a - b)) / linalg::frobenius(b).max(f64::MIN_POSITIVE)
}

fn instance(seed: u64, n: usize, m: usize) -> (RMat, DenseOperator, CMat) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = problems::random_stable(n, &mut rng);
    let b = linalg::to_complex(&problems::random_real(n, m, &mut rng));
    (a.clone(), DenseOperator::new(a).unwrap(), b)
}

fn scale(op: &dyn Operator, st: &GramianState, b: &CMat) -> f64 {
    op.frobenius_norm() * linalg::frobenius(&st.gramian()) + b.norm_squared()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn conforming_schedules_keep_rank_m_residual(
        seed in any::<u64>(),
        m in 1usize..3,
        groups in prop::collection::vec(prop::collection::vec(shift(), 1..4), 1..4),
        omegas in prop::collection::vec(0.2f64..2.0, 4),
    ) {
        let (_, op, b) = instance(seed, 12, m);
        let mut st = GramianState::new(&b);
        let mut cols = 0;
        for (j, mus) in groups.iter().enumerate() {
            let t = tableau::make_dirk_lyapunov(mus).unwrap();
            lyapunov::step_tableau(&op, &mut st, &t, omegas[j], 1e-12, false).unwrap();
            cols += m * mus.len();
            prop_assert_eq!(st.z.ncols(), cols);
            prop_assert_eq!(st.residual_history.len(), j + 1);
            prop_assert!(lyapunov::residual_defect(&op, &st.z, &st.h, &b) <= 1e-10 * scale(&op, &st, &b));
        }
    }

    #[test]
    fn residual_norm_is_spectral_norm_of_residual(seed in any::<u64>(), mus in prop::collection::vec(shift(), 1..5)) {
        let (a, op, b) = instance(seed, 8, 1);
        let mut st = GramianState::new(&b);
        for mu in mus {
            lyapunov::step_one_stage(&op, &mut st, mu).unwrap();
        }
        let ac = linalg::to_complex(&a);
        let p = st.gramian();
        let full = &ac * &p + &p * ac.transpose() + &b * b.adjoint();
        let dense = linalg::spectral_norm(&full);
        prop_assert!((lyapunov::residual_norm(&st) - dense).abs() <= 1e-10 * (1.0 + dense) * scale(&op, &st, &b));
    }

    #[test]
    fn one_stage_matches_adi_at_every_prefix(seed in any::<u64>(), mus in prop::collection::vec(shift(), 1..8)) {
        let (_, op, b) = instance(seed, 10, 1);
        let mut rk = GramianState::new(&b);
        let mut adi = AdiState::new(&b);
        for mu in mus {
            lyapunov::step_one_stage(&op, &mut rk, mu).unwrap();
            adi_ref::adi_step(&op, &mut adi, -mu.inv()).unwrap();
            prop_assert!(rel(&rk.gramian(), &adi.gramian()) <= 1e-10);
        }
    }

    #[test]
    fn merged_dirk_equals_consecutive_steps(seed in any::<u64>(), mus in prop::collection::vec(shift(), 1..5)) {
        let (_, op, b) = instance(seed, 10, 2);
        let mut one = GramianState::new(&b);
        for mu in &mus {
            lyapunov::step_one_stage(&op, &mut one, *mu).unwrap();
        }
        let mut merged = GramianState::new(&b);
        let t = tableau::merge_one_stage_steps(&mus).unwrap();
        lyapunov::step_tableau(&op, &mut merged, &t, 1.0, 1e-12, false).unwrap();
        prop_assert!(rel(&merged.h, &one.h) <= 1e-12);
        prop_assert!(rel(&merged.gramian(), &one.gramian()) <= 1e-12);
    }

    #[test]
    fn realified_double_step_matches_complex_pair(seed in any::<u64>(), re in 0.05f64..3.0, im in 0.1f64..3.0, neg in any::<bool>()) {
        let mu = c(re, if neg { -im } else { im });
        let (_, op, b) = instance(seed, 8, 1);
        let mut cplx = GramianState::new(&b);
        lyapunov::step_one_stage(&op, &mut cplx, mu).unwrap();
        lyapunov::step_one_stage(&op, &mut cplx, mu.conj()).unwrap();
        let mut real = GramianState::new(&b);
        lyapunov::step_real_double(&op, &mut real, mu).unwrap();
        prop_assert!(real.is_real());
        prop_assert!(rel(&real.gramian(), &cplx.gramian()) <= 1e-12);
        prop_assert!(linalg::frobenius(&(&real.h - &cplx.h)) <= 1e-12 * linalg::frobenius(&b));
    }

    #[test]
    fn coupled_and_sequential_stages_agree(seed in any::<u64>(), mus in prop::collection::vec(shift(), 1..4), omega in 0.2f64..2.0) {
        let (a, op, b) = instance(seed, 7, 1);
        let t = tableau::make_dirk_lyapunov(&mus).unwrap();
        let ws = oracle::coupled_stage_solve(&a, &b, &t, omega).unwrap();
        let mut h_coupled = b.clone();
        for (i, beta) in t.beta().iter().enumerate() {
            h_coupled += ws.k.column(i) * (beta * omega);
        }
        let mut st = GramianState::new(&b);
        lyapunov::step_tableau(&op, &mut st, &t, omega, 1e-12, false).unwrap();
        prop_assert!(rel(&st.h, &h_coupled) <= 1e-11);
    }

    #[test]
    fn update_matrix_reproduces_h(seed in any::<u64>(), mus in prop::collection::vec(shift(), 1..4)) {
        let (a, op, b) = instance(seed, 8, 1);
        let t = tableau::make_dirk_lyapunov(&mus).unwrap();
        let m = oracle::multiplicative_update_matrix(&a, &t).unwrap();
        let mut st = GramianState::new(&b);
        lyapunov::step_tableau(&op, &mut st, &t, 1.0, 1e-12, false).unwrap();
        prop_assert!(rel(&st.h, &(m * &b)) <= 1e-10);
    }

    #[test]
    fn equal_spectra_give_equal_update_matrices(seed in any::<u64>(), mus in prop::collection::vec(shift(), 2..4)) {
        let (a, _, _) = instance(seed, 6, 1);
        let mut reversed = mus.clone();
        reversed.reverse();
        let m1 = oracle::multiplicative_update_matrix(&a, &tableau::make_dirk_lyapunov(&mus).unwrap()).unwrap();
        let m2 = oracle::multiplicative_update_matrix(&a, &tableau::make_dirk_lyapunov(&reversed).unwrap()).unwrap();
        prop_assert!(rel(&m1, &m2) <= 1e-11);
    }

    #[test]
    fn stability_function_has_product_form(mus in prop::collection::vec(shift(), 1..5), zr in -5.0f64..-0.01, zi in -5.0f64..5.0) {
        let z = c(zr, zi);
        let t = tableau::make_dirk_lyapunov(&mus).unwrap();
        let r1 = tableau::stability_function(&t, z).unwrap();
        let r2 = tableau::stability_function_from_spectrum(&mus, z);
        prop_assert!((r1 - r2).norm() <= 1e-10 * (1.0 + r2.norm()));
        prop_assert!(r2.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn tableau_text_round_trip(mus in prop::collection::vec(shift(), 1..5)) {
        let t = tableau::make_dirk_lyapunov(&mus).unwrap();
        prop_assert_eq!(ButcherTableau::from_text(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn make_proper_idempotent_and_complete(vals in prop::collection::vec(shift(), 0..8)) {
        let once = shifts::make_proper(&vals);
        prop_assert!(shifts::is_proper(&once.values));
        prop_assert_eq!(&shifts::make_proper(&once.values), &once);
        for v in &vals {
            prop_assert!(once.values.contains(v) && once.values.contains(&v.conj()));
        }
    }

    #[test]
    fn sylvester_residual_identity(seed in any::<u64>(), pairs in prop::collection::vec((shift(), shift()), 1..6)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DenseOperator::new(problems::random_stable(9, &mut rng)).unwrap();
        let b = DenseOperator::new(-problems::random_stable(6, &mut rng)).unwrap();
        let f = linalg::to_complex(&problems::random_real(9, 1, &mut rng));
        let g = linalg::to_complex(&problems::random_real(6, 1, &mut rng));
        let mut st = SylvesterState::new(&f, &g);
        for (mh, mb) in pairs {
            sylvester::sylvester_step(&a, &b, &mut st, SylvesterShiftPair::new(mh, mb)).unwrap();
            let bound = 1e-10 * (a.frobenius_norm() + b.frobenius_norm()) * linalg::frobenius(&st.solution()) + 1e-12;
            prop_assert!(sylvester::sylvester_residual_defect(&a, &b, &st, &f, &g) <= bound);
            prop_assert_eq!(st.gamma.len(), st.z_hat.ncols());
        }
    }

    #[test]
    fn sylvester_multiplicative_decay(seed in any::<u64>(), mh in shift(), mb in shift()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (an, _) = problems::random_normal(6, -3.0, -0.2, &mut rng);
        let bn = -problems::random_stable(5, &mut rng);
        let f = linalg::to_complex(&problems::random_real(6, 1, &mut rng));
        let g = linalg::to_complex(&problems::random_real(5, 1, &mut rng));
        let pair = SylvesterShiftPair::new(mh, mb);
        let (vals, v) = linalg::eig(&linalg::to_complex(&an));
        let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(6, vals.iter().map(|l| pair.hat_stability(*l))));
        let m = &v * d * v.clone().try_inverse().unwrap();
        let mut st = SylvesterState::new(&f, &g);
        sylvester::sylvester_step(&DenseOperator::new(an).unwrap(), &DenseOperator::new(bn).unwrap(), &mut st, pair).unwrap();
        prop_assert!(rel(&st.h_hat, &(m * &f)) <= 1e-10);
    }
}

#[test]
fn exact_shifts_terminate_on_normal_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for n in [4, 9, 16] {
        let (a, _) = problems::random_normal(n, -4.0, -0.2, &mut rng);
        let b = linalg::to_complex(&problems::random_real(n, 1, &mut rng));
        let set = shifts::eig_shifts(&a, n).unwrap();
        assert!(set.proper);
        let op = DenseOperator::new(a).unwrap();
        let cfg = SolverConfig { tol: 1e-300, realify: true, ..Default::default() };
        let st = match lyapunov::solve_lyapunov_shifts(&op, &b, &set.values, &cfg) {
            Ok(s) => s,
            Err(e) => e.into_partial().unwrap(),
        };
        assert!(st.is_real());
        assert!(linalg::frobenius(&st.h) <= 1e-8 * linalg::frobenius(&b));
    }
}

#[test]
fn sparse_and_dense_operators_give_the_same_iterates() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = problems::random_stable(12, &mut rng);
    let b = linalg::to_complex(&problems::random_real(12, 1, &mut rng));
    let dense = DenseOperator::new(a.clone()).unwrap();
    let sparse = SparseOperator::new(CsrMatrix::from_dense(&a));
    let mus = [c(1.0, 0.5), c(1.0, -0.5), c(0.3, 0.0)];
    let cfg = SolverConfig { tol: 1e-300, ..Default::default() };
    let s1 = lyapunov::solve_lyapunov_shifts(&dense, &b, &mus, &cfg).unwrap_err().into_partial().unwrap();
    let s2 = lyapunov::solve_lyapunov_shifts(&sparse, &b, &mus, &cfg).unwrap_err().into_partial().unwrap();
    assert!(rel(&s1.gramian(), &s2.gramian()) < 1e-12);
}

#[test]
fn dense_oracle_agrees_with_long_integration() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (a, eig) = problems::random_normal(5, -2.0, -0.5, &mut rng);
    let b = problems::random_real(5, 1, &mut rng);
    let p_inf = oracle::dense_lyapunov(&a, &b).unwrap().matrix.map(|z| z.re);
    let t_end = 30.0;
    let (p, h) = oracle::integrate_gramian(&a, &b, t_end, 6000).unwrap();
    let max_re = eig.iter().fold(f64::NEG_INFINITY, |m, l| m.max(l.re));
    let bound = b.norm_squared() * (2.0 * max_re * t_end).exp() / (2.0 * max_re.abs()) + 1e-8;
    assert!((&p_inf - &p).norm() <= bound);
    // The exact flow stays on the rank-one residual manifold.
    let res = &a * &p + &p * a.transpose() + &b * b.transpose() - &h * h.transpose();
    assert!(res.norm() <= 1e-6);
}

#[test]
fn correction_term_for_complex_non_conforming_tableau() {
    let (_, op, b) = instance(31, 10, 1);
    let lambda = CMat::from_row_slice(2, 2, &[c(1.0, 0.5), c(0.0, 0.0), c(0.3, -0.2), c(0.7, 0.0)]);
    let t = ButcherTableau::from_parts(lambda, vec![c(0.9, 0.0), c(1.7, 0.0)]).unwrap();
    assert!(tableau::check_residual_condition(&t).frobenius_norm > 0.1);
    let cfg = SolverConfig { tol: 1e-300, diagnostic: true, step_sizes: vec![0.8, 1.3], ..Default::default() };
    let st = lyapunov::solve_lyapunov_sstage(&op, &b, &[t.clone(), t], &cfg).unwrap_err().into_partial().unwrap();
    let s = scale(&op, &st, &b);
    assert!(lyapunov::residual_defect_with_correction(&op, &st, &b) <= 1e-10 * s);
    assert!(lyapunov::residual_defect(&op, &st.z, &st.h, &b) > 1e-3 * s);
}
