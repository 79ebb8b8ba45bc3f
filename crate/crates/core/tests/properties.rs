use proptest::prelude::*;
use ticlq::game::{sandwich_report, solve_game, solve_lyapunov_bounds};
use ticlq::numerics::{frobenius, max_abs_asymmetry, rk4_linear_propagator, trapezoid_quad, Matrix, Vector};
use ticlq::oracles::{inconsistency_gap, simulated_gap, ScalarProblemC};
use ticlq::problem::{freeze, make_problem_c, CoefficientFn, CoefficientSet, Partition, PolyTerm, ScalarFn};
use ticlq::volterra::{equilibrium_from_volterra, solve_volterra, VolterraConfig, VolterraInit};

fn matrix(n: usize, m: usize, range: f64) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-range..range, n * m).prop_map(move |v| Matrix::from_row_slice(n, m, &v))
}

fn psd(n: usize) -> impl Strategy<Value = Matrix> {
    matrix(n, n, 1.0).prop_map(|l| &l * l.transpose())
}

fn scalar_h2() -> impl Strategy<Value = ScalarFn> {
    (0.1f64..3.0, 0.0f64..3.0).prop_map(|(intercept, slope)| ScalarFn::Affine { intercept, slope })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rk4_step_inverts_backward(f in matrix(3, 3, 1.0), h in 1e-3f64..1e-2) {
        let fwd = rk4_linear_propagator(&f, &f, &f, h);
        let back = rk4_linear_propagator(&f, &f, &f, -h);
        let err = frobenius(&(&fwd * &back - Matrix::identity(3, 3)));
        prop_assert!(err < 1e-9, "round trip error {err:e}");
    }

    #[test]
    fn trapezoid_is_exact_on_affine(a in matrix(2, 2, 5.0), b in matrix(2, 2, 5.0), n in 2usize..40, len in 0.1f64..4.0) {
        let step = len / (n - 1) as f64;
        let samples: Vec<Matrix> = (0..n).map(|i| &a + &b * (i as f64 * step)).collect();
        let exact = &a * len + &b * (0.5 * len * len);
        let got = trapezoid_quad(&samples, step).unwrap();
        prop_assert!(frobenius(&(got - &exact)) <= 1e-11 * (1.0 + frobenius(&exact)));
    }

    #[test]
    fn freezing_uses_left_knot(n in 1usize..8, s in 0.0f64..1.0, q0 in psd(2), q1 in psd(2)) {
        let c = CoefficientSet::new(
            1.0, 2, 1,
            CoefficientFn::Polynomial(vec![PolyTerm { t_pow: 1, s_pow: 1, coeff: Matrix::identity(2, 2) }]),
            CoefficientFn::Constant(Matrix::from_row_slice(2, 1, &[0.0, 1.0])),
            CoefficientFn::Polynomial(vec![
                PolyTerm { t_pow: 0, s_pow: 0, coeff: q0 },
                PolyTerm { t_pow: 1, s_pow: 0, coeff: q1 },
            ]),
            CoefficientFn::Constant(Matrix::identity(1, 1)),
            CoefficientFn::Constant(Matrix::identity(2, 2)),
        ).unwrap();
        let p = Partition::uniform(n, 1.0).unwrap();
        let frozen = freeze(&c, &p).unwrap();
        let anchor = frozen.anchor(s).unwrap();
        let k = p.segment_of(s).unwrap();
        prop_assert_eq!(anchor, p.knot(k));
        prop_assert!(anchor <= s && s < p.knot(k + 1));
        prop_assert_eq!(frozen.a(s).unwrap(), c.a(anchor, s));
        let (fq, cq) = (frozen.q(s).unwrap(), c.q(anchor, s));
        prop_assert_eq!(fq.as_matrix(), cq.as_matrix());
        // at a knot the new self takes over
        prop_assert_eq!(frozen.anchor(p.knot(k)).unwrap(), p.knot(k));
    }

    #[test]
    fn gap_is_nonnegative_and_quadratic(h in scalar_h2(), t in 0.0f64..0.4, dt in 0.05f64..0.5, x in -3.0f64..3.0) {
        let pc = ScalarProblemC::new(h, 1.0).unwrap();
        let tau = t + dt;
        let g = inconsistency_gap(&pc, t, tau, x).unwrap();
        let unit = inconsistency_gap(&pc, t, tau, 1.0).unwrap();
        prop_assert!(g.gap >= 0.0);
        prop_assert!((g.gap - x * x * unit.gap).abs() <= 1e-14 * (1.0 + unit.gap));
        prop_assert!((g.gap - (g.pre_committed_cost - g.reoptimized_value)).abs() <= 1e-12 * (1.0 + g.pre_committed_cost));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn simulated_gap_agrees(h in scalar_h2(), t in 0.0f64..0.4, dt in 0.05f64..0.5) {
        let pc = ScalarProblemC::new(h, 1.0).unwrap();
        let closed = inconsistency_gap(&pc, t, t + dt, 1.0).unwrap();
        let sim = simulated_gap(&pc, t, t + dt, 1.0, 1e-3).unwrap();
        prop_assert!((closed.gap - sim.gap).abs() < 1e-8);
    }

    #[test]
    fn scalar_games_satisfy_bounds(h in scalar_h2(), n in 1usize..9) {
        let c = make_problem_c(h, 1.0).unwrap();
        let game = solve_game(&c, &Partition::uniform(n, 1.0).unwrap(), &Vector::from_element(1, 1.0), 2e-3).unwrap();
        for jump in game.riccati.jumps() {
            prop_assert!(jump[(0, 0)] >= -1e-8);
        }
        let bounds = solve_lyapunov_bounds(&c, &game).unwrap();
        prop_assert!(sandwich_report(&game, &bounds).holds(1e-8, true));
    }

    #[test]
    fn matrix_games_stay_symmetric_and_bounded(
        a in matrix(2, 2, 1.0), b in matrix(2, 1, 1.0),
        q0 in psd(2), q1 in psd(2), g0 in psd(2), g1 in psd(2),
        r1 in 0.0f64..1.0, n in 1usize..5,
    ) {
        let c = CoefficientSet::new(
            1.0, 2, 1,
            CoefficientFn::Constant(a),
            CoefficientFn::Constant(b),
            CoefficientFn::Polynomial(vec![
                PolyTerm { t_pow: 0, s_pow: 0, coeff: q0 },
                PolyTerm { t_pow: 1, s_pow: 0, coeff: q1 },
            ]),
            CoefficientFn::Polynomial(vec![
                PolyTerm { t_pow: 0, s_pow: 0, coeff: Matrix::identity(1, 1) },
                PolyTerm { t_pow: 1, s_pow: 0, coeff: Matrix::from_element(1, 1, r1) },
            ]),
            CoefficientFn::Polynomial(vec![
                PolyTerm { t_pow: 0, s_pow: 0, coeff: g0 },
                PolyTerm { t_pow: 1, s_pow: 0, coeff: g1 },
            ]),
        ).unwrap();
        let game = solve_game(&c, &Partition::uniform(n, 1.0).unwrap(), &Vector::from_vec(vec![1.0, -1.0]), 5e-3).unwrap();
        for seg in game.riccati.segments() {
            for v in &seg.values {
                prop_assert!(max_abs_asymmetry(v.as_matrix()) == 0.0);
            }
        }
        let bounds = solve_lyapunov_bounds(&c, &game).unwrap();
        let report = sandwich_report(&game, &bounds);
        prop_assert!(report.min_p >= -1e-8, "{report:?}");
        prop_assert!(report.min_p0_minus_p >= -1e-8, "{report:?}");
    }

    #[test]
    fn limit_equilibrium_is_linear(h in scalar_h2(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let c = make_problem_c(h, 1.0).unwrap();
        let cfg = VolterraConfig { resolution: 32, init: VolterraInit::Zero, ..VolterraConfig::default() };
        let v = solve_volterra(&c, &cfg).unwrap();
        let ex = equilibrium_from_volterra(&v, &Vector::from_element(1, x));
        let ey = equilibrium_from_volterra(&v, &Vector::from_element(1, y));
        let exy = equilibrium_from_volterra(&v, &Vector::from_element(1, x + y));
        for i in 0..exy.controls.len() {
            prop_assert!((ex.controls[i][0] + ey.controls[i][0] - exy.controls[i][0]).abs() < 1e-12);
        }
    }
}
