use ticlq::error::Error;
use ticlq::game::solve_game;
use ticlq::numerics::{frobenius, Matrix, Vector};
use ticlq::oracles::classical_lq_riccati;
use ticlq::problem::{make_problem_c, CoefficientSet, Partition, ScalarFn};
use ticlq::volterra::{
    convergence_study, equilibrium_from_volterra, fit_order, remove_jumps, solve_volterra, ConvergenceConfig,
    VolterraConfig, VolterraInit,
};

fn one() -> Vector {
    Vector::from_element(1, 1.0)
}

fn affine() -> ScalarFn {
    ScalarFn::Affine { intercept: 1.0, slope: 1.0 }
}

fn config(resolution: usize, init: VolterraInit) -> VolterraConfig {
    VolterraConfig {
        resolution,
        init,
        ..VolterraConfig::default()
    }
}

#[test]
fn constant_weight_fixed_point_is_classical() {
    let c = make_problem_c(ScalarFn::Constant(2.0), 1.0).unwrap();
    let v = solve_volterra(&c, &config(128, VolterraInit::Zero)).unwrap();
    assert!(v.residual < 1e-10);
    assert!(v.iterations <= 30, "iterations {}", v.iterations);
    for (t, p) in v.anchors.iter().zip(&v.p) {
        assert!((p[(0, 0)] - 2.0 / (3.0 - 2.0 * t)).abs() < 1e-8);
    }
    let eq = equilibrium_from_volterra(&v, &one());
    for (s, u) in eq.times.iter().zip(&eq.controls) {
        assert!((u[0] + 2.0 / 3.0).abs() < 1e-8, "u({s}) = {}", u[0]);
    }
    assert!((eq.control_at(0.37)[0] + 2.0 / 3.0).abs() < 1e-8);
    assert!((eq.state_at(0.37)[0] - (1.0 + 2.0 * 0.63) / 3.0).abs() < 1e-8);
}

#[test]
fn constant_matrix_fixed_point_matches_oracle() {
    let c = CoefficientSet::constant(
        1.0,
        Matrix::from_row_slice(2, 2, &[0.1, 1.0, -0.4, -0.2]),
        Matrix::from_row_slice(2, 1, &[0.0, 1.0]),
        Matrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.5]),
        Matrix::from_element(1, 1, 0.7),
        Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]),
    )
    .unwrap();
    let oracle = classical_lq_riccati(&c, 1.0 / 1024.0).unwrap();
    let v = solve_volterra(&c, &config(128, VolterraInit::Zero)).unwrap();
    for (i, t) in v.anchors.iter().enumerate() {
        let k = (t * 1024.0).round() as usize;
        assert!((oracle.times[k] - t).abs() < 1e-12);
        let diff = frobenius(&(v.p[i].as_matrix() - &oracle.values[k]));
        assert!(diff < 1e-6, "t={t} diff {diff:e}");
    }
}

#[test]
fn zero_cost_gives_zero_value_and_free_flow() {
    let n = 2;
    let rot = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let c = CoefficientSet::constant(
        1.0,
        rot.clone(),
        Matrix::from_row_slice(2, 1, &[0.0, 1.0]),
        Matrix::zeros(n, n),
        Matrix::identity(1, 1),
        Matrix::zeros(n, n),
    )
    .unwrap();
    let v = solve_volterra(&c, &config(64, VolterraInit::Zero)).unwrap();
    let h = v.spacing();
    for (i, row) in v.phi.iter().enumerate() {
        assert_eq!(v.p[i].as_matrix(), &Matrix::zeros(n, n));
        assert_eq!(row[0], Matrix::identity(n, n));
        for (l, phi) in row.iter().enumerate() {
            let exact = (&rot * (l as f64 * h)).exp();
            assert!(frobenius(&(phi - exact)) < 1e-8);
        }
    }
}

#[test]
fn transition_starts_at_identity() {
    let c = make_problem_c(affine(), 1.0).unwrap();
    let v = solve_volterra(&c, &config(64, VolterraInit::GameSolution)).unwrap();
    assert_eq!(v.phi.len(), 65);
    for (i, row) in v.phi.iter().enumerate() {
        assert_eq!(row.len(), 65 - i);
        assert_eq!(row[0], Matrix::identity(1, 1));
    }
}

#[test]
fn equilibrium_is_linear_in_the_initial_state() {
    let c = make_problem_c(affine(), 1.0).unwrap();
    let v = solve_volterra(&c, &config(64, VolterraInit::GameSolution)).unwrap();
    let zero = equilibrium_from_volterra(&v, &Vector::zeros(1));
    assert!(zero.controls.iter().all(|u| u[0] == 0.0));
    let a = equilibrium_from_volterra(&v, &Vector::from_element(1, 1.5));
    let b = equilibrium_from_volterra(&v, &Vector::from_element(1, -0.25));
    let sum = equilibrium_from_volterra(&v, &Vector::from_element(1, 1.25));
    for i in 0..sum.controls.len() {
        assert!((a.controls[i][0] + b.controls[i][0] - sum.controls[i][0]).abs() < 1e-13);
        assert!((a.states[i][0] + b.states[i][0] - sum.states[i][0]).abs() < 1e-13);
    }
}

#[test]
fn jump_removal_absorbs_the_jump() {
    let c = make_problem_c(affine(), 1.0).unwrap();
    let game = solve_game(&c, &Partition::uniform(2, 1.0).unwrap(), &one(), 1e-3).unwrap();
    let tilde = remove_jumps(&game.riccati);
    assert!((tilde.max_deviation() - 0.5 / 3.0625).abs() < 1e-6);
    // continuous at the knot, equal to P on the last segment
    let left = tilde.value_at(0.5 - 1e-9).unwrap()[(0, 0)];
    let right = tilde.value_at(0.5).unwrap()[(0, 0)];
    assert!((left - right).abs() < 1e-6);
    let last = game.riccati.value_at(0.75).unwrap()[(0, 0)];
    assert_eq!(tilde.value_at(0.75).unwrap()[(0, 0)], last);
    assert!(tilde.max_slope().is_finite());

    let single = solve_game(&c, &Partition::uniform(1, 1.0).unwrap(), &one(), 1e-3).unwrap();
    assert_eq!(remove_jumps(&single.riccati).max_deviation(), 0.0);
}

#[test]
fn constant_coefficients_converge_immediately() {
    let c = make_problem_c(ScalarFn::Constant(2.0), 1.0).unwrap();
    let study = ConvergenceConfig {
        volterra: config(64, VolterraInit::GameSolution),
        ..ConvergenceConfig::default()
    };
    let report = convergence_study(&c, &[2, 4, 8], &one(), &study).unwrap();
    assert!(report.failures.is_empty());
    for row in &report.rows {
        assert!(row.max_jump < 1e-10);
        assert!(row.sup_dist_p < 1e-6, "N={} dist {:e}", row.segments, row.sup_dist_p);
    }
}

#[test]
fn single_refinement_has_no_order() {
    let c = make_problem_c(affine(), 1.0).unwrap();
    let study = ConvergenceConfig {
        volterra: config(64, VolterraInit::GameSolution),
        compare_inits: false,
        ..ConvergenceConfig::default()
    };
    let report = convergence_study(&c, &[4], &one(), &study).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert!(report.fitted_order.is_none());
    assert!(report.cauchy.is_empty());
    assert!(report.init_spread.is_none());
    assert!(convergence_study(&c, &[8, 4], &one(), &study).is_err());
    assert!(convergence_study(&c, &[], &one(), &study).is_err());
}

#[test]
fn fit_order_recovers_power_laws() {
    let x = [0.25, 0.125, 0.0625, 0.03125];
    let y: Vec<f64> = x.iter().map(|h: &f64| 3.0 * h.powi(2)).collect();
    assert!((fit_order(&x, &y).unwrap() - 2.0).abs() < 1e-12);
    assert!(fit_order(&x[..1], &y[..1]).is_none());
}

#[test]
fn iteration_cap_reports_no_convergence() {
    let c = make_problem_c(affine(), 1.0).unwrap();
    let cfg = VolterraConfig {
        resolution: 32,
        max_iter: 1,
        init: VolterraInit::Zero,
        ..VolterraConfig::default()
    };
    match solve_volterra(&c, &cfg) {
        Err(Error::NoConvergence { .. }) => {}
        other => panic!("expected NoConvergence, got {other:?}"),
    }
}

#[test]
fn initialisations_reach_the_same_fixed_point() {
    let c = make_problem_c(affine(), 1.0).unwrap();
    let base = solve_volterra(&c, &config(128, VolterraInit::Zero)).unwrap();
    for init in [VolterraInit::Lyapunov, VolterraInit::GameSolution] {
        let v = solve_volterra(&c, &config(128, init)).unwrap();
        assert!(v.max_consistency() <= 2e-10);
        let spread = v.p.iter().zip(&base.p).map(|(a, b)| frobenius(&(a.as_matrix() - b.as_matrix()))).fold(0.0, f64::max);
        assert!(spread <= 1e-9, "{init}: spread {spread:e}");
    }
}
