use ticlq::game::{
    deviation_margin, eval_game_cost, sandwich_report, solve_game, solve_lyapunov_bounds, verify_equilibrium,
    verify_equilibrium_with, ControlPath, DeviationMode,
};
use ticlq::numerics::{frobenius, Matrix, Vector};
use ticlq::oracles::{classical_lq_riccati, discrete_recursion, ScalarProblemC};
use ticlq::problem::{make_problem_c, CoefficientSet, Partition, ScalarFn};

fn one() -> Vector {
    Vector::from_element(1, 1.0)
}

fn affine() -> ScalarFn {
    ScalarFn::Affine { intercept: 1.0, slope: 1.0 }
}

#[test]
fn single_player_matches_pre_committed_solution() {
    let c = make_problem_c(ScalarFn::Constant(2.0), 1.0).unwrap();
    let p = Partition::uniform(1, 1.0).unwrap();
    let game = solve_game(&c, &p, &one(), 1e-3).unwrap();
    assert!((game.riccati.value_at(0.0).unwrap()[(0, 0)] - 2.0 / 3.0).abs() < 1e-10);
    let eq = &game.equilibrium;
    for ((s, x), u) in eq.times.iter().zip(&eq.states).zip(&eq.controls) {
        assert!((x[0] - (1.0 + 2.0 * (1.0 - s)) / 3.0).abs() < 1e-10);
        assert!((u[0] + 2.0 / 3.0).abs() < 1e-10);
    }
    assert!((eq.costs[0] - 2.0 / 3.0).abs() < 1e-10);
    let zero = ControlPath::zero(&game.grid, 1);
    let j0 = eval_game_cost(&c, &p, 1, &zero, &one(), 1e-3).unwrap();
    assert!((j0 - 2.0).abs() < 1e-12);
    assert!(j0 >= eq.costs[0]);
}

#[test]
fn two_segment_jump_matches_recursion() {
    let c = make_problem_c(affine(), 1.0).unwrap();
    let p = Partition::uniform(2, 1.0).unwrap();
    let game = solve_game(&c, &p, &one(), 1e-3).unwrap();
    let jump = game.riccati.jumps()[0][(0, 0)];
    assert!((jump - 0.5 / 3.0625).abs() < 1e-6, "jump {jump}");
    println!("jump error {:e}", (jump - 0.5 / 3.0625).abs());
}

#[test]
fn scalar_game_matches_recursion_at_knots() {
    let pc = ScalarProblemC::new(affine(), 1.0).unwrap();
    let c = make_problem_c(affine(), 1.0).unwrap();
    for n in [1, 2, 3, 5, 8] {
        let p = Partition::uniform(n, 1.0).unwrap();
        let rec = discrete_recursion(&pc, &p);
        let game = solve_game(&c, &p, &one(), 1e-3).unwrap();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            worst = worst.max((game.riccati.right_limit(j)[(0, 0)] - rec.start[j]).abs());
            worst = worst.max((game.riccati.left_limit(j + 1)[(0, 0)] - rec.terminal[j]).abs());
        }
        println!("N={n} recursion error {worst:e}");
        assert!(worst < 1e-6);
    }
}

fn constant_2x2() -> CoefficientSet {
    CoefficientSet::constant(
        1.0,
        Matrix::from_row_slice(2, 2, &[0.1, 1.0, -0.4, -0.2]),
        Matrix::from_row_slice(2, 1, &[0.0, 1.0]),
        Matrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.5]),
        Matrix::from_element(1, 1, 0.7),
        Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]),
    )
    .unwrap()
}

#[test]
fn time_consistent_data_has_no_jumps() {
    let c = constant_2x2();
    let oracle = classical_lq_riccati(&c, 1e-3).unwrap();
    for n in [2, 4, 8] {
        let p = Partition::uniform(n, 1.0).unwrap();
        let game = solve_game(&c, &p, &Vector::from_vec(vec![1.0, -0.5]), 1e-3).unwrap();
        println!("N={n} max jump {:e}", game.riccati.max_jump());
        assert!(game.riccati.max_jump() <= 1e-10);
        for (t, v) in oracle.times.iter().zip(&oracle.values) {
            let diff = frobenius(&(game.riccati.value_at(*t).unwrap().as_matrix() - v));
            assert!(diff <= 1e-6);
        }
    }
}

#[test]
fn structural_invariants() {
    let c = make_problem_c(affine(), 1.0).unwrap();
    let p = Partition::uniform(4, 1.0).unwrap();
    let game = solve_game(&c, &p, &one(), 1e-3).unwrap();
    assert!(game.equilibrium.closed_loop_gap() <= 1e-8);
    assert!(game.feedback_residual(&c).unwrap() <= 1e-12);
    println!("value identity {:e}", game.value_identity_gap());
    assert!(game.value_identity_gap() <= 1e-8);
    for k in 0..4 {
        assert_eq!(game.transitions.phi(k)[0], Matrix::identity(1, 1));
    }
    let bounds = solve_lyapunov_bounds(&c, &game).unwrap();
    let report = sandwich_report(&game, &bounds);
    println!("{report:?}");
    assert!(report.holds(1e-8, true));
}

#[test]
fn equilibrium_survives_deviations() {
    let c = make_problem_c(affine(), 1.0).unwrap();
    let p = Partition::uniform(3, 1.0).unwrap();
    let game = solve_game(&c, &p, &one(), 1e-3).unwrap();
    let report = verify_equilibrium(&c, &game, 100, 42);
    println!("{:?}", report.players);
    assert!(report.passed());
    let zero = vec![Vector::zeros(1); game.grid.substeps(1)];
    assert_eq!(deviation_margin(&c, &game, 2, &zero, DeviationMode::Feedback), 0.0);
    let open = verify_equilibrium_with(&c, &game, 100, 42, DeviationMode::OpenLoop, 1e-8);
    println!("open loop {:?}", open.players);
}

#[test]
fn lyapunov_bounds_without_running_cost() {
    // A = Q = 0: both bounds carry the terminal weight unchanged
    let c = make_problem_c(ScalarFn::Constant(2.0), 1.0).unwrap();
    let game = solve_game(&c, &Partition::uniform(1, 1.0).unwrap(), &one(), 1e-3).unwrap();
    let bounds = solve_lyapunov_bounds(&c, &game).unwrap();
    for t in [0.0, 0.3, 0.99, 1.0] {
        assert!((bounds.p0_at(t).unwrap()[(0, 0)] - 2.0).abs() < 1e-12);
        assert!((bounds.p0_bar_at(t).unwrap()[(0, 0)] - 2.0).abs() < 1e-12);
    }
    assert!((bounds.p0_bar_sup() - 2.0).abs() < 1e-12);
    let report = sandwich_report(&game, &bounds);
    assert!(report.holds(1e-10, true));
    assert!(report.min_p > 0.0);
}

#[test]
fn lyapunov_upper_bound_uses_last_terminal_weight() {
    let c = make_problem_c(affine(), 1.0).unwrap();
    let game = solve_game(&c, &Partition::uniform(4, 1.0).unwrap(), &one(), 1e-3).unwrap();
    let bounds = solve_lyapunov_bounds(&c, &game).unwrap();
    // G(t_{N-1}) = h(0.75)
    assert!((bounds.p0_bar_at(0.1).unwrap()[(0, 0)] - 1.75).abs() < 1e-12);
    for t in [0.0, 0.2, 0.5, 0.8] {
        let p = game.riccati.value_at(t).unwrap()[(0, 0)];
        let lo = bounds.p0_at(t).unwrap()[(0, 0)];
        assert!(p <= lo + 1e-12 && lo <= 1.75 + 1e-12, "t={t}: {p} {lo}");
    }
}

#[test]
fn player_cost_identity() {
    let c = make_problem_c(affine(), 1.0).unwrap();
    let p = Partition::uniform(3, 1.0).unwrap();
    let game = solve_game(&c, &p, &one(), 1e-3).unwrap();
    let u = game.equilibrium.control_path().clone();
    for k in 1..=3 {
        let direct = eval_game_cost(&c, &p, k, &u, &one(), 1e-3).unwrap();
        assert!((direct - game.equilibrium.costs[k - 1]).abs() < 1e-8);
    }
    assert!(eval_game_cost(&c, &p, 4, &u, &one(), 1e-3).is_err());
}
