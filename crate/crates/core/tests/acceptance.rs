//! Acceptance criteria; one PASS/FAIL line each.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ticlq::game::{sandwich_report, solve_game, solve_lyapunov_bounds, verify_equilibrium};
use ticlq::numerics::{frobenius, symmetric_eigenvalues, Matrix, SymMatrix, Vector};
use ticlq::oracles::{classical_lq_riccati, inconsistency_gap, simulated_gap, ScalarProblemC};
use ticlq::problem::{check_assumptions, make_problem_c, CoefficientFn, CoefficientSet, Partition, PolyTerm, ScalarFn};
use ticlq::volterra::{convergence_study, solve_volterra, ConvergenceConfig, VolterraConfig, VolterraInit};

fn one() -> Vector {
    Vector::from_element(1, 1.0)
}

fn affine(slope: f64) -> ScalarFn {
    ScalarFn::Affine { intercept: 1.0, slope }
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize, range: f64) -> Matrix {
    Matrix::from_fn(n, m, |_, _| rng.gen_range(-range..range))
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let l = random_matrix(rng, n, n, 1.0);
    &l * l.transpose()
}

fn increasing(c0: Matrix, c1: Matrix) -> CoefficientFn {
    CoefficientFn::Polynomial(vec![
        PolyTerm { t_pow: 0, s_pow: 0, coeff: c0 },
        PolyTerm { t_pow: 1, s_pow: 0, coeff: c1 },
    ])
}

fn lambda_min(m: Matrix) -> f64 {
    symmetric_eigenvalues(&SymMatrix::new(m).unwrap())[0]
}

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn single_player() -> Outcome {
    let c = make_problem_c(ScalarFn::Constant(2.0), 1.0).unwrap();
    let game = solve_game(&c, &Partition::uniform(1, 1.0).unwrap(), &one(), 1e-3).unwrap();
    let p_err = (game.riccati.value_at(0.0).unwrap()[(0, 0)] - 2.0 / 3.0).abs();
    let u_err = game.equilibrium.controls.iter().map(|u| (u[0] + 2.0 / 3.0).abs()).fold(0.0, f64::max);
    Outcome {
        pass: p_err <= 1e-8 && u_err <= 1e-8,
        detail: format!("|P(0)-2/3| = {p_err:.2e}, max|u+2/3| = {u_err:.2e} (tol 1e-8)"),
    }
}

fn time_consistent_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let r = random_psd(&mut rng, 1) + Matrix::identity(1, 1);
    let c = CoefficientSet::constant(
        1.0,
        random_matrix(&mut rng, 2, 2, 1.0),
        random_matrix(&mut rng, 2, 1, 1.0),
        random_psd(&mut rng, 2),
        r,
        random_psd(&mut rng, 2),
    )
    .unwrap();
    let oracle = classical_lq_riccati(&c, 1e-3).unwrap();
    let (mut jump, mut diff): (f64, f64) = (0.0, 0.0);
    for n in [2, 8, 32] {
        let game = solve_game(&c, &Partition::uniform(n, 1.0).unwrap(), &Vector::from_vec(vec![1.0, 1.0]), 1e-3).unwrap();
        jump = jump.max(game.riccati.max_jump());
        for (t, v) in oracle.times.iter().zip(&oracle.values) {
            diff = diff.max(frobenius(&(game.riccati.value_at(*t).unwrap().as_matrix() - v)));
        }
    }
    Outcome {
        pass: jump <= 1e-10 && diff <= 1e-6,
        detail: format!("N in {{2,8,32}}: max jump = {jump:.2e} (tol 1e-10), oracle diff = {diff:.2e} (tol 1e-6)"),
    }
}

fn two_segment_jump() -> Outcome {
    let c = make_problem_c(affine(1.0), 1.0).unwrap();
    let game = solve_game(&c, &Partition::uniform(2, 1.0).unwrap(), &one(), 1e-3).unwrap();
    let jump = game.riccati.jumps()[0][(0, 0)];
    let err = (jump - 0.5 / 3.0625).abs();
    Outcome {
        pass: err <= 1e-6,
        detail: format!("jump = {jump:.10}, |jump - 0.5/3.0625| = {err:.2e} (tol 1e-6)"),
    }
}

fn sandwich_on_random_problems() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_jump, mut worst_bound) = (f64::INFINITY, f64::INFINITY);
    let mut failures = 0;
    for _ in 0..20 {
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=2);
        let r0 = random_psd(&mut rng, m) + Matrix::identity(m, m);
        let c = CoefficientSet::new(
            1.0,
            n,
            m,
            CoefficientFn::Constant(random_matrix(&mut rng, n, n, 1.0)),
            CoefficientFn::Constant(random_matrix(&mut rng, n, m, 1.0)),
            increasing(random_psd(&mut rng, n), random_psd(&mut rng, n)),
            increasing(r0, random_psd(&mut rng, m)),
            increasing(random_psd(&mut rng, n), random_psd(&mut rng, n)),
        )
        .unwrap();
        let report = check_assumptions(&c, 11).unwrap();
        assert!(report.h1_ok() && report.h2_monotone_ok);
        let game = solve_game(&c, &Partition::uniform(4, 1.0).unwrap(), &Vector::from_element(n, 1.0), 1e-3).unwrap();
        let bounds = solve_lyapunov_bounds(&c, &game).unwrap();
        if !sandwich_report(&game, &bounds).holds(1e-8, true) {
            failures += 1;
        }
        for (j, seg) in game.riccati.segments().iter().enumerate() {
            for (l, p) in seg.values.iter().enumerate() {
                let p = p.as_matrix();
                let p0 = bounds.p0[j].values[l].as_matrix();
                let bar = bounds.p0_bar[j].values[l].as_matrix();
                for m in [p.clone(), p0 - p, bar - p0] {
                    worst_bound = worst_bound.min(lambda_min(m));
                }
            }
        }
        for jump in game.riccati.jumps() {
            worst_jump = worst_jump.min(lambda_min(jump.as_matrix().clone()));
        }
    }
    Outcome {
        pass: failures == 0 && worst_jump >= -1e-8 && worst_bound >= -1e-8,
        detail: format!(
            "20 problems, {failures} failures, min jump eigenvalue = {worst_jump:.2e}, min sandwich eigenvalue = {worst_bound:.2e} (tol -1e-8)"
        ),
    }
}

fn equilibrium_deviations() -> Outcome {
    let c = make_problem_c(affine(1.0), 1.0).unwrap();
    let game = solve_game(&c, &Partition::uniform(3, 1.0).unwrap(), &one(), 1e-3).unwrap();
    let report = verify_equilibrium(&c, &game, 100, 42);
    Outcome {
        pass: report.min_margin >= -1e-8,
        detail: format!("N=3, 100 trials, seed 42: min margin = {:.2e} (tol -1e-8)", report.min_margin),
    }
}

fn convergence() -> Outcome {
    let c = make_problem_c(affine(1.0), 1.0).unwrap();
    let report = convergence_study(&c, &[4, 8, 16, 32, 64], &one(), &ConvergenceConfig::default()).unwrap();
    let decreasing = report.cauchy.len() == 4 && report.cauchy.windows(2).all(|w| w[1] < w[0]);
    let last = report.rows.last().unwrap();
    let bounded = last.sup_dist_p <= 5.0 * last.max_jump;
    let order = report.fitted_order.unwrap_or(f64::NAN);
    Outcome {
        pass: decreasing && bounded && (0.7..=1.3).contains(&order),
        detail: format!(
            "cauchy = {:?}, |P(64) - P_limit| = {:.3e} <= 5*{:.3e}, order = {order:.3} in [0.7, 1.3]",
            report.cauchy.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>(),
            last.sup_dist_p,
            last.max_jump
        ),
    }
}

fn volterra_fixed_point() -> Outcome {
    let c = make_problem_c(affine(1.0), 1.0).unwrap();
    let tol = 1e-10;
    let solve = |init| solve_volterra(&c, &VolterraConfig { tol, init, ..VolterraConfig::default() }).unwrap();
    let game = solve(VolterraInit::GameSolution);
    let zero = solve(VolterraInit::Zero);
    let consistency = game.max_consistency().max(zero.max_consistency());
    let spread = game
        .p
        .iter()
        .zip(&zero.p)
        .map(|(a, b)| frobenius(&(a.as_matrix() - b.as_matrix())))
        .fold(0.0, f64::max);
    Outcome {
        pass: consistency <= 2.0 * tol && spread <= 10.0 * tol,
        detail: format!("consistency = {consistency:.2e} (tol 2e-10), init spread = {spread:.2e} (tol 1e-9)"),
    }
}

fn inconsistency_gap_check() -> Outcome {
    let pc = ScalarProblemC::new(ScalarFn::Affine { intercept: 1.0, slope: 2.0 }, 1.0).unwrap();
    let closed = inconsistency_gap(&pc, 0.0, 0.5, 1.0).unwrap().gap;
    let sim = simulated_gap(&pc, 0.0, 0.5, 1.0, 1e-3).unwrap().gap;
    let constant = ScalarProblemC::new(ScalarFn::Constant(2.0), 1.0).unwrap();
    let flat = inconsistency_gap(&constant, 0.0, 0.5, 1.0).unwrap().gap.abs();
    let flat_sim = simulated_gap(&constant, 0.0, 0.5, 1.0, 1e-3).unwrap().gap.abs();
    let diff = (closed - sim).abs();
    Outcome {
        pass: (closed - 0.0625).abs() <= 1e-12 && diff <= 1e-8 && flat <= 1e-12 && flat_sim <= 1e-12,
        detail: format!(
            "gap = {closed:.10}, |closed - simulated| = {diff:.2e} (tol 1e-8), constant h gap = {flat:.2e} / {flat_sim:.2e} (tol 1e-12)"
        ),
    }
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("single player", single_player),
        ("time-consistent reduction", time_consistent_reduction),
        ("two-segment jump", two_segment_jump),
        ("sandwich inequalities", sandwich_on_random_problems),
        ("equilibrium deviations", equilibrium_deviations),
        ("convergence to the limit", convergence),
        ("volterra fixed point", volterra_fixed_point),
        ("inconsistency gap", inconsistency_gap_check),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = check();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{tag} [{}] {name}: {}", i + 1, outcome.detail);
        if !outcome.pass {
            failed += 1;
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
