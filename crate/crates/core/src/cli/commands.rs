use super::csv::{cell, indexed_header, triangle_header, write_csv};
use super::summary::{Summary, Value};
use super::{Command, RunConfig};
use crate::error::{Error, Result};
use crate::game::{
    sandwich_report, solve_game, solve_lyapunov_bounds, verify_equilibrium_with, DeviationMode, DeviationReport,
    GameSolution,
};
use crate::numerics::{frobenius, Vector};
use crate::oracles::{inconsistency_gap, simulated_gap};
use crate::problem::{check_assumptions, load_problem, AssumptionReport, CoefficientSet, Partition};
use crate::volterra::{
    convergence_study, equilibrium_from_volterra, solve_volterra, ConvergenceConfig, VolterraConfig, VolterraInit,
};

pub(super) fn run(config: &RunConfig) -> Result<Summary> {
    let c = load_problem(&config.problem)?;
    let mut s = Summary::new();
    s.insert("problem", config.problem.display().to_string());
    let report = check_assumptions(&c, config.density)?;
    assumptions(&mut s, &report);
    match config.command {
        Command::Check => {}
        Command::Gap => gap(config, &c, &mut s)?,
        command => {
            if !report.h1_ok() {
                return Err(Error::AssumptionViolated(format!(
                    "(H1) fails: {} violations, min eigenvalue of R {:e}",
                    report.violations.len(),
                    report.h1_r_delta
                )));
            }
            match command {
                Command::SolveGame => solve_game_cmd(config, &c, &report, &mut s)?,
                Command::VerifyEquilibrium => verify_cmd(config, &c, &mut s)?,
                Command::SolveLimit => solve_limit_cmd(config, &c, &mut s)?,
                Command::Convergence => convergence_cmd(config, &c, &mut s)?,
                Command::Check | Command::Gap => unreachable!(),
            }
        }
    }
    Ok(s)
}

fn assumptions(s: &mut Summary, r: &AssumptionReport) {
    s.insert("assumptions.density", r.density);
    s.insert("assumptions.h1", r.h1_ok());
    s.insert("assumptions.h1_lipschitz_estimate", r.h1_lipschitz_estimate);
    s.insert("assumptions.h1_psd", r.h1_psd_ok);
    s.insert("assumptions.h1_r_delta", r.h1_r_delta);
    s.insert("assumptions.h2", r.h2_monotone_ok);
    s.insert("assumptions.h2_g", r.h2_g_ok);
    s.insert("assumptions.h2_q", r.h2_q_ok);
    s.insert("assumptions.h2_r", r.h2_r_ok);
    s.insert("assumptions.violations", r.violations.len());
}

fn initial_state(config: &RunConfig, c: &CoefficientSet) -> Result<Vector> {
    if config.x.is_empty() {
        return Ok(Vector::from_element(c.state_dim(), 1.0));
    }
    if config.x.len() != c.state_dim() {
        return Err(Error::DimensionMismatch(format!(
            "--x has {} entries, the state has {}",
            config.x.len(),
            c.state_dim()
        )));
    }
    Ok(Vector::from_vec(config.x.clone()))
}

fn floats(v: impl IntoIterator<Item = f64>) -> Value {
    Value::List(v.into_iter().map(Value::Float).collect())
}

fn game(config: &RunConfig, c: &CoefficientSet) -> Result<GameSolution> {
    let x = initial_state(config, c)?;
    let partition = Partition::uniform(config.n, c.horizon())?;
    solve_game(c, &partition, &x, config.step)
}

fn deviation_summary(s: &mut Summary, prefix: &str, r: &DeviationReport) {
    s.insert(format!("{prefix}.min_margin"), r.min_margin);
    s.insert(format!("{prefix}.passed"), r.passed());
    s.insert(format!("{prefix}.per_player"), floats(r.players.iter().map(|p| p.min_margin)));
}

fn write_game_files(config: &RunConfig, c: &CoefficientSet, g: &GameSolution) -> Result<()> {
    let n = c.state_dim();
    let m = c.control_dim();
    let out = &config.out;

    let mut header = vec!["t".to_string()];
    header.extend(triangle_header("P", n));
    header.push("jump_flag".into());
    let mut rows = Vec::new();
    for (j, seg) in g.riccati.segments().iter().enumerate() {
        for (l, (t, p)) in seg.times.iter().zip(&seg.values).enumerate() {
            // knot rows: the left limit carries flag 0, the right limit flag 1
            let flag = if l == 0 && j > 0 { "1" } else { "0" };
            let mut row = vec![cell(*t)];
            row.extend(p.upper_triangle().into_iter().map(cell));
            row.push(flag.into());
            rows.push(row);
        }
    }
    write_csv(&out.join("riccati.csv"), &header, rows)?;

    let eq = &g.equilibrium;
    let mut header = vec!["s".to_string()];
    header.extend(indexed_header("x", n));
    header.extend(indexed_header("u", m));
    let rows = eq.times.iter().zip(&eq.states).zip(&eq.controls).map(|((t, x), u)| {
        let mut row = vec![cell(*t)];
        row.extend(x.iter().map(|v| cell(*v)));
        row.extend(u.iter().map(|v| cell(*v)));
        row
    });
    write_csv(&out.join("trajectory.csv"), &header, rows)?;

    let partition = g.riccati.partition();
    let rows = eq
        .costs
        .iter()
        .enumerate()
        .map(|(j, cost)| vec![(j + 1).to_string(), cell(partition.knot(j)), cell(*cost)]);
    write_csv(
        &out.join("player_costs.csv"),
        &["k".into(), "t_start".into(), "J_k".into()],
        rows,
    )?;
    Ok(())
}

fn solve_game_cmd(config: &RunConfig, c: &CoefficientSet, report: &AssumptionReport, s: &mut Summary) -> Result<()> {
    let g = game(config, c)?;
    write_game_files(config, c, &g)?;
    let bounds = solve_lyapunov_bounds(c, &g)?;
    let n = c.state_dim();
    let mut header = vec!["t".to_string()];
    header.extend(triangle_header("P0", n));
    header.extend(triangle_header("P0bar", n));
    header.push("jump_flag".into());
    let mut rows = Vec::new();
    for (j, (seg, bar)) in bounds.p0.iter().zip(&bounds.p0_bar).enumerate() {
        for (l, t) in seg.times.iter().enumerate() {
            let mut row = vec![cell(*t)];
            row.extend(seg.values[l].upper_triangle().into_iter().map(cell));
            row.extend(bar.values[l].upper_triangle().into_iter().map(cell));
            row.push(if l == 0 && j > 0 { "1" } else { "0" }.into());
            rows.push(row);
        }
    }
    write_csv(&config.out.join("lyapunov.csv"), &header, rows)?;

    let sandwich = sandwich_report(&g, &bounds);
    let p0 = g.riccati.value_at(0.0)?;
    let eq = &g.equilibrium;
    s.insert("game.n", config.n);
    s.insert("game.step", config.step);
    s.insert("game.p_at_0", floats(p0.upper_triangle()));
    s.insert("game.max_jump", g.riccati.max_jump());
    s.insert("game.jump_constant", g.riccati.jump_constant());
    s.insert("game.jumps", floats(g.riccati.jumps().iter().map(|j| frobenius(j))));
    s.insert("game.costs", floats(eq.costs.iter().copied()));
    s.insert("game.u_at_0", floats(eq.controls[0].iter().copied()));
    s.insert("game.x_at_T", floats(eq.states[eq.states.len() - 1].iter().copied()));
    s.insert("game.closed_loop_gap", eq.closed_loop_gap());
    s.insert("game.feedback_residual", g.feedback_residual(c)?);
    s.insert("game.value_identity_gap", g.value_identity_gap());
    s.insert("bounds.min_p", sandwich.min_p);
    s.insert("bounds.min_p0_minus_p", sandwich.min_p0_minus_p);
    s.insert("bounds.min_p0_bar_minus_p0", sandwich.min_p0_bar_minus_p0);
    if sandwich.min_jump.is_finite() {
        s.insert("bounds.min_jump", sandwich.min_jump);
    }
    s.insert("bounds.holds", sandwich.holds(1e-8, report.h2_monotone_ok));
    let dev = verify_equilibrium_with(c, &g, config.trials, config.seed, DeviationMode::Feedback, 1e-8);
    deviation_summary(s, "deviation", &dev);
    Ok(())
}

fn verify_cmd(config: &RunConfig, c: &CoefficientSet, s: &mut Summary) -> Result<()> {
    let g = game(config, c)?;
    s.insert("game.n", config.n);
    s.insert("deviation.trials", config.trials);
    s.insert("deviation.seed", config.seed);
    let mut rows = Vec::new();
    for (mode, name) in [(DeviationMode::Feedback, "feedback"), (DeviationMode::OpenLoop, "open_loop")] {
        let r = verify_equilibrium_with(c, &g, config.trials, config.seed, mode, 1e-8);
        deviation_summary(s, &format!("deviation.{name}"), &r);
        rows.extend(r.players.iter().map(|p| vec![p.k.to_string(), name.to_string(), cell(p.min_margin)]));
    }
    write_csv(
        &config.out.join("deviations.csv"),
        &["k".into(), "mode".into(), "min_margin".into()],
        rows,
    )
}

fn volterra_config(config: &RunConfig) -> Result<VolterraConfig> {
    Ok(VolterraConfig {
        resolution: config.resolution,
        tol: config.tol,
        max_iter: config.max_iter,
        init: config.init.parse::<VolterraInit>()?,
        init_step: config.step,
        ..VolterraConfig::default()
    })
}

fn solve_limit_cmd(config: &RunConfig, c: &CoefficientSet, s: &mut Summary) -> Result<()> {
    let x = initial_state(config, c)?;
    let v = solve_volterra(c, &volterra_config(config)?)?;
    let n = c.state_dim();
    let mut header = vec!["t".to_string()];
    header.extend(triangle_header("P", n));
    header.push("residual".into());
    let rows = v.anchors.iter().zip(&v.p).zip(&v.consistency).map(|((t, p), r)| {
        let mut row = vec![cell(*t)];
        row.extend(p.upper_triangle().into_iter().map(cell));
        row.push(cell(*r));
        row
    });
    write_csv(&config.out.join("volterra.csv"), &header, rows)?;

    let eq = equilibrium_from_volterra(&v, &x);
    let mut header = vec!["s".to_string()];
    header.extend(indexed_header("x", n));
    header.extend(indexed_header("u", c.control_dim()));
    let rows = eq.times.iter().zip(&eq.states).zip(&eq.controls).map(|((t, x), u)| {
        let mut row = vec![cell(*t)];
        row.extend(x.iter().map(|v| cell(*v)));
        row.extend(u.iter().map(|v| cell(*v)));
        row
    });
    write_csv(&config.out.join("equilibrium_limit.csv"), &header, rows)?;

    s.insert("volterra.resolution", config.resolution);
    s.insert("volterra.tol", config.tol);
    s.insert("volterra.init", v.init.to_string());
    s.insert("volterra.p_at_0", floats(v.p[0].upper_triangle()));
    s.insert("volterra.residual", v.residual);
    s.insert("volterra.iterations", v.iterations);
    s.insert("volterra.history", floats(v.history.iter().copied()));
    s.insert("volterra.consistency_max", v.max_consistency());
    s.insert("volterra.damping", v.damping);
    s.insert("volterra.u_at_0", floats(eq.controls[0].iter().copied()));
    Ok(())
}

fn convergence_cmd(config: &RunConfig, c: &CoefficientSet, s: &mut Summary) -> Result<()> {
    let x = initial_state(config, c)?;
    let study = ConvergenceConfig {
        step: config.step,
        volterra: volterra_config(config)?,
        compare_inits: true,
    };
    let r = convergence_study(c, &config.n_list, &x, &study)?;
    let order = r.fitted_order.map_or("n/a".to_string(), cell);
    let header: Vec<String> = ["N", "mesh", "sup_dist_P", "max_jump", "cost_gap_max", "fitted_order"]
        .iter()
        .map(|h| h.to_string())
        .collect();
    let rows = r.rows.iter().map(|row| {
        vec![
            row.segments.to_string(),
            cell(row.mesh),
            cell(row.sup_dist_p),
            cell(row.max_jump),
            cell(row.cost_gap_max),
            order.clone(),
        ]
    });
    write_csv(&config.out.join("convergence.csv"), &header, rows)?;

    let opt = |v: Option<f64>| -> Value { v.map_or(Value::Text("n/a".into()), Value::Float) };
    s.insert("convergence.n_list", config.n_list.clone());
    s.insert("convergence.fitted_order", opt(r.fitted_order));
    s.insert("convergence.fitted_order_tilde", opt(r.fitted_order_tilde));
    s.insert("convergence.jump_order", opt(r.jump_order));
    s.insert("convergence.sup_dist_p", floats(r.rows.iter().map(|x| x.sup_dist_p)));
    s.insert("convergence.sup_dist_tilde", floats(r.rows.iter().map(|x| x.sup_dist_tilde)));
    s.insert("convergence.max_jump", floats(r.rows.iter().map(|x| x.max_jump)));
    s.insert("convergence.cost_gap_max", floats(r.rows.iter().map(|x| x.cost_gap_max)));
    s.insert("convergence.gap_constants", floats(r.gap_constants()));
    s.insert("convergence.cauchy", floats(r.cauchy.iter().copied()));
    s.insert("convergence.tilde_sup", floats(r.rows.iter().map(|x| x.tilde_sup)));
    s.insert("convergence.tilde_max_slope", floats(r.rows.iter().map(|x| x.tilde_max_slope)));
    s.insert("convergence.bound_sup", floats(r.rows.iter().map(|x| x.bound_sup)));
    s.insert(
        "convergence.failures",
        Value::List(r.failures.iter().map(|(n, e)| Value::Text(format!("N={n}: {e}"))).collect()),
    );
    s.insert("volterra.residual", r.volterra_residual);
    s.insert("volterra.iterations", r.volterra_iterations);
    s.insert("volterra.consistency_max", r.volterra_consistency);
    s.insert("volterra.init_spread", opt(r.init_spread));
    Ok(())
}

fn gap(config: &RunConfig, c: &CoefficientSet, s: &mut Summary) -> Result<()> {
    let pc = c.problem_c().ok_or(Error::GapRequiresProblemC)?;
    let x = config.x.first().copied().unwrap_or(1.0);
    if config.x.len() > 1 {
        return Err(Error::DimensionMismatch("--x must be a single value for gap".into()));
    }
    let closed = inconsistency_gap(pc, config.t, config.tau, x)?;
    let sim = simulated_gap(pc, config.t, config.tau, x, config.step)?;
    s.insert("gap.t", config.t);
    s.insert("gap.tau", config.tau);
    s.insert("gap.x", x);
    s.insert("gap.y", closed.y);
    s.insert("gap.closed_form", closed.gap);
    s.insert("gap.simulated", sim.gap);
    s.insert("gap.abs_diff", (closed.gap - sim.gap).abs());
    s.insert("gap.pre_committed_cost", closed.pre_committed_cost);
    s.insert("gap.reoptimized_value", closed.reoptimized_value);
    Ok(())
}
