use super::equilibrium::equilibrium_from_volterra;
use super::jumps::remove_jumps;
use super::solver::{solve_volterra, VolterraConfig, VolterraInit, VolterraSolution};
use crate::error::{Error, Result};
use crate::game::{solve_game, solve_lyapunov_bounds, ControlPath, GameSolution};
use crate::numerics::{frobenius, Vector};
use crate::problem::{CoefficientSet, Partition};

#[derive(Debug, Clone)]
pub struct ConvergenceConfig {
    /// fine-grid step of every game solve
    pub step: f64,
    pub volterra: VolterraConfig,
    /// also solve the limit system from the zero iterate and record how far
    /// the two fixed points are apart
    pub compare_inits: bool,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            step: 1e-3,
            volterra: VolterraConfig::default(),
            compare_inits: true,
        }
    }
}

/// Measurements for one partition `Δ_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub segments: usize,
    pub mesh: f64,
    /// `‖P^Δ - P‖_∞`, both one-sided limits at knots included
    pub sup_dist_p: f64,
    /// `‖P̃^Δ - P‖_∞`
    pub sup_dist_tilde: f64,
    pub max_jump: f64,
    /// `J_k(ū) - J_k(ū^Δ)` for `k = 1..=N`
    pub cost_gaps: Vec<f64>,
    pub cost_gap_max: f64,
    pub tilde_sup: f64,
    pub tilde_max_slope: f64,
    /// `sup ‖P̄₀^Δ‖`, the a-priori bound for `P̃^Δ`
    pub bound_sup: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// partitions whose game solve failed, with the error message
    pub failures: Vec<(usize, String)>,
    /// `‖P̃^{Δ_{next}} - P̃^{Δ_N}‖_∞` between consecutive rows
    pub cauchy: Vec<f64>,
    /// slope of `log sup_dist_p` against `log mesh`; `None` with fewer than
    /// two usable rows
    pub fitted_order: Option<f64>,
    pub fitted_order_tilde: Option<f64>,
    pub jump_order: Option<f64>,
    pub volterra_residual: f64,
    pub volterra_iterations: usize,
    pub volterra_consistency: f64,
    /// `sup ‖P_a - P_b‖` between fixed points from different initializations
    pub init_spread: Option<f64>,
}

impl ConvergenceReport {
    /// `max_k [J_k(ū) - J_k(ū^Δ)] / ‖Δ‖` per row.
    pub fn gap_constants(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.cost_gap_max / r.mesh).collect()
    }
}

/// Least-squares slope of `log y` against `log x` over positive pairs.
pub fn fit_order(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

fn measure(c: &CoefficientSet, game: &GameSolution, limit: &VolterraSolution, x: &Vector) -> Result<ConvergenceRow> {
    let riccati = &game.riccati;
    let tilde = remove_jumps(riccati);
    let partition = riccati.partition();
    let mut sup_dist_p: f64 = 0.0;
    let mut sup_dist_tilde: f64 = 0.0;
    for (t, p) in limit.anchors.iter().zip(&limit.p) {
        sup_dist_p = sup_dist_p.max(frobenius(&(riccati.value_at(*t)?.as_matrix() - p.as_matrix())));
        sup_dist_tilde = sup_dist_tilde.max(frobenius(&(tilde.value_at(*t)?.as_matrix() - p.as_matrix())));
    }
    for k in 1..partition.segments() {
        let p = limit.p_at(partition.knot(k));
        sup_dist_p = sup_dist_p.max(frobenius(&(riccati.left_limit(k).as_matrix() - p.as_matrix())));
    }

    let eq = equilibrium_from_volterra(limit, x);
    let u = ControlPath::from_fn(&game.grid, |s, _| eq.control_at(s));
    let cost_gaps = (1..=partition.segments())
        .map(|k| Ok(game.player_cost(c, k, &u)? - game.equilibrium.costs[k - 1]))
        .collect::<Result<Vec<f64>>>()?;
    let bounds = solve_lyapunov_bounds(c, game)?;
    Ok(ConvergenceRow {
        segments: partition.segments(),
        mesh: partition.mesh(),
        sup_dist_p,
        sup_dist_tilde,
        max_jump: riccati.max_jump(),
        cost_gap_max: cost_gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        cost_gaps,
        tilde_sup: tilde.sup_norm(),
        tilde_max_slope: tilde.max_slope(),
        bound_sup: bounds.p0_bar_sup(),
    })
}

/// Solves the limit system once, then the game on uniform partitions with
/// `N` segments for each entry of `n_list`, comparing each against the limit.
pub fn convergence_study(
    c: &CoefficientSet,
    n_list: &[usize],
    x: &Vector,
    config: &ConvergenceConfig,
) -> Result<ConvergenceReport> {
    if n_list.is_empty() || n_list.contains(&0) || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "segment counts must be positive and strictly increasing".into(),
        ));
    }
    let mut vconf = config.volterra.clone();
    vconf.init_segments = n_list[0];
    vconf.init_step = config.step;
    let limit = solve_volterra(c, &vconf)?;
    let init_spread = if config.compare_inits && vconf.init != VolterraInit::Zero {
        let zero = solve_volterra(c, &VolterraConfig { init: VolterraInit::Zero, ..vconf.clone() })?;
        Some(
            zero.p
                .iter()
                .zip(&limit.p)
                .map(|(a, b)| frobenius(&(a.as_matrix() - b.as_matrix())))
                .fold(0.0, f64::max),
        )
    } else {
        None
    };

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut tildes = Vec::new();
    for &n in n_list {
        let outcome = Partition::uniform(n, c.horizon())
            .and_then(|p| solve_game(c, &p, x, config.step))
            .and_then(|game| measure(c, &game, &limit, x).map(|row| (row, remove_jumps(&game.riccati))));
        match outcome {
            Ok((row, tilde)) => {
                rows.push(row);
                tildes.push(tilde);
            }
            Err(e) => failures.push((n, e.to_string())),
        }
    }
    let mut cauchy = Vec::new();
    for pair in tildes.windows(2) {
        let (coarse, fine) = (&pair[0], &pair[1]);
        let mut d: f64 = 0.0;
        for (t, v) in fine.times.iter().zip(&fine.values) {
            d = d.max(frobenius(&(coarse.value_at(*t)?.as_matrix() - v.as_matrix())));
        }
        cauchy.push(d);
    }
    let mesh: Vec<f64> = rows.iter().map(|r| r.mesh).collect();
    let column = |f: fn(&ConvergenceRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    Ok(ConvergenceReport {
        fitted_order: fit_order(&mesh, &column(|r| r.sup_dist_p)),
        fitted_order_tilde: fit_order(&mesh, &column(|r| r.sup_dist_tilde)),
        jump_order: fit_order(&mesh, &column(|r| r.max_jump)),
        rows,
        failures,
        cauchy,
        volterra_residual: limit.residual,
        volterra_iterations: limit.iterations,
        volterra_consistency: limit.max_consistency(),
        init_spread,
    })
}
