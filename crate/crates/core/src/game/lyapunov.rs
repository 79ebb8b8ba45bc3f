use super::riccati::{backward_segment, GameSolution, RiccatiSegment};
use crate::error::Result;
use crate::numerics::{frobenius, symmetric_eigenvalues, SymMatrix};
use crate::problem::{CoefficientSet, Partition};

/// Lyapunov comparison solutions for a solved game.
///
/// `p0` solves `P' + PA + AᵀP + Q = 0` on each segment with the game's
/// effective terminal weights; `p0_bar` is one continuous backward solve from
/// `G(t_{N-1})` at `T` with the frozen drift and running weight.
#[derive(Debug, Clone)]
pub struct LyapunovBounds {
    partition: Partition,
    pub p0: Vec<RiccatiSegment>,
    pub p0_bar: Vec<RiccatiSegment>,
}

impl LyapunovBounds {
    pub fn p0_at(&self, t: f64) -> Result<SymMatrix> {
        let j = self.partition.segment_of(t)?;
        Ok(self.p0[j].value(t))
    }

    pub fn p0_bar_at(&self, t: f64) -> Result<SymMatrix> {
        let j = self.partition.segment_of(t)?;
        Ok(self.p0_bar[j].value(t))
    }

    /// Largest `‖P̄₀‖` over the samples.
    pub fn p0_bar_sup(&self) -> f64 {
        self.p0_bar
            .iter()
            .flat_map(|s| s.values.iter())
            .map(|p| frobenius(p))
            .fold(0.0, f64::max)
    }
}

fn segment(game: &GameSolution, j: usize, values: Vec<crate::numerics::Matrix>, derivs: Vec<crate::numerics::Matrix>) -> RiccatiSegment {
    RiccatiSegment {
        times: game.riccati.segment(j).times.clone(),
        values: values.into_iter().map(SymMatrix::symmetrized).collect(),
        derivs,
    }
}

pub fn solve_lyapunov_bounds(c: &CoefficientSet, game: &GameSolution) -> Result<LyapunovBounds> {
    let grid = &game.grid;
    let n_seg = grid.partition().segments();
    let mut p0 = Vec::with_capacity(n_seg);
    for j in 0..n_seg {
        let g = game.riccati.terminal_weights()[j].as_matrix();
        let (values, derivs) = backward_segment(c, grid, j, g, |f, p| f.lyapunov_rhs(p))?;
        p0.push(segment(game, j, values, derivs));
    }
    let mut p0_bar: Vec<RiccatiSegment> = Vec::with_capacity(n_seg);
    let mut terminal = c.g(grid.partition().knot(n_seg - 1)).into_inner();
    for j in (0..n_seg).rev() {
        let (values, derivs) = backward_segment(c, grid, j, &terminal, |f, p| f.lyapunov_rhs(p))?;
        terminal = values[0].clone();
        p0_bar.push(segment(game, j, values, derivs));
    }
    p0_bar.reverse();
    Ok(LyapunovBounds {
        partition: grid.partition().clone(),
        p0,
        p0_bar,
    })
}

/// Smallest eigenvalues in the chain `0 ≤ P ≤ P₀ ≤ P̄₀` and of the jumps,
/// each divided by `max(1, ‖reference‖)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport {
    pub min_p: f64,
    pub min_p0_minus_p: f64,
    pub min_p0_bar_minus_p0: f64,
    /// `+∞` without interior knots
    pub min_jump: f64,
}

impl SandwichReport {
    /// The chain up to `P₀` always, and `P₀ ≤ P̄₀` plus nonnegative jumps
    /// when the monotonicity assumption holds.
    pub fn holds(&self, tol: f64, monotone: bool) -> bool {
        let base = self.min_p >= -tol && self.min_p0_minus_p >= -tol;
        base && (!monotone || (self.min_p0_bar_minus_p0 >= -tol && self.min_jump >= -tol))
    }
}

fn scaled_min(m: &crate::numerics::Matrix, reference: &crate::numerics::Matrix) -> f64 {
    symmetric_eigenvalues(&SymMatrix::symmetrized(m.clone()))[0] / frobenius(reference).max(1.0)
}

pub fn sandwich_report(game: &GameSolution, bounds: &LyapunovBounds) -> SandwichReport {
    let mut report = SandwichReport {
        min_p: f64::INFINITY,
        min_p0_minus_p: f64::INFINITY,
        min_p0_bar_minus_p0: f64::INFINITY,
        min_jump: f64::INFINITY,
    };
    for (j, seg) in game.riccati.segments().iter().enumerate() {
        for (l, p) in seg.values.iter().enumerate() {
            let p0 = bounds.p0[j].values[l].as_matrix();
            let bar = bounds.p0_bar[j].values[l].as_matrix();
            report.min_p = report.min_p.min(scaled_min(p, p));
            report.min_p0_minus_p = report.min_p0_minus_p.min(scaled_min(&(p0 - p.as_matrix()), p0));
            report.min_p0_bar_minus_p0 = report.min_p0_bar_minus_p0.min(scaled_min(&(bar - p0), bar));
        }
    }
    for (k, jump) in game.riccati.jumps().iter().enumerate() {
        let right = game.riccati.right_limit(k + 1);
        report.min_jump = report.min_jump.min(scaled_min(jump, right));
    }
    report
}
