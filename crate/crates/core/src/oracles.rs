//! Closed-form results for the scalar problem with a time-dependent terminal
//! weight, and the classical single Riccati solve for time-consistent data.

use crate::error::{Error, Result};
use crate::numerics::{integrate_matrix_ode, symmetrize, Matrix, MatrixPath};
use crate::problem::{CoefficientSet, Partition, ScalarFn};

/// `dX = u ds` on `[t, T]` with cost `∫ u² ds + h(t) X(T)²`, `h ≥ δ > 0`.
#[derive(Debug, Clone)]
pub struct ScalarProblemC {
    horizon: f64,
    h: ScalarFn,
}

impl ScalarProblemC {
    pub fn new(h: ScalarFn, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        Ok(ScalarProblemC { horizon, h })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn h(&self, t: f64) -> f64 {
        self.h.eval(t)
    }

    pub fn weight(&self) -> &ScalarFn {
        &self.h
    }
}

/// `P(s; t) = h(t) / (1 + h(t)(T - s))`, the Riccati solution of the
/// problem started at `t`.
pub fn pre_committed_riccati(pc: &ScalarProblemC, t: f64, s: f64) -> Result<f64> {
    if s < t {
        return Err(Error::InvalidSpan { t, s });
    }
    if t < 0.0 || s > pc.horizon {
        return Err(Error::OutOfHorizon(if t < 0.0 { t } else { s }));
    }
    let h = pc.h(t);
    Ok(h / (1.0 + h * (pc.horizon - s)))
}

/// Optimal pair of the problem started at `(t, x)`: the control is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreCommittedPair {
    pub t: f64,
    pub x: f64,
    pub horizon: f64,
    pub weight: f64,
    pub control: f64,
}

impl PreCommittedPair {
    /// `X̄(s) = x (1 + h(t)(T - s)) / (1 + h(t)(T - t))`
    pub fn state(&self, s: f64) -> f64 {
        let h = self.weight;
        self.x * (1.0 + h * (self.horizon - s)) / (1.0 + h * (self.horizon - self.t))
    }
}

pub fn pre_committed_pair(pc: &ScalarProblemC, t: f64, x: f64) -> Result<PreCommittedPair> {
    if !(0.0..pc.horizon).contains(&t) {
        return Err(Error::OutOfHorizon(t));
    }
    let h = pc.h(t);
    Ok(PreCommittedPair {
        t,
        x,
        horizon: pc.horizon,
        weight: h,
        control: -x * h / (1.0 + h * (pc.horizon - t)),
    })
}

/// Cost of continuing the pre-committed control from `τ` against the value
/// of re-optimizing at `τ` with the weight `h(τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapResult {
    pub t: f64,
    pub tau: f64,
    pub x: f64,
    /// `X̄(τ; t, x)`
    pub y: f64,
    pub pre_committed_cost: f64,
    pub reoptimized_value: f64,
    pub gap: f64,
}

fn check_gap_order(pc: &ScalarProblemC, t: f64, tau: f64) -> Result<()> {
    if tau <= t {
        return Err(Error::InvalidOrder { t, tau });
    }
    if t < 0.0 {
        return Err(Error::OutOfHorizon(t));
    }
    if tau >= pc.horizon {
        return Err(Error::OutOfHorizon(tau));
    }
    Ok(())
}

/// Closed-form time-inconsistency gap
///
/// `x² (T-τ) [h(τ) - h(t)]² / ([1 + h(τ)(T-τ)] [1 + h(t)(T-t)]²)`.
///
/// Equals the pre-committed cost from `τ` minus the re-optimized value at
/// `X̄(τ)`.
pub fn inconsistency_gap(pc: &ScalarProblemC, t: f64, tau: f64, x: f64) -> Result<GapResult> {
    check_gap_order(pc, t, tau)?;
    let big_t = pc.horizon;
    let (ht, htau) = (pc.h(t), pc.h(tau));
    let d_t = 1.0 + ht * (big_t - t);
    let d_tau = 1.0 + htau * (big_t - tau);
    let pair = pre_committed_pair(pc, t, x)?;
    let y = pair.state(tau);
    let pre_committed_cost = x * x * (ht * ht * (big_t - tau) + htau) / (d_t * d_t);
    let reoptimized_value = htau * y * y / d_tau;
    let gap = x * x * (big_t - tau) * (htau - ht).powi(2) / (d_tau * d_t * d_t);
    Ok(GapResult {
        t,
        tau,
        x,
        y,
        pre_committed_cost,
        reoptimized_value,
        gap,
    })
}

/// The same gap by simulation: run the pre-committed control from `t`,
/// evaluate its cost from `τ` under `h(τ)`, and subtract the value from a
/// numerical Riccati solve at `τ`.
pub fn simulated_gap(pc: &ScalarProblemC, t: f64, tau: f64, x: f64, step: f64) -> Result<GapResult> {
    check_gap_order(pc, t, tau)?;
    let big_t = pc.horizon;
    let u = pre_committed_pair(pc, t, x)?.control;

    // state and accumulated running cost under the constant control
    let y0 = Matrix::from_row_slice(2, 1, &[x, 0.0]);
    let rhs = |_s: f64, _y: &Matrix| Matrix::from_row_slice(2, 1, &[u, u * u]);
    let to_tau = integrate_matrix_ode(rhs, &y0, t, tau, step)?;
    let y = to_tau.last()[(0, 0)];
    let start = Matrix::from_row_slice(2, 1, &[y, 0.0]);
    let to_end = integrate_matrix_ode(rhs, &start, tau, big_t, step)?;
    let end = to_end.last();
    let htau = pc.h(tau);
    let pre_committed_cost = end[(1, 0)] + htau * end[(0, 0)] * end[(0, 0)];

    // p' = p², p(T) = h(τ)
    let riccati = integrate_matrix_ode(
        |_s, p| p.component_mul(p),
        &Matrix::from_element(1, 1, htau),
        big_t,
        tau,
        step,
    )?;
    let reoptimized_value = riccati.last()[(0, 0)] * y * y;
    Ok(GapResult {
        t,
        tau,
        x,
        y,
        pre_committed_cost,
        reoptimized_value,
        gap: pre_committed_cost - reoptimized_value,
    })
}

/// Scalar game recursion on a partition, in closed form.
///
/// Index `j` is the segment `[t_j, t_{j+1}]` played by self `j + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteRecursion {
    pub knots: Vec<f64>,
    /// `P^{j+1}(t_{j+1})`: the effective terminal weight of segment `j`
    pub terminal: Vec<f64>,
    /// `P^{j+1}(t_j)`: the segment's Riccati value at its left end
    pub start: Vec<f64>,
    /// jump at `t_j` for `j = 1..N-1`, stored at index `j - 1`
    pub jumps: Vec<f64>,
}

impl DiscreteRecursion {
    /// `P^{j+1}(s) = g / (1 + g (t_{j+1} - s))` on segment `j`.
    pub fn value(&self, j: usize, s: f64) -> f64 {
        let g = self.terminal[j];
        g / (1.0 + g * (self.knots[j + 1] - s))
    }
}

/// Effective-terminal-weight propagation for the scalar game.
///
/// On segment `j` with terminal weight `g_j` and length `d_j` the closed loop
/// shrinks the state by `f_j = 1/(1 + g_j d_j)` and spends `d_j g_j² f_j²`
/// per unit initial state squared. Self `k` weights the final state with
/// `h(t_{k-1})`, so `g_k = h(t_{k-1}) Π f² + Σ (Π f²) d g² f²` over the later
/// segments.
pub fn discrete_recursion(pc: &ScalarProblemC, partition: &Partition) -> DiscreteRecursion {
    let knots = partition.knots().to_vec();
    let n = partition.segments();
    let mut terminal = vec![0.0; n];
    let mut start = vec![0.0; n];
    // g_j = h(t_j) * a + b, with a = Π f², b = Σ (Π f²) c over later segments
    let mut a = 1.0;
    let mut b = 0.0;
    for j in (0..n).rev() {
        let g = pc.h(knots[j]) * a + b;
        let d = knots[j + 1] - knots[j];
        let f = 1.0 / (1.0 + g * d);
        terminal[j] = g;
        start[j] = g * f;
        let cost = d * g * g * f * f;
        b = cost + f * f * b;
        a *= f * f;
    }
    let jumps = (1..n).map(|j| start[j] - terminal[j - 1]).collect();
    DiscreteRecursion {
        knots,
        terminal,
        start,
        jumps,
    }
}

/// Backward Riccati solve on `[0, T]` with terminal weight `G`, for data that
/// does not depend on its first argument. Samples are returned with time
/// increasing.
pub fn classical_lq_riccati(c: &CoefficientSet, step: f64) -> Result<MatrixPath> {
    if !c.is_time_consistent(11, 1e-12) {
        return Err(Error::NotTimeConsistent(
            "coefficients vary with their first argument".into(),
        ));
    }
    let rhs = |s: f64, p: &Matrix| {
        let a = c.a(0.0, s);
        let b = c.b(0.0, s);
        let q = c.q(0.0, s);
        let r_inv = c
            .r(0.0, s)
            .as_matrix()
            .clone()
            .try_inverse()
            .unwrap_or_else(|| Matrix::from_element(b.ncols(), b.ncols(), f64::NAN));
        let pb = p * &b;
        let mut d = -(p * &a + a.transpose() * p + &*q - &pb * r_inv * pb.transpose());
        symmetrize(&mut d);
        d
    };
    let path = integrate_matrix_ode(rhs, c.g(0.0).as_matrix(), c.horizon(), 0.0, step)?;
    Ok(path.into_forward())
}
