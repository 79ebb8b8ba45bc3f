use super::grid::FineGrid;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Vector};
use crate::problem::{CoefficientSet, Partition};

/// Open-loop control sampled at the RK4 stage times (start, midpoint, end)
/// of every fine-grid interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPath {
    nodes: Vec<f64>,
    stages: Vec<[Vector; 3]>,
}

impl ControlPath {
    pub fn new(nodes: Vec<f64>, stages: Vec<[Vector; 3]>) -> Result<Self> {
        if nodes.len() < 2 || stages.len() + 1 != nodes.len() {
            return Err(Error::IncompatibleSampling(format!(
                "{} nodes need {} interval samples, got {}",
                nodes.len(),
                nodes.len().saturating_sub(1),
                stages.len()
            )));
        }
        let m = stages[0][0].len();
        if stages.iter().flatten().any(|u| u.len() != m) {
            return Err(Error::DimensionMismatch("control samples differ in length".into()));
        }
        Ok(ControlPath { nodes, stages })
    }

    /// Samples `f(s, j)` where `j` is the segment owning the interval, so
    /// controls that jump at knots are taken from the correct side.
    pub fn from_fn<F>(grid: &FineGrid, mut f: F) -> Self
    where
        F: FnMut(f64, usize) -> Vector,
    {
        let nodes = grid.nodes().to_vec();
        let stages = (0..grid.intervals())
            .map(|i| {
                let j = grid.segment_of_interval(i);
                let (s0, s1) = (nodes[i], nodes[i + 1]);
                [f(s0, j), f(0.5 * (s0 + s1), j), f(s1, j)]
            })
            .collect();
        ControlPath { nodes, stages }
    }

    pub fn zero(grid: &FineGrid, control_dim: usize) -> Self {
        Self::from_fn(grid, |_, _| Vector::zeros(control_dim))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn stages(&self) -> &[[Vector; 3]] {
        &self.stages
    }

    pub fn control_dim(&self) -> usize {
        self.stages[0][0].len()
    }

    /// Values at the nodes, right-continuous, with the final node taken from
    /// the last interval.
    pub fn at_nodes(&self) -> Vec<Vector> {
        let mut out: Vec<Vector> = self.stages.iter().map(|s| s[0].clone()).collect();
        out.push(self.stages[self.stages.len() - 1][2].clone());
        out
    }
}

/// Cost weights of one player, evaluated at the stage times of its horizon.
pub(crate) struct PlayerWeights {
    start: usize,
    g: Matrix,
    q: Vec<[Matrix; 3]>,
    r: Vec<[Matrix; 3]>,
}

impl PlayerWeights {
    /// Weights of player `k` (1-based), who starts at `t_{k-1}`.
    pub(crate) fn new(c: &CoefficientSet, grid: &FineGrid, k: usize) -> Self {
        let anchor = grid.partition().knot(k - 1);
        let start = grid.knot_node(k - 1);
        let nodes = grid.nodes();
        let mut q = Vec::with_capacity(grid.intervals() - start);
        let mut r = Vec::with_capacity(grid.intervals() - start);
        for i in start..grid.intervals() {
            let (s0, s1) = (nodes[i], nodes[i + 1]);
            let sm = 0.5 * (s0 + s1);
            q.push([0, 1, 2].map(|l| c.q(anchor, [s0, sm, s1][l]).into_inner()));
            r.push([0, 1, 2].map(|l| c.r(anchor, [s0, sm, s1][l]).into_inner()));
        }
        PlayerWeights {
            start,
            g: c.g(anchor).into_inner(),
            q,
            r,
        }
    }
}

/// RK4 on the state together with the running-cost accumulator, from node
/// `from` with state `x`. `control(i, stage, state)` returns the control on
/// interval `i` at stage 0 (start), 1 (midpoint) or 2 (end).
pub(crate) fn simulate<F>(grid: &FineGrid, w: &PlayerWeights, from: usize, x: &Vector, mut control: F) -> f64
where
    F: FnMut(usize, usize, &Vector) -> Vector,
{
    debug_assert!(from <= w.start);
    let mut state = x.clone();
    let mut running = 0.0;
    for i in from..grid.intervals() {
        let h = grid.interval_len(i);
        let (a, b) = grid.dynamics(i);
        let weights = (i >= w.start).then(|| (&w.q[i - w.start], &w.r[i - w.start]));
        let mut eval = |stage: usize, y: &Vector| {
            let u = control(i, stage, y);
            let dy = &a[stage] * y + &b[stage] * &u;
            let dc = weights.map_or(0.0, |(q, r)| y.dot(&(&q[stage] * y)) + u.dot(&(&r[stage] * &u)));
            (dy, dc)
        };
        let (d1, c1) = eval(0, &state);
        let (d2, c2) = eval(1, &(&state + &d1 * (0.5 * h)));
        let (d3, c3) = eval(1, &(&state + &d2 * (0.5 * h)));
        let (d4, c4) = eval(2, &(&state + &d3 * h));
        state += (d1 + d2 * 2.0 + d3 * 2.0 + d4) * (h / 6.0);
        running += (c1 + 2.0 * c2 + 2.0 * c3 + c4) * (h / 6.0);
    }
    running + state.dot(&(&w.g * &state))
}

pub(crate) fn check_control(grid: &FineGrid, c: &CoefficientSet, u: &ControlPath) -> Result<()> {
    if !grid.matches(u.nodes()) {
        return Err(Error::IncompatibleSampling(format!(
            "control has {} nodes, the grid has {}",
            u.nodes().len(),
            grid.nodes().len()
        )));
    }
    if u.control_dim() != c.control_dim() {
        return Err(Error::DimensionMismatch(format!(
            "control has {} components, expected {}",
            u.control_dim(),
            c.control_dim()
        )));
    }
    Ok(())
}

/// `J_k(u) = ⟨G(t_{k-1}) X(T), X(T)⟩ + ∫_{t_{k-1}}^T ⟨Q(t_{k-1},s)X,X⟩ + ⟨R(t_{k-1},s)u,u⟩ ds`
/// along the frozen state equation driven by `u` from `X(0) = x`.
pub fn eval_game_cost(
    c: &CoefficientSet,
    partition: &Partition,
    k: usize,
    u: &ControlPath,
    x: &Vector,
    step: f64,
) -> Result<f64> {
    if k == 0 || k > partition.segments() {
        return Err(Error::InvalidArgument(format!(
            "player {k} outside 1..={}",
            partition.segments()
        )));
    }
    if x.len() != c.state_dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state has {} components, expected {}",
            x.len(),
            c.state_dim()
        )));
    }
    let grid = FineGrid::new(c, partition, step)?;
    check_control(&grid, c, u)?;
    let w = PlayerWeights::new(c, &grid, k);
    Ok(simulate(&grid, &w, 0, x, |i, stage, _| u.stages()[i][stage].clone()))
}
