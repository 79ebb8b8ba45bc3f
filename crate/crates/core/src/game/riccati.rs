use super::cost::{check_control, simulate, ControlPath, PlayerWeights};
use super::grid::FineGrid;
use crate::error::{Error, Result};
use crate::numerics::{
    frobenius, hermite, rk4_linear_propagator, simpson_interval, symmetric_eigenvalues, symmetrize, Matrix,
    SymMatrix, Vector,
};
use crate::parallel::map_range;
use crate::problem::{CoefficientSet, Partition};

/// Cholesky inverse of a control weight, refusing weights with
/// `λ_min < 1e-12`.
pub(crate) fn control_inverse(r: &SymMatrix, s: f64) -> Result<Matrix> {
    let min_eigenvalue = symmetric_eigenvalues(r)[0];
    if !(min_eigenvalue >= 1e-12) {
        return Err(Error::ControlWeightSingular { s, min_eigenvalue });
    }
    let chol = r
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or(Error::ControlWeightSingular { s, min_eigenvalue })?;
    Ok(chol.inverse())
}

/// Coefficients frozen at a segment anchor and evaluated at one time.
pub(crate) struct Frozen {
    pub(crate) a: Matrix,
    pub(crate) b: Matrix,
    pub(crate) q: Matrix,
    pub(crate) r_inv: Matrix,
}

impl Frozen {
    pub(crate) fn at(c: &CoefficientSet, anchor: f64, s: f64) -> Result<Self> {
        Ok(Frozen {
            a: c.a(anchor, s),
            b: c.b(anchor, s),
            q: c.q(anchor, s).into_inner(),
            r_inv: control_inverse(&c.r(anchor, s), s)?,
        })
    }

    /// `-(PA + AᵀP + Q - PBR⁻¹BᵀP)`
    pub(crate) fn riccati_rhs(&self, p: &Matrix) -> Matrix {
        let pb = p * &self.b;
        let mut d = -(p * &self.a + self.a.transpose() * p + &self.q - &pb * &self.r_inv * pb.transpose());
        symmetrize(&mut d);
        d
    }

    /// `-(PA + AᵀP + Q)`
    pub(crate) fn lyapunov_rhs(&self, p: &Matrix) -> Matrix {
        let mut d = -(p * &self.a + self.a.transpose() * p + &self.q);
        symmetrize(&mut d);
        d
    }

    pub(crate) fn gain(&self, p: &Matrix) -> Matrix {
        &self.r_inv * self.b.transpose() * p
    }
}

/// Backward RK4 on the nodes of segment `j`, from `terminal` at `t_{j+1}`.
/// Returns values and derivatives in forward order.
pub(crate) fn backward_segment<F>(
    c: &CoefficientSet,
    grid: &FineGrid,
    j: usize,
    terminal: &Matrix,
    rhs: F,
) -> Result<(Vec<Matrix>, Vec<Matrix>)>
where
    F: Fn(&Frozen, &Matrix) -> Matrix,
{
    let anchor = grid.partition().knot(j);
    let first = grid.knot_node(j);
    let m = grid.substeps(j);
    let nodes = &grid.nodes()[first..=first + m];
    let mut values = vec![Matrix::zeros(0, 0); m + 1];
    let mut derivs = vec![Matrix::zeros(0, 0); m + 1];
    values[m] = terminal.clone();
    let mut upper = Frozen::at(c, anchor, nodes[m])?;
    derivs[m] = rhs(&upper, terminal);
    for l in (0..m).rev() {
        let (s0, s1) = (nodes[l], nodes[l + 1]);
        let h = s1 - s0;
        let mid = Frozen::at(c, anchor, 0.5 * (s0 + s1))?;
        let lower = Frozen::at(c, anchor, s0)?;
        let y = &values[l + 1];
        let k1 = &derivs[l + 1];
        let k2 = rhs(&mid, &(y - k1 * (0.5 * h)));
        let k3 = rhs(&mid, &(y - &k2 * (0.5 * h)));
        let k4 = rhs(&lower, &(y - &k3 * h));
        let mut next = y - (k1 + &k2 * 2.0 + &k3 * 2.0 + &k4) * (h / 6.0);
        symmetrize(&mut next);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::RiccatiDivergence { t: s0 });
        }
        derivs[l] = rhs(&lower, &next);
        values[l] = next;
        upper = lower;
    }
    drop(upper);
    Ok((values, derivs))
}

/// One segment of the piecewise Riccati path, sampled on its fine nodes
/// including both knots.
#[derive(Debug, Clone)]
pub struct RiccatiSegment {
    pub times: Vec<f64>,
    pub values: Vec<SymMatrix>,
    pub(crate) derivs: Vec<Matrix>,
}

impl RiccatiSegment {
    /// Hermite interpolation on the segment; `t` is clamped to its span.
    pub fn value(&self, t: f64) -> SymMatrix {
        let m = self.times.len() - 1;
        let h = (self.times[m] - self.times[0]) / m as f64;
        let l = (((t - self.times[0]) / h).floor().max(0.0) as usize).min(m - 1);
        let width = self.times[l + 1] - self.times[l];
        let theta = ((t - self.times[l]) / width).clamp(0.0, 1.0);
        SymMatrix::symmetrized(hermite(
            &self.values[l],
            &self.values[l + 1],
            &self.derivs[l],
            &self.derivs[l + 1],
            width,
            theta,
        ))
    }
}

/// Piecewise Riccati solution with the jumps at interior knots.
#[derive(Debug, Clone)]
pub struct PiecewiseRiccatiSolution {
    partition: Partition,
    segments: Vec<RiccatiSegment>,
    terminal_weights: Vec<SymMatrix>,
    jumps: Vec<SymMatrix>,
}

impl PiecewiseRiccatiSolution {
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// Segment `j` covers `[t_j, t_{j+1}]` (0-based).
    pub fn segment(&self, j: usize) -> &RiccatiSegment {
        &self.segments[j]
    }

    pub fn segments(&self) -> &[RiccatiSegment] {
        &self.segments
    }

    /// `P(t_{j+1} - 0)` for segment `j`.
    pub fn terminal_weights(&self) -> &[SymMatrix] {
        &self.terminal_weights
    }

    /// `ΔP(t_k) = P(t_k + 0) - P(t_k - 0)` for `k = 1..N-1`, at index `k - 1`.
    pub fn jumps(&self) -> &[SymMatrix] {
        &self.jumps
    }

    pub fn max_jump(&self) -> f64 {
        self.jumps.iter().map(|j| frobenius(j)).fold(0.0, f64::max)
    }

    /// Observed constant in `max_k ‖ΔP(t_k)‖ ≤ K ‖Δ‖`.
    pub fn jump_constant(&self) -> f64 {
        self.max_jump() / self.partition.mesh()
    }

    /// `P(t_k - 0)`, `k = 1..=N`.
    pub fn left_limit(&self, k: usize) -> &SymMatrix {
        self.segments[k - 1].values.last().expect("non-empty segment")
    }

    /// `P(t_k + 0)`, `k = 0..N-1`.
    pub fn right_limit(&self, k: usize) -> &SymMatrix {
        &self.segments[k].values[0]
    }

    /// `P(t)` with the right-open convention at knots and `P(T)` from the
    /// last segment.
    pub fn value_at(&self, t: f64) -> Result<SymMatrix> {
        let j = self.partition.segment_of(t)?;
        Ok(self.segments[j].value(t))
    }

    /// Value on segment `j` at `t`, which may be its right knot.
    pub fn value_on_segment(&self, j: usize, t: f64) -> SymMatrix {
        self.segments[j].value(t)
    }
}

pub(crate) struct IntervalData {
    /// feedback gains `R⁻¹BᵀP` at fractions 0, 1/4, 1/2, 1
    pub(crate) gains: [Matrix; 4],
    pub(crate) full: Matrix,
    pub(crate) half: Matrix,
}

fn interval_data(c: &CoefficientSet, grid: &FineGrid, j: usize, seg: &RiccatiSegment) -> Result<Vec<IntervalData>> {
    let anchor = grid.partition().knot(j);
    let first = grid.knot_node(j);
    (0..grid.substeps(j))
        .map(|l| {
            let (s0, s1) = (seg.times[l], seg.times[l + 1]);
            let h = s1 - s0;
            let mut gains: [Matrix; 4] = Default::default();
            let mut drift: [Matrix; 4] = Default::default();
            for (idx, &theta) in [0.0, 0.25, 0.5, 1.0].iter().enumerate() {
                let p = if theta == 0.0 {
                    seg.values[l].as_matrix().clone()
                } else if theta == 1.0 {
                    seg.values[l + 1].as_matrix().clone()
                } else {
                    hermite(&seg.values[l], &seg.values[l + 1], &seg.derivs[l], &seg.derivs[l + 1], h, theta)
                };
                let f = Frozen::at(c, anchor, s0 + theta * h)?;
                let k = f.gain(&p);
                drift[idx] = &f.a - &f.b * &k;
                gains[idx] = k;
            }
            debug_assert_eq!(grid.segment_of_interval(first + l), j);
            Ok(IntervalData {
                full: rk4_linear_propagator(&drift[0], &drift[2], &drift[3], h),
                half: rk4_linear_propagator(&drift[0], &drift[1], &drift[2], 0.5 * h),
                gains,
            })
        })
        .collect()
}

struct AnchorTransition {
    start: usize,
    phi: Vec<Matrix>,
    mid: Vec<Matrix>,
}

fn build_anchor(grid: &FineGrid, j: usize, ints: &[IntervalData], next: Option<&AnchorTransition>) -> AnchorTransition {
    let start = grid.knot_node(j);
    let n = ints[0].full.nrows();
    let mut phi = vec![Matrix::identity(n, n)];
    let mut mid = Vec::new();
    for d in ints {
        let cur = phi.last().expect("non-empty");
        mid.push(&d.half * cur);
        let p = &d.full * cur;
        phi.push(p);
    }
    if let Some(next) = next {
        let end = phi.last().expect("non-empty").clone();
        let tail: Vec<Matrix> = map_range(next.phi.len() - 1, |i| &next.phi[i + 1] * &end);
        let tail_mid: Vec<Matrix> = map_range(next.mid.len(), |i| &next.mid[i] * &end);
        phi.extend(tail);
        mid.extend(tail_mid);
    }
    AnchorTransition { start, phi, mid }
}

/// `Φ(T;t_{j+1})ᵀ G(t_j) Φ(T;t_{j+1}) + ∫ Φᵀ[Q(t_j,·) + KᵀR(t_j,·)K]Φ` over `[t_{j+1}, T]`.
fn terminal_weight(
    c: &CoefficientSet,
    grid: &FineGrid,
    j: usize,
    next: &AnchorTransition,
    ints: &[Vec<IntervalData>],
) -> Matrix {
    let anchor = grid.partition().knot(j);
    let nodes = grid.nodes();
    let phi_t = next.phi.last().expect("non-empty");
    let g = c.g(anchor);
    let count = grid.intervals() - next.start;
    let pieces: Vec<Matrix> = map_range(count, |l| {
        let i = next.start + l;
        let seg = grid.segment_of_interval(i);
        let d = &ints[seg][i - grid.knot_node(seg)];
        let (s0, s1) = (nodes[i], nodes[i + 1]);
        let integrand = |s: f64, phi: &Matrix, k: &Matrix| -> Matrix {
            let w = c.q(anchor, s).into_inner() + k.transpose() * c.r(anchor, s).as_matrix() * k;
            phi.transpose() * w * phi
        };
        let f0 = integrand(s0, &next.phi[l], &d.gains[0]);
        let fm = integrand(0.5 * (s0 + s1), &next.mid[l], &d.gains[2]);
        let f1 = integrand(s1, &next.phi[l + 1], &d.gains[3]);
        simpson_interval(&f0, &fm, &f1, s1 - s0)
    });
    let mut w = phi_t.transpose() * g.as_matrix() * phi_t;
    for p in &pieces {
        w += p;
    }
    symmetrize(&mut w);
    w
}

/// Transition matrices `Φ(s;t_k)` and feedback maps `Ψ(s;t_k) = -R⁻¹BᵀP(s)Φ(s;t_k)`
/// for every anchor, sampled on the fine nodes in `[t_k, T]`.
#[derive(Debug, Clone)]
pub struct TransitionFamily {
    nodes: Vec<f64>,
    start: Vec<usize>,
    phi: Vec<Vec<Matrix>>,
    psi: Vec<Vec<Matrix>>,
}

impl TransitionFamily {
    pub fn anchors(&self) -> usize {
        self.phi.len()
    }

    /// Sample times of anchor `k`, starting at `t_k`.
    pub fn times(&self, k: usize) -> &[f64] {
        &self.nodes[self.start[k]..]
    }

    pub fn phi(&self, k: usize) -> &[Matrix] {
        &self.phi[k]
    }

    pub fn psi(&self, k: usize) -> &[Matrix] {
        &self.psi[k]
    }

    /// `Φ(nodes[node]; t_k)` for a global fine-grid node index.
    pub fn phi_at_node(&self, k: usize, node: usize) -> &Matrix {
        &self.phi[k][node - self.start[k]]
    }
}

/// Equilibrium state and control on the fine nodes, with the players' costs.
#[derive(Debug, Clone)]
pub struct EquilibriumPair {
    pub x: Vector,
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    /// right-continuous at knots
    pub controls: Vec<Vector>,
    /// `J_k` for `k = 1..=N`
    pub costs: Vec<f64>,
    control_path: ControlPath,
    closed_loop_gap: f64,
}

impl EquilibriumPair {
    /// The equilibrium control as an open-loop path on the solver grid.
    pub fn control_path(&self) -> &ControlPath {
        &self.control_path
    }

    /// Largest distance between the state from a direct closed-loop
    /// integration and `Φ(s;0)x`.
    pub fn closed_loop_gap(&self) -> f64 {
        self.closed_loop_gap
    }
}

/// Output of [`solve_game`].
pub struct GameSolution {
    pub grid: FineGrid,
    pub riccati: PiecewiseRiccatiSolution,
    pub transitions: TransitionFamily,
    pub equilibrium: EquilibriumPair,
    pub(crate) intervals: Vec<IntervalData>,
}

impl GameSolution {
    /// Gain on interval `i` at stage 0 (start), 1 (midpoint) or 2 (end).
    pub(crate) fn stage_gain(&self, i: usize, stage: usize) -> &Matrix {
        &self.intervals[i].gains[[0, 2, 3][stage]]
    }

    /// Gain at node `i`, right-continuous.
    pub fn node_gain(&self, i: usize) -> &Matrix {
        if i < self.intervals.len() {
            &self.intervals[i].gains[0]
        } else {
            &self.intervals[i - 1].gains[3]
        }
    }

    /// Largest `‖ū + R⁻¹BᵀPX̄‖` over the nodes, with the coefficients
    /// re-evaluated from scratch.
    pub fn feedback_residual(&self, c: &CoefficientSet) -> Result<f64> {
        let eq = &self.equilibrium;
        let mut worst: f64 = 0.0;
        for (i, (&s, x)) in eq.times.iter().zip(&eq.states).enumerate() {
            let j = self.grid.segment_of_node(i);
            let anchor = self.grid.partition().knot(j);
            let p = self.riccati.value_on_segment(j, s);
            let r_inv = control_inverse(&c.r(anchor, s), s)?;
            let u = -(r_inv * c.b(anchor, s).transpose() * p.as_matrix() * x);
            worst = worst.max((&u - &eq.controls[i]).norm());
        }
        Ok(worst)
    }

    /// `J_k(u)` for an open-loop control on this solution's grid, from the
    /// same initial state.
    pub fn player_cost(&self, c: &CoefficientSet, k: usize, u: &ControlPath) -> Result<f64> {
        check_control(&self.grid, c, u)?;
        if k == 0 || k > self.grid.partition().segments() {
            return Err(Error::InvalidArgument(format!("player {k} outside 1..={}", self.grid.partition().segments())));
        }
        let w = PlayerWeights::new(c, &self.grid, k);
        Ok(simulate(&self.grid, &w, 0, &self.equilibrium.x, |i, stage, _| u.stages()[i][stage].clone()))
    }

    /// Largest `|J_k - ⟨P(t_{k-1}+0)X̄(t_{k-1}), X̄(t_{k-1})⟩|` over players.
    pub fn value_identity_gap(&self) -> f64 {
        let eq = &self.equilibrium;
        (0..self.riccati.partition.segments())
            .map(|j| {
                let x = &eq.states[self.grid.knot_node(j)];
                (eq.costs[j] - self.riccati.right_limit(j).quadratic_form(x)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Backward induction over the partition: Riccati segments with their
/// effective terminal weights, transition families, and the equilibrium pair
/// started at `x`.
pub fn solve_game(c: &CoefficientSet, partition: &Partition, x: &Vector, step: f64) -> Result<GameSolution> {
    if x.len() != c.state_dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state has {} components, expected {}",
            x.len(),
            c.state_dim()
        )));
    }
    let grid = FineGrid::new(c, partition, step)?;
    let n_seg = partition.segments();
    let mut segments: Vec<Option<RiccatiSegment>> = (0..n_seg).map(|_| None).collect();
    let mut ints: Vec<Vec<IntervalData>> = (0..n_seg).map(|_| Vec::new()).collect();
    let mut terminal_weights: Vec<Option<SymMatrix>> = vec![None; n_seg];
    let mut next: Option<AnchorTransition> = None;
    let mut anchors: Vec<Option<AnchorTransition>> = (0..n_seg).map(|_| None).collect();

    for j in (0..n_seg).rev() {
        let g = match &next {
            None => c.g(partition.knot(n_seg - 1)).into_inner(),
            Some(next) => terminal_weight(c, &grid, j, next, &ints),
        };
        let (values, derivs) = backward_segment(c, &grid, j, &g, |f, p| f.riccati_rhs(p))?;
        let first = grid.knot_node(j);
        let seg = RiccatiSegment {
            times: grid.nodes()[first..=first + grid.substeps(j)].to_vec(),
            values: values.into_iter().map(SymMatrix::symmetrized).collect(),
            derivs,
        };
        ints[j] = interval_data(c, &grid, j, &seg)?;
        let anchor = build_anchor(&grid, j, &ints[j], next.as_ref());
        if let Some(prev) = next.take() {
            anchors[j + 1] = Some(prev);
        }
        next = Some(anchor);
        terminal_weights[j] = Some(SymMatrix::symmetrized(g));
        segments[j] = Some(seg);
    }
    anchors[0] = next;

    let segments: Vec<RiccatiSegment> = segments.into_iter().map(|s| s.expect("solved")).collect();
    let jumps = (1..n_seg)
        .map(|k| {
            let d = segments[k].values[0].as_matrix() - segments[k - 1].values.last().expect("non-empty").as_matrix();
            SymMatrix::symmetrized(d)
        })
        .collect();
    let riccati = PiecewiseRiccatiSolution {
        partition: partition.clone(),
        segments,
        terminal_weights: terminal_weights.into_iter().map(|g| g.expect("solved")).collect(),
        jumps,
    };
    let intervals: Vec<IntervalData> = ints.into_iter().flatten().collect();
    let anchors: Vec<AnchorTransition> = anchors.into_iter().map(|a| a.expect("solved")).collect();

    let nodes = grid.nodes().to_vec();
    let node_gain = |i: usize| -> &Matrix {
        if i < intervals.len() {
            &intervals[i].gains[0]
        } else {
            &intervals[i - 1].gains[3]
        }
    };
    let psi: Vec<Vec<Matrix>> = anchors
        .iter()
        .map(|a| {
            a.phi
                .iter()
                .enumerate()
                .map(|(l, phi)| -(node_gain(a.start + l) * phi))
                .collect()
        })
        .collect();

    // equilibrium pair from the representation X̄(s) = Φ(s;0)x
    let root = &anchors[0];
    let states: Vec<Vector> = root.phi.iter().map(|phi| phi * x).collect();
    let controls: Vec<Vector> = states
        .iter()
        .enumerate()
        .map(|(i, s)| -(node_gain(i) * s))
        .collect();
    let stages: Vec<[Vector; 3]> = (0..intervals.len())
        .map(|i| {
            let d = &intervals[i];
            let xm = &root.mid[i] * x;
            [
                -(&d.gains[0] * &states[i]),
                -(&d.gains[2] * xm),
                -(&d.gains[3] * &states[i + 1]),
            ]
        })
        .collect();
    let control_path = ControlPath::new(nodes.clone(), stages)?;
    let closed_loop_gap = closed_loop_check(c, &grid, &riccati, x, &states)?;
    let costs = map_range(n_seg, |j| {
        let w = PlayerWeights::new(c, &grid, j + 1);
        simulate(&grid, &w, 0, x, |i, stage, _| control_path.stages()[i][stage].clone())
    });

    let transitions = TransitionFamily {
        nodes: nodes.clone(),
        start: anchors.iter().map(|a| a.start).collect(),
        phi: anchors.into_iter().map(|a| a.phi).collect(),
        psi,
    };
    Ok(GameSolution {
        equilibrium: EquilibriumPair {
            x: x.clone(),
            times: nodes,
            states,
            controls,
            costs,
            control_path,
            closed_loop_gap,
        },
        grid,
        riccati,
        transitions,
        intervals,
    })
}

/// Integrates `x' = (A - BR⁻¹BᵀP)x` directly, evaluating the feedback from
/// the interpolated Riccati path at each stage, and returns the largest
/// deviation from `states`.
fn closed_loop_check(
    c: &CoefficientSet,
    grid: &FineGrid,
    riccati: &PiecewiseRiccatiSolution,
    x: &Vector,
    states: &[Vector],
) -> Result<f64> {
    let nodes = grid.nodes();
    let mut y = x.clone();
    let mut worst: f64 = 0.0;
    for i in 0..grid.intervals() {
        let j = grid.segment_of_interval(i);
        let anchor = grid.partition().knot(j);
        let drift = |s: f64| -> Result<Matrix> {
            let f = Frozen::at(c, anchor, s)?;
            let p = riccati.value_on_segment(j, s);
            Ok(&f.a - &f.b * f.gain(p.as_matrix()))
        };
        let (s0, s1) = (nodes[i], nodes[i + 1]);
        let h = s1 - s0;
        let (f0, fm, f1) = (drift(s0)?, drift(0.5 * (s0 + s1))?, drift(s1)?);
        let k1 = &f0 * &y;
        let k2 = &fm * (&y + &k1 * (0.5 * h));
        let k3 = &fm * (&y + &k2 * (0.5 * h));
        let k4 = &f1 * (&y + &k3 * h);
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        worst = worst.max((&y - &states[i + 1]).norm());
    }
    Ok(worst)
}
