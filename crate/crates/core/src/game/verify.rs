use super::cost::{simulate, PlayerWeights};
use super::riccati::GameSolution;
use crate::numerics::Vector;
use crate::parallel::map_range;
use crate::problem::CoefficientSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// How the other players behave while player `k` deviates on its segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviationMode {
    /// Later players keep their feedback strategies `u = -R⁻¹BᵀP X`.
    Feedback,
    /// Later players replay the equilibrium control path.
    OpenLoop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayerMargin {
    pub k: usize,
    /// min over trials of `J_k(deviation) - J_k(equilibrium)`
    pub min_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub mode: DeviationMode,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub players: Vec<PlayerMargin>,
    pub min_margin: f64,
}

impl DeviationReport {
    pub fn passed(&self) -> bool {
        self.min_margin >= -self.tol
    }
}

/// Cost of player `k` (1-based) when it adds `delta[l]` to its feedback
/// control on the `l`-th fine interval of its segment.
fn deviated_cost(game: &GameSolution, w: &PlayerWeights, k: usize, delta: &[Vector], mode: DeviationMode) -> f64 {
    let grid = &game.grid;
    let own = k - 1;
    let first = grid.knot_node(own);
    let path = game.equilibrium.control_path();
    let x = &game.equilibrium.states[first];
    simulate(grid, w, first, x, |i, stage, y| {
        let j = grid.segment_of_interval(i);
        if j == own {
            -(game.stage_gain(i, stage) * y) + &delta[i - first]
        } else {
            match mode {
                DeviationMode::Feedback => -(game.stage_gain(i, stage) * y),
                DeviationMode::OpenLoop => path.stages()[i][stage].clone(),
            }
        }
    })
}

/// `J_k(deviation) - J_k(equilibrium)` for one perturbation, given per fine
/// interval of player `k`'s segment.
pub fn deviation_margin(c: &CoefficientSet, game: &GameSolution, k: usize, delta: &[Vector], mode: DeviationMode) -> f64 {
    let w = PlayerWeights::new(c, &game.grid, k);
    let zero = vec![Vector::zeros(c.control_dim()); game.grid.substeps(k - 1)];
    deviated_cost(game, &w, k, delta, mode) - deviated_cost(game, &w, k, &zero, mode)
}

/// Random piecewise-constant perturbation: at most 8 pieces aligned to the
/// fine intervals, entries uniform in `[-1, 1]`.
fn random_delta(rng: &mut ChaCha8Rng, substeps: usize, m: usize) -> Vec<Vector> {
    let pieces = rng.gen_range(1..=substeps.min(8));
    let values: Vec<Vector> = (0..pieces)
        .map(|_| Vector::from_fn(m, |_, _| rng.gen_range(-1.0..=1.0)))
        .collect();
    (0..substeps).map(|l| values[l * pieces / substeps].clone()).collect()
}

/// Samples `trials` perturbations per player and reports the worst cost
/// change, with later players holding their feedback strategies.
pub fn verify_equilibrium(c: &CoefficientSet, game: &GameSolution, trials: usize, seed: u64) -> DeviationReport {
    verify_equilibrium_with(c, game, trials, seed, DeviationMode::Feedback, 1e-8)
}

pub fn verify_equilibrium_with(
    c: &CoefficientSet,
    game: &GameSolution,
    trials: usize,
    seed: u64,
    mode: DeviationMode,
    tol: f64,
) -> DeviationReport {
    let grid = &game.grid;
    let n_seg = grid.partition().segments();
    let m = c.control_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs = Vec::with_capacity(n_seg * trials);
    for k in 1..=n_seg {
        for _ in 0..trials {
            jobs.push((k, random_delta(&mut rng, grid.substeps(k - 1), m)));
        }
    }
    let weights: Vec<PlayerWeights> = (1..=n_seg).map(|k| PlayerWeights::new(c, grid, k)).collect();
    let reference: Vec<f64> = map_range(n_seg, |j| {
        let zero = vec![Vector::zeros(m); grid.substeps(j)];
        deviated_cost(game, &weights[j], j + 1, &zero, mode)
    });
    let margins = map_range(jobs.len(), |idx| {
        let (k, delta) = &jobs[idx];
        deviated_cost(game, &weights[k - 1], *k, delta, mode) - reference[k - 1]
    });
    let players: Vec<PlayerMargin> = (1..=n_seg)
        .map(|k| PlayerMargin {
            k,
            min_margin: jobs
                .iter()
                .zip(&margins)
                .filter(|((kk, _), _)| *kk == k)
                .map(|(_, &v)| v)
                .fold(f64::INFINITY, f64::min),
        })
        .collect();
    let min_margin = players.iter().map(|p| p.min_margin).fold(f64::INFINITY, f64::min);
    DeviationReport {
        mode,
        trials,
        seed,
        tol,
        players,
        min_margin,
    }
}
