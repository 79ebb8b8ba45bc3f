//! Backward induction for the partitioned game: one self per segment, each
//! solving a frozen-coefficient Riccati equation whose terminal weight
//! accounts for the later selves' feedback strategies.

mod cost;
mod grid;
mod lyapunov;
mod riccati;
mod verify;

pub use cost::{eval_game_cost, ControlPath};
pub use grid::FineGrid;
pub use lyapunov::{sandwich_report, solve_lyapunov_bounds, LyapunovBounds, SandwichReport};
pub use riccati::{
    solve_game, EquilibriumPair, GameSolution, PiecewiseRiccatiSolution, RiccatiSegment, TransitionFamily,
};
pub use verify::{deviation_margin, verify_equilibrium, verify_equilibrium_with, DeviationMode, DeviationReport, PlayerMargin};

pub(crate) use riccati::control_inverse;
