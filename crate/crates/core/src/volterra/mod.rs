//! Limit of the partitioned game as the mesh goes to zero: jump removal, the
//! forward-backward Volterra system, and mesh-refinement studies.

mod convergence;
mod equilibrium;
mod jumps;
mod solver;

pub use convergence::{convergence_study, fit_order, ConvergenceConfig, ConvergenceReport, ConvergenceRow};
pub use equilibrium::{equilibrium_from_volterra, EquilibriumControl};
pub use jumps::{remove_jumps, JumpRemovedPath};
pub use solver::{solve_volterra, VolterraConfig, VolterraInit, VolterraSolution};
