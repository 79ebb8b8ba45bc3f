//! Dense small-matrix algebra, fixed-step integration and quadrature.

mod eigen;
mod interp;
mod matrix;
mod ode;
mod quad;

pub use eigen::{psd_check, symmetric_eigenvalues, PsdReport};
pub use interp::{cubic_uniform, hermite};
pub use matrix::{frobenius, max_abs_asymmetry, symmetrize, Matrix, SymMatrix, Vector};
pub use ode::{integrate_matrix_ode, rk4_linear_propagator, rk4_step, step_count, MatrixPath};
pub use quad::{simpson_interval, simpson_quad, trapezoid_quad};
