//! LQ problem data, partitions, frozen coefficients and assumption checks.

mod assumptions;
mod coeff;
mod file;
mod frozen;
mod partition;
mod problem_c;

pub use assumptions::{check_assumptions, AssumptionReport, Violation, ViolationKind};
pub use coeff::{CoefficientFn, CoefficientSet, PolyTerm, Table1, Table2};
pub use file::{load_problem, parse_problem};
pub use frozen::{freeze, FrozenCoefficients};
pub use partition::{build_uniform_partition, Partition};
pub use problem_c::{make_problem_c, ScalarFn};
