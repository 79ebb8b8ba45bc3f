//! C interface to the ticlq solvers.
//!
//! Objects are opaque handles created by `ticlq_*` constructors and released
//! with the matching `*_free` function. Every call returns a [`TiclqStatus`];
//! on failure `ticlq_last_error_message` describes the error for the calling
//! thread. Matrices are written row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};


use ticlq::error::Error;
use ticlq::game::{solve_game, GameSolution};
use ticlq::numerics::Vector;
use ticlq::oracles::inconsistency_gap;
use ticlq::problem::{make_problem_c, parse_problem, CoefficientSet, Partition, ScalarFn};
use ticlq::volterra::{solve_volterra, VolterraConfig, VolterraInit, VolterraSolution};

/// Result of every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiclqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    GameSolver = 4,
    NoConvergence = 5,
    Panic = 6,
}

/// Starting iterate of the limit solver.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiclqInit {
    Zero = 0,
    Lyapunov = 1,
    GameSolution = 2,
}

/// A loaded problem.
pub struct TiclqProblem(CoefficientSet);

/// A solved partitioned game.
pub struct TiclqGameSolution(GameSolution);

/// A solved limit system.
pub struct TiclqVolterraSolution(VolterraSolution);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap_or_default());
}

fn status_of(e: &Error) -> TiclqStatus {
    match e {
        Error::Parse(_) => TiclqStatus::Parse,
        Error::NoConvergence { .. } => TiclqStatus::NoConvergence,
        Error::RiccatiDivergence { .. }
        | Error::ControlWeightSingular { .. }
        | Error::Divergence { .. }
        | Error::IncompatibleSampling(_) => TiclqStatus::GameSolver,
        _ => TiclqStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard<F>(f: F) -> TiclqStatus
where
    F: FnOnce() -> Result<(), (TiclqStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TiclqStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TiclqStatus::Panic
        }
    }
}

fn lift(e: Error) -> (TiclqStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (TiclqStatus, String) {
    (TiclqStatus::NullPointer, format!("{name} is null"))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, (TiclqStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), (TiclqStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_matrix(m: &ticlq::numerics::Matrix, out: *mut f64, len: usize) -> Result<(), (TiclqStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    let (rows, cols) = m.shape();
    if len < rows * cols {
        return Err((
            TiclqStatus::InvalidArgument,
            format!("output buffer holds {len} values, {} needed", rows * cols),
        ));
    }
    let buf = std::slice::from_raw_parts_mut(out, rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            buf[i * cols + j] = m[(i, j)];
        }
    }
    Ok(())
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `ticlq_*` call on the same thread.
#[no_mangle]
pub extern "C" fn ticlq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a TOML problem definition.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ticlq_problem_from_toml(text: *const c_char, out: *mut *mut TiclqProblem) -> TiclqStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| (TiclqStatus::Parse, format!("problem text is not UTF-8: {e}")))?;
        let c = parse_problem(text).map_err(lift)?;
        write_out(out, Box::into_raw(Box::new(TiclqProblem(c))), "out")
    })
}

/// Scalar problem `dX = u ds` with cost `∫u² + h(t)X(T)²`,
/// `h(t) = intercept + slope·t`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ticlq_problem_c_affine(
    intercept: f64,
    slope: f64,
    horizon: f64,
    out: *mut *mut TiclqProblem,
) -> TiclqStatus {
    guard(|| {
        let c = make_problem_c(ScalarFn::Affine { intercept, slope }, horizon).map_err(lift)?;
        write_out(out, Box::into_raw(Box::new(TiclqProblem(c))), "out")
    })
}

/// # Safety
/// `problem` must come from a `ticlq_problem_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn ticlq_problem_state_dim(problem: *const TiclqProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.0.state_dim())
}

/// # Safety
/// `problem` must come from a `ticlq_problem_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn ticlq_problem_control_dim(problem: *const TiclqProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.0.control_dim())
}

/// # Safety
/// `problem` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ticlq_problem_free(problem: *mut TiclqProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Solves the game with `segments` equal players from the initial state
/// `x[0..x_len]`.
///
/// # Safety
/// `problem` must be a live handle, `x` must point to `x_len` doubles and
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ticlq_solve_game(
    problem: *const TiclqProblem,
    segments: usize,
    x: *const f64,
    x_len: usize,
    step: f64,
    out: *mut *mut TiclqGameSolution,
) -> TiclqStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        if x.is_null() {
            return Err(null("x"));
        }
        let x = Vector::from_column_slice(std::slice::from_raw_parts(x, x_len));
        let partition = Partition::uniform(segments, p.0.horizon()).map_err(lift)?;
        let g = solve_game(&p.0, &partition, &x, step).map_err(lift)?;
        write_out(out, Box::into_raw(Box::new(TiclqGameSolution(g))), "out")
    })
}

/// Writes `P(t)` (right-continuous at knots) into `out[0..n*n]`.
///
/// # Safety
/// `game` must be a live handle and `out` must point to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ticlq_game_riccati_at(
    game: *const TiclqGameSolution,
    t: f64,
    out: *mut f64,
    out_len: usize,
) -> TiclqStatus {
    guard(|| {
        let g = handle(game, "game")?;
        let p = g.0.riccati.value_at(t).map_err(lift)?;
        write_matrix(p.as_matrix(), out, out_len)
    })
}

/// Largest Frobenius norm of the knot jumps.
///
/// # Safety
/// `game` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ticlq_game_max_jump(game: *const TiclqGameSolution, out: *mut f64) -> TiclqStatus {
    guard(|| {
        let g = handle(game, "game")?;
        write_out(out, g.0.riccati.max_jump(), "out")
    })
}

/// Equilibrium cost `J_k` of player `k` (1-based).
///
/// # Safety
/// `game` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ticlq_game_player_cost(game: *const TiclqGameSolution, k: usize, out: *mut f64) -> TiclqStatus {
    guard(|| {
        let g = handle(game, "game")?;
        let costs = &g.0.equilibrium.costs;
        if k == 0 || k > costs.len() {
            return Err((
                TiclqStatus::InvalidArgument,
                format!("player {k} outside 1..={}", costs.len()),
            ));
        }
        write_out(out, costs[k - 1], "out")
    })
}

/// # Safety
/// `game` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ticlq_game_free(game: *mut TiclqGameSolution) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Solves the limit system on `resolution` anchor intervals.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ticlq_solve_volterra(
    problem: *const TiclqProblem,
    resolution: usize,
    tol: f64,
    max_iter: usize,
    init: TiclqInit,
    out: *mut *mut TiclqVolterraSolution,
) -> TiclqStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        let config = VolterraConfig {
            resolution,
            tol,
            max_iter,
            init: match init {
                TiclqInit::Zero => VolterraInit::Zero,
                TiclqInit::Lyapunov => VolterraInit::Lyapunov,
                TiclqInit::GameSolution => VolterraInit::GameSolution,
            },
            ..VolterraConfig::default()
        };
        let v = solve_volterra(&p.0, &config).map_err(lift)?;
        write_out(out, Box::into_raw(Box::new(TiclqVolterraSolution(v))), "out")
    })
}

/// Writes the interpolated `P(t)` into `out[0..n*n]`.
///
/// # Safety
/// `solution` must be a live handle and `out` must point to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ticlq_volterra_p_at(
    solution: *const TiclqVolterraSolution,
    t: f64,
    out: *mut f64,
    out_len: usize,
) -> TiclqStatus {
    guard(|| {
        let v = handle(solution, "solution")?;
        if !(0.0..=v.0.horizon()).contains(&t) {
            return Err(lift(Error::OutOfHorizon(t)));
        }
        write_matrix(v.0.p_at(t).as_matrix(), out, out_len)
    })
}

/// Size of the final fixed-point update.
///
/// # Safety
/// `solution` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ticlq_volterra_residual(solution: *const TiclqVolterraSolution, out: *mut f64) -> TiclqStatus {
    guard(|| {
        let v = handle(solution, "solution")?;
        write_out(out, v.0.residual, "out")
    })
}

/// # Safety
/// `solution` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ticlq_volterra_free(solution: *mut TiclqVolterraSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Closed-form cost of keeping the control chosen at `t` instead of
/// re-optimizing at `tau`, for scalar problems built by
/// `ticlq_problem_c_affine` or a `[problem_c]` file.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ticlq_inconsistency_gap(
    problem: *const TiclqProblem,
    t: f64,
    tau: f64,
    x: f64,
    out: *mut f64,
) -> TiclqStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        let pc = p.0.problem_c().ok_or_else(|| lift(Error::GapRequiresProblemC))?;
        let g = inconsistency_gap(pc, t, tau, x).map_err(lift)?;
        write_out(out, g.gap, "out")
    })
}

