#ifndef TICLQ_H
#define TICLQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Starting iterate of the limit solver.
typedef enum TiclqInit {
  TICLQ_INIT_ZERO = 0,
  TICLQ_INIT_LYAPUNOV = 1,
  TICLQ_INIT_GAME_SOLUTION = 2,
} TiclqInit;

// Result of every entry point.
typedef enum TiclqStatus {
  TICLQ_STATUS_OK = 0,
  TICLQ_STATUS_NULL_POINTER = 1,
  TICLQ_STATUS_INVALID_ARGUMENT = 2,
  TICLQ_STATUS_PARSE = 3,
  TICLQ_STATUS_GAME_SOLVER = 4,
  TICLQ_STATUS_NO_CONVERGENCE = 5,
  TICLQ_STATUS_PANIC = 6,
} TiclqStatus;

// A solved partitioned game.
typedef struct TiclqGameSolution TiclqGameSolution;

// A loaded problem.
typedef struct TiclqProblem TiclqProblem;

// A solved limit system.
typedef struct TiclqVolterraSolution TiclqVolterraSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next `ticlq_*` call on the same thread.
const char *ticlq_last_error_message(void);

// Parses a TOML problem definition.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum TiclqStatus ticlq_problem_from_toml(const char *text, struct TiclqProblem **out);

// Scalar problem `dX = u ds` with cost `∫u² + h(t)X(T)²`,
// `h(t) = intercept + slope·t`.
//
// # Safety
// `out` must be a valid pointer.
enum TiclqStatus ticlq_problem_c_affine(double intercept,
                                        double slope,
                                        double horizon,
                                        struct TiclqProblem **out);

// # Safety
// `problem` must come from a `ticlq_problem_*` constructor.
uintptr_t ticlq_problem_state_dim(const struct TiclqProblem *problem);

// # Safety
// `problem` must come from a `ticlq_problem_*` constructor.
uintptr_t ticlq_problem_control_dim(const struct TiclqProblem *problem);

// # Safety
// `problem` must be null or a handle not yet freed.
void ticlq_problem_free(struct TiclqProblem *problem);

// Solves the game with `segments` equal players from the initial state
// `x[0..x_len]`.
//
// # Safety
// `problem` must be a live handle, `x` must point to `x_len` doubles and
// `out` must be a valid pointer.
enum TiclqStatus ticlq_solve_game(const struct TiclqProblem *problem,
                                  uintptr_t segments,
                                  const double *x,
                                  uintptr_t x_len,
                                  double step,
                                  struct TiclqGameSolution **out);

// Writes `P(t)` (right-continuous at knots) into `out[0..n*n]`.
//
// # Safety
// `game` must be a live handle and `out` must point to `out_len` doubles.
enum TiclqStatus ticlq_game_riccati_at(const struct TiclqGameSolution *game,
                                       double t,
                                       double *out,
                                       uintptr_t out_len);

// Largest Frobenius norm of the knot jumps.
//
// # Safety
// `game` must be a live handle and `out` a valid pointer.
enum TiclqStatus ticlq_game_max_jump(const struct TiclqGameSolution *game, double *out);

// Equilibrium cost `J_k` of player `k` (1-based).
//
// # Safety
// `game` must be a live handle and `out` a valid pointer.
enum TiclqStatus ticlq_game_player_cost(const struct TiclqGameSolution *game,
                                        uintptr_t k,
                                        double *out);

// # Safety
// `game` must be null or a handle not yet freed.
void ticlq_game_free(struct TiclqGameSolution *game);

// Solves the limit system on `resolution` anchor intervals.
//
// # Safety
// `problem` must be a live handle and `out` a valid pointer.
enum TiclqStatus ticlq_solve_volterra(const struct TiclqProblem *problem,
                                      uintptr_t resolution,
                                      double tol,
                                      uintptr_t max_iter,
                                      enum TiclqInit init,
                                      struct TiclqVolterraSolution **out);

// Writes the interpolated `P(t)` into `out[0..n*n]`.
//
// # Safety
// `solution` must be a live handle and `out` must point to `out_len` doubles.
enum TiclqStatus ticlq_volterra_p_at(const struct TiclqVolterraSolution *solution,
                                     double t,
                                     double *out,
                                     uintptr_t out_len);

// Size of the final fixed-point update.
//
// # Safety
// `solution` must be a live handle and `out` a valid pointer.
enum TiclqStatus ticlq_volterra_residual(const struct TiclqVolterraSolution *solution, double *out);

// # Safety
// `solution` must be null or a handle not yet freed.
void ticlq_volterra_free(struct TiclqVolterraSolution *solution);

// Closed-form cost of keeping the control chosen at `t` instead of
// re-optimizing at `tau`, for scalar problems built by
// `ticlq_problem_c_affine` or a `[problem_c]` file.
//
// # Safety
// `problem` must be a live handle and `out` a valid pointer.
enum TiclqStatus ticlq_inconsistency_gap(const struct TiclqProblem *problem,
                                         double t,
                                         double tau,
                                         double x,
                                         double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TICLQ_H */
