/**
 * @file lbfgs.hpp
 * @brief Limited-memory BFGS with Armijo backtracking over a real vector.
 *
 * Complex unknowns are optimized through their stacked real and imaginary
 * parts; callers pass the real gradient (twice the conjugate Wirtinger
 * derivative).
 */
#pragma once

#include <functional>
#include <vector>

#include "scalopr/types.hpp"

namespace scalopr {

struct LbfgsOptions {
  int max_iters = 10000;
  double grad_tol = 1e-9;   ///< stop when |grad| < grad_tol (1 + |value|)
  int memory = 10;
  double armijo = 1e-4;
  int max_backtracks = 50;
  /// Stop when the value dropped by less than this fraction over `stall_window` iterations (0 disables).
  double stall_tol = 0.0;
  int stall_window = 50;
  /// Stop as soon as the value is at or below this.
  double value_floor = 0.0;
  bool record_trace = true;
};

struct TraceRow {
  int iter = 0;
  double value = 0.0;
  double grad_norm = 0.0;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;  ///< best iterate returned after a failed backtracking
  std::vector<TraceRow> trace;
};

/// Returns the value at x and writes the gradient into `grad` (already sized).
using ObjectiveFn = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;
/// Optional in-place map applied to every accepted iterate (e.g. analytic projection).
using ProjectionFn = std::function<void(Eigen::VectorXd& x)>;

LbfgsResult lbfgs_minimize(const ObjectiveFn& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& options = {}, const ProjectionFn& project = {});

}  // namespace scalopr
