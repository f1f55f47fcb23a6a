#include "scalopr/lbfgs.hpp"

#include <cmath>
#include <deque>

#include "scalopr/errors.hpp"

namespace scalopr {

LbfgsResult lbfgs_minimize(const ObjectiveFn& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& options, const ProjectionFn& project) {
  if (options.max_iters < 1) throw ArgumentError("lbfgs_minimize: max_iters must be at least 1");
  if (project) project(x0);

  const Eigen::Index n = x0.size();
  LbfgsResult res;
  res.x = std::move(x0);
  Eigen::VectorXd g(n);
  double f = objective(res.x, g);
  double gnorm = g.norm();
  if (!std::isfinite(f)) throw NumericalError("lbfgs_minimize: non-finite value at the starting point");

  auto record = [&](int it) {
    if (options.record_trace) res.trace.push_back({it, f, gnorm});
  };
  record(0);

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double> history{f};
  Eigen::VectorXd x_new(n), g_new(n), d(n);

  int it = 0;
  while (true) {
    if (gnorm < options.grad_tol * (1.0 + std::abs(f)) || f <= options.value_floor) {
      res.converged = true;
      break;
    }
    if (it >= options.max_iters) break;

    // Two-loop recursion.
    d = -g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(d);
      d -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    } else {
      d *= 1.0 / std::max(gnorm, 1e-300) * std::min(1.0, std::max(std::abs(f), 1e-12));
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(d);
      d += (alpha[i] - beta) * s_hist[i];
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g / std::max(gnorm, 1e-300);
      slope = g.dot(d);
    }

    double step = 1.0;
    double f_new = f;
    bool accepted = false;
    for (int bt = 0; bt < options.max_backtracks; ++bt) {
      x_new = res.x + step * d;
      if (project) project(x_new);
      f_new = objective(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + options.armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!s_hist.empty()) {
        // Stale curvature pairs can make a poor direction; retry once along -g.
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        continue;
      }
      res.line_search_failed = true;
      break;
    }

    ++it;
    Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    res.x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    gnorm = g.norm();
    record(it);
    history.push_back(f);

    if (options.stall_tol > 0.0 && static_cast<int>(history.size()) > options.stall_window) {
      const double old = history[history.size() - 1 - static_cast<std::size_t>(options.stall_window)];
      if (old - f <= options.stall_tol * std::abs(old)) break;
    }
  }
  res.value = f;
  res.grad_norm = gnorm;
  res.iterations = it;
  return res;
}

}  // namespace scalopr
