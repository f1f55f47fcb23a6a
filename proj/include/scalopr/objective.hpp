/**
 * @file objective.hpp
 * @brief Least-squares objectives over auxiliary transforms and their gradients.
 *
 *   obj = sum_j ||L_j conj(H_j) - Q_j||^2
 *       + lambda sum_j (||f * psi_j^low - L_j||^2 + ||f * psi_j^high - H_j||^2)
 *       + mu sum_j ||L_j * psi_{j+1}^high - H_{j+1} * psi_j^low||^2
 *
 * The last sum is a quadratic penalty for the commutation constraint between
 * neighbouring scales. Gradients are real gradients with respect to
 * (Re z, Im z), packed as complex numbers d/dRe + i d/dIm.
 */
#pragma once

#include <vector>

#include "scalopr/lbfgs.hpp"
#include "scalopr/reformulation.hpp"
#include "scalopr/types.hpp"
#include "scalopr/wavelet.hpp"

namespace scalopr {

struct ObjectiveConfig {
  double lambda = 1.0;
  double mu = 3.0;
  int max_iters = 2000;
  double grad_tol = 1e-9;
};

/// Unknowns of the objective: one low and one high signal per scale, and f.
struct OptState {
  SignalList low;
  SignalList high;
  Signal f;

  int scales() const { return static_cast<int>(low.size()); }
  /// L_j = f * psi_j^low, H_j = f * psi_j^high for every scale.
  static OptState from_signal(const Signal& f, const AuxiliaryBank& aux);
  static OptState zeros(int scales, Eigen::Index n);
};

/// Which terms enter the objective and which variables move. Per-scale flags.
struct ActiveSet {
  std::vector<char> q;           ///< ||L_j conj(H_j) - Q_j||^2
  std::vector<char> low_data;    ///< lambda ||f * psi_j^low - L_j||^2
  std::vector<char> high_data;   ///< lambda ||f * psi_j^high - H_j||^2
  std::vector<char> constraint;  ///< mu ||L_j * psi_{j+1}^high - H_{j+1} * psi_j^low||^2 (j < J)
  std::vector<char> low_free;
  std::vector<char> high_free;
  bool f_free = true;

  /// Every term, every variable.
  static ActiveSet all(int scales);
  /// Terms and variables of scales lo..J only.
  static ActiveSet from_scale(int lo, int scales);
};

struct ObjectiveValue {
  double value = 0.0;
  OptState gradient;  ///< zero for frozen variables
};

/// Throws NumericalError (carrying the scale) on a non-finite term.
ObjectiveValue objective_and_gradient(const OptState& state, const QSpectra& q,
                                      const AuxiliaryBank& aux, const ObjectiveConfig& cfg,
                                      const ActiveSet& active);

inline ObjectiveValue objective_and_gradient(const OptState& state, const QSpectra& q,
                                             const AuxiliaryBank& aux, const ObjectiveConfig& cfg) {
  return objective_and_gradient(state, q, aux, cfg, ActiveSet::all(state.scales()));
}

/// Value only (same terms).
double objective_value(const OptState& state, const QSpectra& q, const AuxiliaryBank& aux,
                       const ObjectiveConfig& cfg, const ActiveSet& active);

/// Flattens the free variables into a real vector and back.
class StateLayout {
 public:
  StateLayout(ActiveSet active, int scales, Eigen::Index n);
  Eigen::Index size() const { return size_; }
  Eigen::VectorXd pack(const OptState& state) const;
  /// Overwrites the free variables of `state` with x.
  void unpack(const Eigen::VectorXd& x, OptState& state) const;
  const ActiveSet& active() const { return active_; }

 private:
  ActiveSet active_;
  int scales_;
  Eigen::Index n_;
  Eigen::Index size_ = 0;
};

struct MinimizeResult {
  OptState state;
  LbfgsResult lbfgs;  ///< x is left empty; trace and flags are kept
};

/// L-BFGS on the free variables; f is re-projected onto analytic signals after each step.
MinimizeResult minimize(const OptState& init, const QSpectra& q, const AuxiliaryBank& aux,
                        const ObjectiveConfig& cfg, const ActiveSet& active,
                        const LbfgsOptions& options);

// Objective without auxiliary wavelets:
//   sum_j || |h_j|^2 - g_j^2 ||^2 + lambda sum_j ||f * psi_j - h_j||^2

struct ClassicalState {
  SignalList h;
  Signal f;
  static ClassicalState from_signal(const Signal& f, const WaveletFamily& family);
};

struct ClassicalValue {
  double value = 0.0;
  ClassicalState gradient;
};

ClassicalValue classical_objective_and_gradient(const ClassicalState& state, const RealMatrix& g,
                                                const WaveletFamily& family, double lambda);

struct ClassicalMinimizeResult {
  ClassicalState state;
  LbfgsResult lbfgs;
};

ClassicalMinimizeResult minimize_classical(const ClassicalState& init, const RealMatrix& g,
                                           const WaveletFamily& family, double lambda,
                                           const LbfgsOptions& options);

// Cauchy banks with the matched radius: psi_{j+1}^high = a^{p1} psi_j^low, so the
// constraint is imposed exactly through H_{j+1} = a^{p1} L_j. The free variables
// are L_0..L_J and H_0.

struct CauchyVars {
  SignalList low;  ///< L_0..L_J
  Signal high0;    ///< H_0
  /// Full (L, H) with H_{j+1} = a^{p1} L_j.
  OptState expand(double a_p1) const;
};

struct CauchyValue {
  double value = 0.0;
  CauchyVars gradient;  ///< gradient on the constrained subspace
};

/// a^{p1} for a Cauchy bank; throws ArgumentError if the radius is not the matched one.
double cauchy_factor(const WaveletFamily& family, const AuxiliaryBank& aux);

/// sum_j ||L_j conj(H_j) - Q_j||^2 on the subspace.
CauchyValue cauchy_obj1(const CauchyVars& vars, const QSpectra& q, const WaveletFamily& family,
                        const AuxiliaryBank& aux);

/// sum_{j = J mod 2} ||f * psi_j^low - L_j||^2 + sum_{j != J mod 2} ||f * psi_j^high - H_j||^2,
/// gradient with respect to every L_j, H_j and (analytic) f.
ObjectiveValue cauchy_obj2(const OptState& state, const WaveletFamily& family,
                           const AuxiliaryBank& aux);

/// Point of the critical manifold: gamma and 1/conj(gamma) alternating from scale J.
OptState critical_point(const Signal& f, const Signal& gamma, const AuxiliaryBank& aux);

}  // namespace scalopr
