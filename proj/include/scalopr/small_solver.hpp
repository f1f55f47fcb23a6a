/**
 * @file small_solver.hpp
 * @brief Phase retrieval by exhaustive search when the Fourier support is tiny.
 *
 * A signal g with g^ supported on K consecutive bins is fixed by |g| up to
 * 2^{K-1} choices: N (|g|^2)^ is the autocorrelation of g^, i.e. the Laurent
 * polynomial p(X) conj(p)(1/X) with p(X) = sum_k g^[first+k] X^k, and each
 * root pair (s, 1/conj(s)) contributes one root of p. Two adjacent wavelet
 * scales are then matched through (f * psi_j) * psi_{j-1} = (f * psi_{j-1}) * psi_j.
 */
#pragma once

#include <optional>
#include <vector>

#include "scalopr/types.hpp"
#include "scalopr/wavelet.hpp"

namespace scalopr {

struct CandidateOptions {
  /// Roots s, t pair when |s conj(t) - 1| < pair_tol (1 + |s|^2).
  double pair_tol = 1e-6;
  /// Pairs with ||s| - 1| below this are unit-circle roots (one choice only).
  double unit_tol = 1e-6;
  /// When false, unpaired roots are matched greedily instead of raising.
  bool strict = true;
  /// Drop candidates with || |g| - m || > tol * ||m||; <= 0 keeps all.
  double modulus_tol = 0.0;
};

/// Laurent coefficients N (m^2)^[l], l = -(K-1)..K-1, stored at index l + K - 1.
std::vector<Complex> autocorrelation_coefficients(const RealVector& m, int K);

/// Roots of sum_i c_i X^i (c_i complex, i = 0..degree), companion matrix + Newton polish.
std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeffs);

/**
 * Every g with g^ supported on `support` (at most K = support.size() bins)
 * and |g| = m, up to global phase; each candidate has its top bin real
 * positive. At most 2^{K-1} entries. m == 0 gives the single zero signal.
 * Throws DegenerateRootsError in strict mode when a root has no partner.
 */
SignalList candidate_signals(const RealVector& m, BinRange support,
                             const CandidateOptions& options = {});

/// Support {1..K}.
SignalList candidate_signals(const RealVector& m, int K, const CandidateOptions& options = {});

struct PairResult {
  Signal coarse;       ///< estimate of f * psi_j (top bin real positive)
  Signal fine;         ///< estimate of f * psi_{j-1}, phase-aligned with `coarse`
  double residual = 0.0;  ///< min over phi of ||coarse * psi_{j-1} - e^{i phi} fine * psi_j||
  double sin2 = 0.0;      ///< 1 - |<u, v>|^2 / (||u||^2 ||v||^2), the selection score
  std::size_t coarse_index = 0;
  std::size_t fine_index = 0;
  bool ambiguous = false;  ///< a second pair scored within a factor 2 of the winner
  std::optional<std::pair<Signal, Signal>> runner_up;
};

/**
 * Picks among the candidates of two adjacent scales the pair most consistent
 * with the commutation of convolutions. The score is the squared sine of the
 * angle between c_j * psi_{j-1} and c_{j-1} * psi_j, which does not depend on
 * how the two moduli are scaled.
 */
PairResult resolve_pair(const RealVector& m_coarse, const RealVector& m_fine,
                        const Spectrum& psi_coarse, const Spectrum& psi_fine,
                        BinRange support_coarse, BinRange support_fine,
                        const CandidateOptions& options = {});

/// The `count` best pairs in increasing order of sin2 (fewer if there are fewer pairs).
std::vector<PairResult> ranked_pairs(const RealVector& m_coarse, const RealVector& m_fine,
                                     const Spectrum& psi_coarse, const Spectrum& psi_fine,
                                     BinRange support_coarse, BinRange support_fine,
                                     std::size_t count, const CandidateOptions& options = {});

/// Same with supports read from the filters at `support_tol`.
PairResult resolve_pair(const RealVector& m_coarse, const RealVector& m_fine,
                        const Spectrum& psi_coarse, const Spectrum& psi_fine,
                        double support_tol = 1e-6, const CandidateOptions& options = {});

/// Keeps the `k_max` consecutive analytic bins of largest energy, zeroes the rest.
Spectrum truncate_filter(const Spectrum& psi, int k_max);

/**
 * Local pair problem on a short periodic grid: moduli window . g_j and
 * window . g_{j-1}, filters truncated to k_max bins. Returns local estimates
 * of (f w) * psi_j and (f w) * psi_{j-1}. A window of zeros gives zeros.
 */
PairResult windowed_exhaustive(const RealVector& g_coarse, const RealVector& g_fine,
                               const RealVector& window, const Spectrum& psi_coarse,
                               const Spectrum& psi_fine, int k_max = 12,
                               double support_tol = 1e-6, const CandidateOptions& options = {});

}  // namespace scalopr
