/**
 * @file reformulation.hpp
 * @brief Products of auxiliary wavelet transforms computed from the scalogram.
 *
 * For an analytic f and g_j = |f * psi_j|,
 *   (f * psi_j^low) . conj(f * psi_j^high) = Q_j,   Q^_j[k] = r_j^k (g_j^2)^[k]
 * with k the signed frequency of bin k. Q_j is therefore known from the
 * measurements alone and the phase retrieval problem becomes a set of
 * quadratic equations in the auxiliary transforms.
 */
#pragma once

#include <vector>

#include "scalopr/types.hpp"
#include "scalopr/wavelet.hpp"

namespace scalopr {

struct QSpectra {
  SignalList Q;               ///< time-domain Q_j, j = 0..J
  std::vector<double> log_r;  ///< log r_j used for each row

  int scales() const { return static_cast<int>(Q.size()); }
  double squared_norm() const;
};

/// Spectral magnitudes of g^2 below this fraction of the peak are treated as zero.
inline constexpr double kQSpectrumFloor = 1e-14;
/// Relative threshold on |psi^_j| defining the lag window of g_j^2.
inline constexpr double kQLagTol = 1e-14;

/**
 * Q_j from one row of the scalogram. `max_lag` >= 0 additionally zeroes every
 * signed frequency |k| > max_lag: g_j^2 of a true wavelet coefficient has no
 * energy there, while noise in those bins would be multiplied by r_j^{-|k|}.
 */
Signal compute_Q(const RealVector& g, double r, int max_lag = -1);

/// Same with log r_j <= 0 given directly; log_r = 0 returns g^2 (unweighted).
Signal compute_Q_log(const RealVector& g, double log_r, int max_lag = -1);

/// Largest lag of the autocorrelation of |psi^_j| restricted to bins above tol * max.
int filter_lag_width(const Spectrum& psi, double tol = kQLagTol);

/**
 * Relative noise level of a scalogram, estimated from the spectrum of g_j^2 at
 * signed frequencies beyond the lag window of psi_j (tol 1e-14), where an exact
 * scalogram has nothing. Additive white noise of relative size d puts about
 * 4 d^2 ||g||^2 ||g_j||^2 / size energy per such bin. Returns 0 when no scale
 * has out-of-window bins.
 */
double estimate_noise_level(const RealMatrix& g, const WaveletFamily& family);

/// Lag tolerance used by the reconstruction: the noise estimate clamped to [1e-14, 1e-2].
double adaptive_lag_tol(const RealMatrix& g, const WaveletFamily& family);

/// Q_j for every row of g, lag windows taken from the family filters.
QSpectra compute_Q_spectra(const RealMatrix& g, const WaveletFamily& family,
                           const AuxiliaryBank& aux, double lag_tol = kQLagTol);

/// P(h)(z) = sum over signed k of h^[k mod N] z^k.
Complex poly_extension(const Signal& h, Complex z);

/// Same with the spectrum given directly.
Complex poly_extension_spectrum(const Spectrum& spectrum, Complex z);

/// ||(f * psi_j^low) conj(f * psi_j^high) - Q_j|| / max(||Q_j||, 1e-30), per scale.
RealVector reformulation_residual(const Signal& f, const AuxiliaryBank& aux, const QSpectra& q);

}  // namespace scalopr
