/**
 * @file baselines.hpp
 * @brief Gerchberg-Saxton by alternate projections, plain and coarse-to-fine.
 */
#pragma once

#include <optional>

#include "scalopr/reconstruct.hpp"
#include "scalopr/types.hpp"
#include "scalopr/wavelet.hpp"

namespace scalopr {

/// Unit-norm analytic signal with independent complex Gaussian bins 1..N/2.
Signal random_analytic(int n, unsigned long long seed);

struct GsOptions {
  int iters = 200;             ///< plain: total iterations; multiscale: iterations per scale
  double deconv_eps = 1e-4;    ///< multiscale: bins whose coarse filter energy is below this (relative) are zeroed
  double assemble_eps = 1e-10; ///< relative filter-energy floor of the frame inversion
  unsigned long long seed = 0; ///< random initialization of the plain variant
};

/// All scales at once from `init` (or a seeded random analytic signal).
ReconResult gs_classic(const RealMatrix& g, const WaveletFamily& family, const GsOptions& options,
                       const std::optional<Signal>& init = std::nullopt);

/**
 * Scale J (and J-1) by exhaustive search, then for j = J-2..0: extend the
 * current estimate by deconvolution and run `options.iters` projections on
 * scales j..J. Budget: options.iters * J iterations (scale J-1, then J-1 more).
 */
ReconResult gs_multiscale(const RealMatrix& g, const WaveletFamily& family, const GsOptions& options);

/// Iterations gs_multiscale spends, for budget matching.
int gs_multiscale_budget(const WaveletFamily& family, const GsOptions& options);

}  // namespace scalopr
