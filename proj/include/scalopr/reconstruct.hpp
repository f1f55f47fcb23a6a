/**
 * @file reconstruct.hpp
 * @brief Multiscale reconstruction from the scalogram, coarse to fine.
 *
 * Scale J (and J-1) comes from exhaustive search; every finer scale j gets a
 * first guess of f * psi_j^low by deconvolving what is already known, the
 * known variables are refined together by L-BFGS on the auxiliary objective,
 * suspicious samples are re-solved on short windows, and f * psi_j^high then
 * follows from Q_j. The signal is assembled by least squares and polished by
 * a few alternating projections.
 */
#pragma once

#include <string>
#include <vector>

#include "scalopr/lbfgs.hpp"
#include "scalopr/objective.hpp"
#include "scalopr/reformulation.hpp"
#include "scalopr/small_solver.hpp"
#include "scalopr/types.hpp"
#include "scalopr/wavelet.hpp"

namespace scalopr {

struct ReconConfig {
  ObjectiveConfig objective;          ///< lambda, mu, per-scale iteration cap, grad_tol
  int refine_iters = 0;               ///< budget of the second refinement; 0 means max_iters / 4
  int final_iters = 3000;             ///< joint refinement over every scale before assembly
  int free_scales = -1;               ///< scales above j kept free at step j (-1: all)
  double stall_tol = 1e-10;           ///< relative decrease over 50 iterations that ends a stage
  double deconv_eps = 1e-4;           ///< Tikhonov floor of the deconvolutions (relative to peak filter energy)
  double assemble_eps = 1e-10;        ///< bins below this relative filter energy are dropped when assembling f
  double highdiv_eps = 1e-6;          ///< floor of the division giving f * psi_j^high
  bool error_correction = true;
  double ec_residual_factor = 5.0;    ///< flag samples above this multiple of the median residual
  double ec_floor = 1e-3;             ///< ... and above this fraction of the largest coefficient
  int gs_polish_iters = 50;
  double q_lag_tol = 0.0;              ///< lag window tolerance of Q_j; <= 0 estimates it from the noise level
  int restarts = 2;                   ///< extra runs, alternately from the next-ranked initial pair and with a longer budget
  double restart_factor = 1.0;        ///< a run is accepted once its modulus error is below this times the noise estimate
  unsigned long long rng_seed = 0;    ///< reserved for randomized stages; the pipeline is deterministic
};

struct ScaleDiagnostics {
  int scale = 0;
  double init_residual = 0.0;   ///< constraint residual of the propagated guess, relative
  double objective = 0.0;       ///< objective after the refinements of this step
  int iterations = 0;
  int ec_windows = 0;           ///< windows re-solved by the error correction
  bool ec_applied = false;
  bool line_search_failed = false;
};

struct StageTrace {
  std::string stage;  ///< "scale <j>", "refine <j>", "final", "gs"
  TraceRow row;
};

struct ReconResult {
  Signal f_rec;
  std::vector<ScaleDiagnostics> scales;
  std::vector<std::string> flags;
  std::vector<StageTrace> trace;
  double noise_estimate = 0.0;       ///< relative noise level estimated from g
  double lag_tol = 0.0;              ///< lag tolerance actually used for Q_j
  double reconstruction_error = 0.0;  ///< || |W f_rec| - g || / ||g|| against the input g
  int attempts = 0;
  double wall_time_s = 0.0;
};

/// || |W f| - g || / ||g||, summed over scales.
double modulus_error(const Signal& f, const RealMatrix& g, const WaveletFamily& family);

/// Estimate of f * psi_j^low from (L, H) of scales j+1..J by regularized deconvolution.
Signal propagate_phase(int j, const SignalList& low, const SignalList& high,
                       const AuxiliaryBank& aux, double eps);

/// conj(Q) L / (|L|^2 + eps max |L|^2); a zero L gives zeros and sets `degenerate`.
Signal recover_high(const Signal& low, const Signal& Q, double eps, bool* degenerate = nullptr);

/// Circular sample interval [start, start + length).
struct Interval {
  int start = 0;
  int length = 0;
};

/// L_j * psi_{j+1}^high - H_{j+1} * psi_j^low.
Signal constraint_residual(const Signal& low_j, const Signal& high_next, const AuxiliaryBank& aux, int j);

/// Samples whose residual exceeds factor * median and floor * max coefficient, merged
/// into intervals when closer than `merge_gap`.
std::vector<Interval> detect_errors(const Signal& low_j, const Signal& high_next,
                                    const AuxiliaryBank& aux, int j, double factor,
                                    double floor, int merge_gap);

/// Window length for which psi_j spans about k_max local bins.
int correction_window(const WaveletFamily& family, int j, int k_max);

struct CorrectionResult {
  Signal low;
  Signal high_next;
  int windows = 0;
  bool applied = false;     ///< false when the correction did not lower the residual
  bool ambiguous = false;   ///< some window had two near-equivalent solutions
  double residual_before = 0.0;
  double residual_after = 0.0;
};

/**
 * Re-solves f * psi_j^low and f * psi_{j+1}^high on overlapping Hann windows
 * covering `intervals`, by exhaustive search on a short grid, and blends the
 * results in, then polishes both transforms near the flagged samples by local
 * least squares on the two moduli and the constraint. The result is kept only if
 * the constraint residual drops. `g` is the scalogram on the same scale as the signals.
 */
CorrectionResult error_correct(int j, const Signal& low_j, const Signal& high_next,
                               const RealMatrix& g, const WaveletFamily& family,
                               const AuxiliaryBank& aux, const std::vector<Interval>& intervals);

/// f^ = sum_j h^_j conj(psi^_j) / sum_j |psi^_j|^2 where the denominator exceeds eps, analytic part.
Signal assemble_signal(const SignalList& h, const std::vector<Spectrum>& filters, double eps);

/// Alternating projections between modulus g and the range of W; returns the iterate after `iters`.
Signal gerchberg_saxton(const Signal& f0, const RealMatrix& g, const WaveletFamily& family,
                        int iters, double eps, std::vector<double>* error_trace = nullptr);

/// The `count` best exhaustive-search pairs for scales J and J-1.
std::vector<PairResult> init_candidates(const RealMatrix& g, const WaveletFamily& family, std::size_t count);

/// Exhaustive-search estimates of f * psi_J and f * psi_{J-1}.
PairResult init_coarsest(const RealMatrix& g, const WaveletFamily& family);

ReconResult reconstruct(const RealMatrix& g, const Bank& bank, const ReconConfig& cfg = {});

}  // namespace scalopr
