/**
 * @file experiment.hpp
 * @brief Trial drivers: noise sweeps over signal classes and methods, the
 * stability study, and the local-minima study.
 *
 * Config JSON (every key but "kind" optional):
 *   {"kind": "sweep" | "stability" | "local_minima",
 *    "N": [256], "noise": [1e-4, 1e-3, 1e-2], "seeds": 20, "seed_base": 0,
 *    "classes": [{"kind": "gaussian"},
 *                {"kind": "sparse_sinusoids", "prob": 0.01},
 *                {"kind": "audio_like", "cutoff": 4},
 *                {"kind": "image_line", "path": "x.pgm", "rows": [3, 17]},
 *                {"kind": "wav", "path": "x.wav", "offsets": [0, 4096]}],
 *    "methods": ["multiscale", "gs_classic", "gs_multiscale"],
 *    "bank": {... bank JSON without N ...},
 *    "recon": {... reconstruction config ...},
 *    "gs": {"iters": 200, "deconv_eps": 1e-4},
 *    "phase_map": {"class": 0, "N": 256, "noise": 1e-4, "seed": 0},
 *    "local_minima": {"trials": 50, "threshold": 1e-3, "minus_log_r": 0.012, "max_iters": 10000}}
 *
 * Every random draw is seeded from (seed_base + seed, noise index), so a
 * config run twice gives the same trial rows bit for bit.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scalopr/baselines.hpp"
#include "scalopr/io.hpp"
#include "scalopr/reconstruct.hpp"

namespace scalopr {

enum class SignalKind { Gaussian, SparseSinusoids, AudioLike, ImageLine, Wav };

struct SignalClass {
  SignalKind kind = SignalKind::Gaussian;
  double prob = 0.01;             ///< sparse sinusoids
  int cutoff = 4;                 ///< audio-like
  std::string path;               ///< image or wav file
  std::vector<long> positions;    ///< image rows or wav offsets, used cyclically by seed

  std::string name() const;
  /// Trial signal for `seed`; `flag` gets "redrawn" or "degenerate" when that happens.
  Signal generate(int n, unsigned long long seed, std::string* flag = nullptr) const;
};

enum class Method { Multiscale, GsClassic, GsMultiscale };
std::string to_string(Method m);

struct PhaseMapRequest {
  std::size_t cls = 0;
  int n = 0;
  double noise = 0.0;
  int seed = 0;
};

struct ExperimentConfig {
  std::string kind = "sweep";
  std::vector<int> sizes{256};
  std::vector<double> noise{0.0};
  int seeds = 20;
  unsigned long long seed_base = 0;
  std::vector<SignalClass> classes{SignalClass{}};
  std::vector<Method> methods{Method::Multiscale};
  Json bank = Json::object();  ///< bank JSON; N is filled per trial
  ReconConfig recon;
  GsOptions gs;
  std::optional<PhaseMapRequest> phase_map;
  int lm_trials = 50;
  double lm_threshold = 1e-3;
  double lm_minus_log_r = 0.012;
  int lm_max_iters = 10000;
};

/// ConfigError with a descriptive message on any schema violation, before any trial runs.
ExperimentConfig experiment_config_from_json(const Json& j);

struct TrialRecord {
  std::string cls;
  int n = 0;
  double noise_target = 0.0;
  int seed = 0;
  std::string method;
  double noise_amount = 0.0;   ///< ||noise|| / ||g|| actually injected
  double recon_error = 0.0;
  double signal_error = 0.0;
  double lipschitz = 0.0;      ///< C with recon_error <= C signal_error
  int iterations = 0;          ///< iteration budget of GS methods, 0 for multiscale
  double wall_time_s = 0.0;
  std::vector<std::string> flags;
};

/// Noise sweep and stability trials, in deterministic order (class, N, noise, seed, method).
std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg);

/// trials.csv (no timing fields), timing.csv, summary.json into `dir` (created if needed).
void write_trials(const std::string& dir, const ExperimentConfig& cfg, const std::vector<TrialRecord>& trials);

/// stability.csv: (recon_error, signal_error, ratio, C, bound_ok) per multiscale trial.
void write_stability(const std::string& dir, const std::vector<TrialRecord>& trials);

/**
 * Phase difference arg((W f_rec)[j, n] conj((W f)[j, n])) after the best global
 * phase, NaN where |(W f)[j, n]| < 1e-3 max |W f|. Rows j, columns n.
 */
RealMatrix phase_difference_map(const Signal& f, const Signal& f_rec, const WaveletFamily& family);

/// Runs the requested trial and writes phase_map.dat (gnuplot blocks: j n phase, blank line per scale).
void write_phase_map(const std::string& dir, const ExperimentConfig& cfg);

struct LocalMinimaRecord {
  int trial = 0;
  double value_aux = 0.0;        ///< final auxiliary objective / sum ||Q_j||^2
  double value_classical = 0.0;  ///< final classical objective / sum ||g_j^2||^2
  int iters_aux = 0;
  int iters_classical = 0;
  double error_aux = 0.0;        ///< modulus error of the final f
  double error_classical = 0.0;
};

struct LocalMinimaSummary {
  std::vector<LocalMinimaRecord> records;
  double fail_aux = 0.0;        ///< proportion of values above the threshold
  double fail_classical = 0.0;
  double global_aux = 0.0;      ///< proportion of runs whose final f has modulus error below kGlobalHitTol
  double global_classical = 0.0;
};

/// Modulus error under which a local-minima run counts as having reached the global minimum.
inline constexpr double kGlobalHitTol = 1e-6;

/**
 * Random analytic starting points, the same for both objectives; each run is
 * L-BFGS on every variable at once. Gaussian signals, dyadic Morlet bank with
 * -log r = cfg.lm_minus_log_r, sizes cfg.sizes.front().
 */
LocalMinimaSummary local_minima_study(const ExperimentConfig& cfg);
void write_local_minima(const std::string& dir, const ExperimentConfig& cfg, const LocalMinimaSummary& s);

/// Dispatch on cfg.kind; returns a one-line summary for the console.
std::string run_experiment(const ExperimentConfig& cfg, const std::string& dir);

}  // namespace scalopr
