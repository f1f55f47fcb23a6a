/**
 * @file io.hpp
 * @brief JSON and CSV forms of banks, configurations, scalograms, signals and results.
 *
 * Bank JSON:
 *   {"mother": {"kind": "morlet", "p": 2, "omega0": 128},
 *    "N": 256, "a": 2, "J": 7, "minus_log_r": 0.006, "k_max": 12, "support_tol": 1e-6}
 * "r" may be given instead of "minus_log_r" (the writer uses "r", which round-trips exactly).
 * "J" defaults to the largest J with a^J <= N/2, Morlet "omega0" to a^J,
 * "minus_log_r" (or "r") to the Cauchy radius for Cauchy banks and 0.006 otherwise.
 *
 * Scalogram CSV: comment lines starting with '#', one of them "# bank: <json>",
 * then one row per scale j = 0..J with N comma-separated values.
 */
#pragma once

#include <string>

#include "json.hpp"

#include "scalopr/reconstruct.hpp"
#include "scalopr/types.hpp"
#include "scalopr/wavelet.hpp"

namespace scalopr {

using Json = nlohmann::json;

/// Parses a file; IoError if unreadable, ConfigError if not JSON.
Json read_json_file(const std::string& path);
/// Pretty-printed, trailing newline.
void write_json_file(const std::string& path, const Json& j);

Json bank_to_json(const BankDescription& d);
/// ConfigError on unknown keys, wrong types or invalid values. `default_n` is used when "N" is absent.
BankDescription bank_from_json(const Json& j, int default_n = 0);

Json recon_config_to_json(const ReconConfig& c);
/// Missing keys keep their defaults; unknown keys are errors.
ReconConfig recon_config_from_json(const Json& j);

/// Diagnostics, flags and errors; the signal itself only if `with_signal`.
Json recon_result_to_json(const ReconResult& r, bool with_signal = false);

struct ScalogramFile {
  RealMatrix g;
  bool has_bank = false;
  BankDescription bank;
};

void write_scalogram_csv(const std::string& path, const RealMatrix& g, const BankDescription& bank);
ScalogramFile read_scalogram_csv(const std::string& path);

/// Header "n,re,im", one row per sample.
void write_signal_csv(const std::string& path, const Signal& f);
/// Accepts "n,re,im" rows, or a single column of real samples (no header needed).
Signal read_signal_csv(const std::string& path);

/// Header "stage,iter,value,grad_norm".
void write_trace_csv(const std::string& path, const std::vector<StageTrace>& trace);

/// Shortest text that reads back to the same double ("nan", "inf" for non-finite).
std::string format_double(double x);

}  // namespace scalopr
