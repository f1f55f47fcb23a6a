/**
 * @file signals.hpp
 * @brief Test signal generators, noise injection and error metrics.
 */
#pragma once

#include <string>

#include "scalopr/types.hpp"
#include "scalopr/wavelet.hpp"

namespace scalopr {

/// f^[k] = X_k / sqrt(k + 1) for k = 1..N/2, X_k standard complex Gaussian; zero elsewhere.
Signal gen_gaussian_process(int n, unsigned long long seed);

/**
 * Sum of complex exponentials at bins 1..N/2, each active with probability
 * `prob` and then Gaussian, times a Hann window, analytic part. An empty
 * draw is retried with seed + 1, seed + 2, ... and `redrawn` is set.
 */
Signal gen_sparse_sinusoids(int n, double prob, unsigned long long seed, bool* redrawn = nullptr);

/**
 * Voice-like stand-in for audio: a few harmonics of a slowly gliding
 * fundamental under a syllable envelope, nothing below `cutoff` bins.
 */
Signal gen_audio_like(int n, unsigned long long seed, int cutoff = 4);

/// Zero mean, unit norm, analytic part. A constant input gives zeros and sets `degenerate`.
Signal normalize_real_samples(const RealVector& samples, bool* degenerate = nullptr);

/// Row `row` of a PGM image (P2 or P5), first n columns.
Signal ingest_image_line(const std::string& path, int row, int n, bool* degenerate = nullptr);

/// n samples of a 16-bit PCM WAV file starting at `offset` (stereo averaged).
Signal ingest_wav(const std::string& path, long offset, int n, bool* degenerate = nullptr);

struct NoisyMeasurement {
  RealMatrix h;             ///< g + noise, not clamped
  RealMatrix noise;
  double amount = 0.0;      ///< ||noise|| / ||g||
  unsigned long long seed = 0;
};

/// White Gaussian noise scaled so that ||noise|| / ||g|| equals `target`.
NoisyMeasurement add_noise(const RealMatrix& g, double target, unsigned long long seed);

struct Errors {
  double recon = 0.0;   ///< || |W f_rec| - |W f| || / || W f ||
  double signal = 0.0;  ///< min over phi of || e^{i phi} f - f_rec || / ||f||
};

/// Throws DomainError for f = 0.
Errors metrics(const Signal& f, const Signal& f_rec, const WaveletFamily& family);

/// min over phi of || e^{i phi} f - f_rec || / ||f||, phi = arg <f_rec, f>.
double signal_error(const Signal& f, const Signal& f_rec);

/// ||W|| ||f|| / ||W f||: bounds recon error by this times the signal error.
double modulus_lipschitz(const Signal& f, const WaveletFamily& family);

}  // namespace scalopr
