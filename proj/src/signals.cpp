#include "scalopr/signals.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "scalopr/errors.hpp"
#include "scalopr/spectral.hpp"

namespace scalopr {

namespace {

Complex complex_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

RealVector hann(int n) {
  RealVector w(n);
  for (int i = 0; i < n; ++i) w[i] = std::pow(std::sin(std::numbers::pi * (i + 0.5) / n), 2);
  return w;
}

std::string read_token(std::istream& in) {
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    return tok;
  }
  return {};
}

}  // namespace

Signal gen_gaussian_process(int n, unsigned long long seed) {
  if (n < 8) throw ArgumentError("gen_gaussian_process: N must be at least 8");
  std::mt19937_64 rng(seed);
  Spectrum spectrum = Spectrum::Zero(n);
  for (int k = 1; k <= n / 2; ++k) spectrum[k] = complex_normal(rng) / std::sqrt(k + 1.0);
  return idft(spectrum);
}

Signal gen_sparse_sinusoids(int n, double prob, unsigned long long seed, bool* redrawn) {
  if (n < 8) throw ArgumentError("gen_sparse_sinusoids: N must be at least 8");
  if (!(prob >= 0.0 && prob < 1.0)) throw ArgumentError("gen_sparse_sinusoids: prob must lie in [0, 1)");
  if (redrawn) *redrawn = false;
  // With prob = 0 every draw is empty; after a few retries force one active bin.
  for (unsigned long long attempt = 0;; ++attempt) {
    std::mt19937_64 rng(seed + attempt);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Spectrum spectrum = Spectrum::Zero(n);
    bool any = false;
    for (int k = 1; k <= n / 2; ++k) {
      const double u = uniform(rng);
      const Complex x = complex_normal(rng);
      if (u < prob) {
        spectrum[k] = x;
        any = true;
      }
    }
    if (!any && attempt >= 8) {
      std::uniform_int_distribution<int> bin(1, n / 2);
      spectrum[bin(rng)] = complex_normal(rng);
      any = true;
    }
    if (!any) {
      if (redrawn) *redrawn = true;
      continue;
    }
    if (redrawn && attempt > 0) *redrawn = true;
    const Signal tones = idft(spectrum);
    return analytic_project(Signal(tones.cwiseProduct(hann(n).cast<Complex>())));
  }
}

Signal gen_audio_like(int n, unsigned long long seed, int cutoff) {
  if (n < 32) throw ArgumentError("gen_audio_like: N must be at least 32");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  // Fundamental between n/40 and n/20 bins, gliding by up to 20 %.
  const double f_start = n / 40.0 * (1.0 + uniform(rng));
  const double f_end = f_start * (0.8 + 0.4 * uniform(rng));
  const int harmonics = 3 + static_cast<int>(uniform(rng) * 3.0);
  std::vector<double> amp(static_cast<std::size_t>(harmonics));
  std::vector<double> phase0(static_cast<std::size_t>(harmonics));
  for (int h = 0; h < harmonics; ++h) {
    amp[static_cast<std::size_t>(h)] = (0.3 + uniform(rng)) / (1.0 + h);
    phase0[static_cast<std::size_t>(h)] = 2.0 * std::numbers::pi * uniform(rng);
  }
  // Two syllables separated by near silence.
  const double c1 = 0.25 + 0.1 * uniform(rng), c2 = 0.7 + 0.1 * uniform(rng);
  const double w1 = 0.12 + 0.05 * uniform(rng), w2 = 0.1 + 0.05 * uniform(rng);
  RealVector s(n);
  double phase = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / n;
    const double f0 = f_start + (f_end - f_start) * t;
    phase += 2.0 * std::numbers::pi * f0 / n;
    const double env = std::exp(-0.5 * std::pow((t - c1) / w1, 2)) + 0.7 * std::exp(-0.5 * std::pow((t - c2) / w2, 2));
    double v = 0.0;
    for (int h = 0; h < harmonics; ++h) {
      v += amp[static_cast<std::size_t>(h)] * std::cos((h + 1) * phase + phase0[static_cast<std::size_t>(h)]);
    }
    s[i] = env * v;
  }
  Spectrum spectrum = dft(s.cast<Complex>());
  zero_upper_half(spectrum);
  for (int k = 0; k < std::min(cutoff, n); ++k) spectrum[k] = 0.0;
  Signal f = idft(spectrum);
  const double norm = f.norm();
  return norm > 0.0 ? Signal(f / norm) : f;
}

Signal normalize_real_samples(const RealVector& samples, bool* degenerate) {
  RealVector x = samples.array() - samples.mean();
  const double norm = x.norm();
  const bool flat = !(norm > 1e-12 * std::max(1.0, samples.cwiseAbs().maxCoeff()) * std::sqrt(static_cast<double>(x.size())));
  if (degenerate) *degenerate = flat;
  if (flat) return Signal::Zero(samples.size());
  Signal f = analytic_project(Signal((x / norm).cast<Complex>()));
  return f / f.norm();
}

Signal ingest_image_line(const std::string& path, int row, int n, bool* degenerate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image '" + path + "'");
  const std::string magic = read_token(in);
  if (magic != "P2" && magic != "P5") throw IoError("'" + path + "' is not a PGM (P2/P5) image");
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(read_token(in));
    height = std::stoi(read_token(in));
    maxval = std::stoi(read_token(in));
  } catch (const std::exception&) {
    throw IoError("malformed PGM header in '" + path + "'");
  }
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) throw IoError("malformed PGM header in '" + path + "'");
  if (row < 0 || row >= height) throw IoError("row " + std::to_string(row) + " outside image '" + path + "'");
  if (n > width) throw IoError("image '" + path + "' is narrower than N = " + std::to_string(n));

  RealVector line(n);
  if (magic == "P2") {
    for (long i = 0; i < static_cast<long>(row) * width; ++i) {
      if (read_token(in).empty()) throw IoError("truncated PGM '" + path + "'");
    }
    for (int i = 0; i < n; ++i) {
      const std::string tok = read_token(in);
      if (tok.empty()) throw IoError("truncated PGM '" + path + "'");
      line[i] = std::stod(tok);
    }
  } else {
    in.get();  // single whitespace after maxval
    const int bytes = maxval < 256 ? 1 : 2;
    in.seekg(static_cast<std::streamoff>(row) * width * bytes, std::ios::cur);
    std::vector<unsigned char> buf(static_cast<std::size_t>(n * bytes));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw IoError("truncated PGM '" + path + "'");
    for (int i = 0; i < n; ++i) {
      line[i] = bytes == 1 ? buf[static_cast<std::size_t>(i)]
                           : buf[static_cast<std::size_t>(2 * i)] * 256.0 + buf[static_cast<std::size_t>(2 * i + 1)];
    }
  }
  return normalize_real_samples(line, degenerate);
}

Signal ingest_wav(const std::string& path, long offset, int n, bool* degenerate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV '" + path + "'");
  auto u32 = [&](const unsigned char* p) { return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24); };
  auto u16 = [&](const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); };
  unsigned char header[12];
  in.read(reinterpret_cast<char*>(header), 12);
  if (in.gcount() != 12 || std::string(reinterpret_cast<char*>(header), 4) != "RIFF" ||
      std::string(reinterpret_cast<char*>(header) + 8, 4) != "WAVE") {
    throw IoError("'" + path + "' is not a RIFF/WAVE file");
  }
  int channels = 0, bits = 0, format = 0;
  std::vector<unsigned char> data;
  unsigned char chunk[8];
  while (in.read(reinterpret_cast<char*>(chunk), 8)) {
    const std::string id(reinterpret_cast<char*>(chunk), 4);
    const std::uint32_t size = u32(chunk + 4);
    std::vector<unsigned char> body(size);
    in.read(reinterpret_cast<char*>(body.data()), size);
    if (static_cast<std::uint32_t>(in.gcount()) != size) throw IoError("truncated WAV chunk in '" + path + "'");
    if (size % 2) in.get();
    if (id == "fmt " && size >= 16) {
      format = u16(body.data());
      channels = u16(body.data() + 2);
      bits = u16(body.data() + 14);
    } else if (id == "data") {
      data = std::move(body);
      break;
    }
  }
  if (format != 1 || bits != 16 || channels < 1) throw IoError("'" + path + "': only 16-bit PCM WAV is supported");
  const long frames = static_cast<long>(data.size()) / (2 * channels);
  if (offset < 0 || offset + n > frames) throw IoError("segment outside WAV '" + path + "'");
  RealVector x(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const std::size_t pos = static_cast<std::size_t>(((offset + i) * channels + c) * 2);
      acc += static_cast<std::int16_t>(u16(data.data() + pos));
    }
    x[i] = acc / channels;
  }
  return normalize_real_samples(x, degenerate);
}

NoisyMeasurement add_noise(const RealMatrix& g, double target, unsigned long long seed) {
  if (!(target >= 0.0)) throw ArgumentError("add_noise: target must be nonnegative");
  NoisyMeasurement m;
  m.seed = seed;
  m.noise = RealMatrix::Zero(g.rows(), g.cols());
  m.h = g;
  if (target == 0.0 || g.norm() == 0.0) return m;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index c = 0; c < g.cols(); ++c) {
    for (Eigen::Index r = 0; r < g.rows(); ++r) m.noise(r, c) = normal(rng);
  }
  m.noise *= target * g.norm() / m.noise.norm();
  m.h = g + m.noise;
  m.amount = m.noise.norm() / g.norm();
  return m;
}

double signal_error(const Signal& f, const Signal& f_rec) {
  const double fn = f.norm();
  if (fn == 0.0) throw DomainError("signal_error: reference signal is zero");
  const Complex inner = f.dot(f_rec);  // sum conj(f) f_rec
  const Complex phase = std::abs(inner) > 0.0 ? inner / std::abs(inner) : Complex(1.0);
  return (phase * f - f_rec).norm() / fn;
}

Errors metrics(const Signal& f, const Signal& f_rec, const WaveletFamily& family) {
  if (f.size() != f_rec.size()) throw ArgumentError("metrics: length mismatch");
  if (f.norm() == 0.0) throw DomainError("metrics: reference signal is zero");
  const RealMatrix g = scalogram(f, family).g;
  const RealMatrix g_rec = scalogram(f_rec, family).g;
  return Errors{(g - g_rec).norm() / g.norm(), signal_error(f, f_rec)};
}

double modulus_lipschitz(const Signal& f, const WaveletFamily& family) {
  const double wf = scalogram(f, family).g.norm();
  if (wf == 0.0) throw DomainError("modulus_lipschitz: W f = 0");
  return family.operator_norm() * f.norm() / wf;
}

}  // namespace scalopr
