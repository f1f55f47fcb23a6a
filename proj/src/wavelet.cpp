#include "scalopr/wavelet.hpp"

#include <cmath>
#include <numbers>

#include "scalopr/errors.hpp"
#include "scalopr/spectral.hpp"

namespace scalopr {

std::string to_string(MotherKind kind) {
  switch (kind) {
    case MotherKind::Morlet: return "morlet";
    case MotherKind::Laplacian: return "laplacian";
    case MotherKind::Gammatone: return "gammatone";
    case MotherKind::Cauchy: return "cauchy";
  }
  return "unknown";
}

MotherKind mother_kind_from_string(const std::string& name) {
  if (name == "morlet") return MotherKind::Morlet;
  if (name == "laplacian") return MotherKind::Laplacian;
  if (name == "gammatone") return MotherKind::Gammatone;
  if (name == "cauchy") return MotherKind::Cauchy;
  throw ConfigError("unknown mother wavelet '" + name + "'");
}

MotherWavelet MotherWavelet::morlet(double p, double omega0) {
  if (!(p > 0.0) || !(omega0 > 0.0)) throw ArgumentError("morlet: p and omega0 must be positive");
  MotherWavelet m;
  m.kind_ = MotherKind::Morlet;
  m.p_ = p;
  m.beta_ = std::exp(-p);
  m.omega0_ = omega0;
  return m;
}

MotherWavelet MotherWavelet::laplacian(double omega0) {
  if (!(omega0 > 0.0)) throw ArgumentError("laplacian: omega0 must be positive");
  MotherWavelet m;
  m.kind_ = MotherKind::Laplacian;
  m.omega0_ = omega0;
  return m;
}

MotherWavelet MotherWavelet::gammatone(int order, double lambda, double omega0) {
  if (order < 1 || !(lambda > 0.0) || !(omega0 > 0.0)) {
    throw ArgumentError("gammatone: order >= 1, lambda > 0, omega0 > 0 required");
  }
  MotherWavelet m;
  m.kind_ = MotherKind::Gammatone;
  m.order_ = order;
  m.lambda_ = lambda;
  m.omega0_ = omega0;
  return m;
}

MotherWavelet MotherWavelet::cauchy(double p1, double p2) {
  if (!(p1 > 0.0) || !(p2 > 0.0)) throw ArgumentError("cauchy: p1 and p2 must be positive");
  MotherWavelet m;
  m.kind_ = MotherKind::Cauchy;
  m.p1_ = p1;
  m.p2_ = p2;
  return m;
}

Complex MotherWavelet::weighted(double omega, double log_factor) const {
  if (!(omega > 0.0)) return Complex(0.0);
  double log_mag = 0.0;
  double phase = 0.0;
  switch (kind_) {
    case MotherKind::Morlet: {
      // e^{-p(x-1)^2} - e^{-p} e^{-p x^2} = e^{-p(x-1)^2} (1 - e^{-2px})
      const double x = omega / omega0_;
      log_mag = -p_ * (x - 1.0) * (x - 1.0) + std::log1p(-std::exp(-2.0 * p_ * x));
      break;
    }
    case MotherKind::Laplacian: {
      const double x = omega / omega0_;
      log_mag = 2.0 * std::log(x) + 1.0 - x * x;
      break;
    }
    case MotherKind::Gammatone: {
      const double x = omega / omega0_;
      const double u = lambda_ * (x - 1.0);
      log_mag = std::log(x) - 0.5 * order_ * std::log1p(u * u);
      phase = 0.5 * std::numbers::pi - order_ * std::atan(u);
      break;
    }
    case MotherKind::Cauchy:
      log_mag = p1_ * std::log(omega) - p2_ * omega;
      break;
  }
  return std::polar(std::exp(log_mag + log_factor), phase);
}

BinRange essential_support(const Spectrum& spectrum, double tol) {
  const int n = static_cast<int>(spectrum.size());
  const int top = n / 2;
  double peak = 0.0;
  for (int k = 1; k <= top; ++k) peak = std::max(peak, std::abs(spectrum[k]));
  BinRange range;
  if (peak == 0.0) return range;
  range.first = top + 1;
  for (int k = 1; k <= top; ++k) {
    if (std::abs(spectrum[k]) > tol * peak) {
      range.first = std::min(range.first, k);
      range.last = std::max(range.last, k);
    }
  }
  return range;
}

WaveletFamily::WaveletFamily(FamilyInfo info, std::vector<Spectrum> filters, FamilyOptions options)
    : info_(std::move(info)), filters_(std::move(filters)), options_(options) {}

double WaveletFamily::dilation(int j) const { return std::pow(info_.a, j); }

double WaveletFamily::operator_norm() const {
  const RealVector energy = filter_energy(filters_);
  return std::sqrt(energy.head(N() / 2 + 1).maxCoeff());
}

int default_num_scales(int N, double a) {
  if (N < 2 || !(a > 1.0)) throw ArgumentError("default_num_scales: N >= 2 and a > 1 required");
  return static_cast<int>(std::floor(std::log(N / 2.0) / std::log(a) + 1e-9));
}

WaveletFamily build_family(const MotherWavelet& mother, int N, double a, int J,
                           const FamilyOptions& options) {
  if (N < 8) throw ArgumentError("build_family: N must be at least 8");
  if (!(a > 1.0)) throw ArgumentError("build_family: dilation factor must exceed 1");
  if (J < 2) throw ArgumentError("build_family: J must be at least 2");

  std::vector<Spectrum> filters;
  filters.reserve(static_cast<std::size_t>(J + 1));
  for (int j = 0; j <= J; ++j) {
    const double scale = std::pow(a, j);
    Spectrum psi(N);
    for (int k = 0; k < N; ++k) psi[k] = mother(scale * static_cast<double>(signed_frequency(k, N)));
    filters.push_back(std::move(psi));
  }
  const BinRange coarsest = essential_support(filters.back(), options.support_tol);
  if (coarsest.size() == 0) {
    throw ConfigError("build_family: coarsest filter vanishes on the analytic bins");
  }
  if (coarsest.size() > options.k_max) {
    throw ConfigError("J too small for exhaustive initialization: psi_J spans " +
                      std::to_string(coarsest.size()) + " bins (limit " +
                      std::to_string(options.k_max) + ")");
  }
  return WaveletFamily(FamilyInfo{mother, N, a, J}, std::move(filters), options);
}

double AuxiliaryBank::r_j(int j) const { return std::exp(log_r.at(static_cast<std::size_t>(j))); }

AuxiliaryBank build_auxiliary(const WaveletFamily& family, double r) {
  if (!(r > 0.0 && r < 1.0)) throw ArgumentError("build_auxiliary: r must lie in (0, 1)");
  AuxiliaryBank aux;
  aux.r = r;
  const int n = family.N();
  for (int j = 0; j < family.scales(); ++j) {
    const double scale = family.dilation(j);
    const double log_rj = scale * std::log(r);
    Spectrum low(n), high(n);
    for (int k = 0; k < n; ++k) {
      const auto w = static_cast<double>(signed_frequency(k, n));
      low[k] = family.mother().weighted(scale * w, log_rj * w);
      high[k] = family.mother().weighted(scale * w, -log_rj * w);
    }
    aux.log_r.push_back(log_rj);
    aux.low.push_back(std::move(low));
    aux.high.push_back(std::move(high));
  }
  return aux;
}

double cauchy_radius(double p2, double a) { return std::exp(-p2 * (a - 1.0) / (a + 1.0)); }

AuxiliaryBank cauchy_auxiliary(const WaveletFamily& family) {
  if (family.mother().kind() != MotherKind::Cauchy) {
    throw ArgumentError("cauchy_auxiliary: family mother is not a Cauchy wavelet");
  }
  return build_auxiliary(family, cauchy_radius(family.mother().p2(), family.a()));
}

BankDescription default_bank(int N) {
  BankDescription d;
  d.N = N;
  d.a = 2.0;
  d.J = default_num_scales(N, d.a);
  d.mother = MotherWavelet::morlet(kDefaultMorletP, std::pow(d.a, d.J));
  d.r = std::exp(-kDefaultMinusLogR);
  return d;
}

Bank make_bank(const BankDescription& description) {
  WaveletFamily family =
      build_family(description.mother, description.N, description.a, description.J,
                   description.options);
  BankDescription resolved = description;
  if (!(resolved.r > 0.0)) {
    resolved.r = description.mother.kind() == MotherKind::Cauchy
                     ? cauchy_radius(description.mother.p2(), description.a)
                     : std::exp(-kDefaultMinusLogR);
  }
  AuxiliaryBank aux = build_auxiliary(family, resolved.r);
  return Bank{resolved, std::move(family), std::move(aux)};
}

SignalList wavelet_transform(const Signal& f, const WaveletFamily& family) {
  if (f.size() != family.N()) throw ArgumentError("wavelet_transform: signal length mismatch");
  const Spectrum spectrum = dft(f);
  SignalList out;
  out.reserve(static_cast<std::size_t>(family.scales()));
  for (int j = 0; j < family.scales(); ++j) out.push_back(idft(spectrum.cwiseProduct(family[j])));
  return out;
}

Scalogram scalogram(const Signal& f, const WaveletFamily& family) {
  const SignalList components = wavelet_transform(f, family);
  Scalogram s;
  s.info = family.info();
  s.g.resize(family.scales(), family.N());
  for (int j = 0; j < family.scales(); ++j) s.g.row(j) = components[j].cwiseAbs().transpose();
  return s;
}

Spectrum resample_filter(const WaveletFamily& family, int j, int length, double log_weight) {
  if (length < 2) throw ArgumentError("resample_filter: grid too short");
  const double scale = family.dilation(j);
  const double step = static_cast<double>(family.N()) / length;
  Spectrum psi(length);
  for (int kappa = 0; kappa < length; ++kappa) {
    const double omega = static_cast<double>(signed_frequency(kappa, length)) * step;
    psi[kappa] = family.mother().weighted(scale * omega, log_weight * omega);
  }
  return psi;
}

}  // namespace scalopr
