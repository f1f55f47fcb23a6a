#include "scalopr/reformulation.hpp"

#include <algorithm>
#include <cmath>

#include "scalopr/errors.hpp"
#include "scalopr/spectral.hpp"

namespace scalopr {

double QSpectra::squared_norm() const {
  double s = 0.0;
  for (const auto& q : Q) s += q.squaredNorm();
  return s;
}

Signal compute_Q_log(const RealVector& g, double log_r, int max_lag) {
  if (!(log_r <= 0.0) || !std::isfinite(log_r)) {
    throw ArgumentError("compute_Q: log r_j must be finite and nonpositive");
  }
  const Eigen::Index n = g.size();
  Spectrum spectrum = dft(g.cwiseAbs2());
  const double peak = spectrum.cwiseAbs().maxCoeff();
  if (peak == 0.0) return Signal::Zero(n);
  for (Eigen::Index b = 0; b < n; ++b) {
    const long k = signed_frequency(b, n);
    if (std::abs(spectrum[b]) < kQSpectrumFloor * peak || (max_lag >= 0 && std::labs(k) > max_lag)) {
      spectrum[b] = 0.0;
    } else {
      spectrum[b] *= std::exp(log_r * static_cast<double>(k));
    }
  }
  return idft(spectrum);
}

Signal compute_Q(const RealVector& g, double r, int max_lag) {
  if (!(r > 0.0 && r < 1.0)) throw ArgumentError("compute_Q: r_j must lie in (0, 1)");
  return compute_Q_log(g, std::log(r), max_lag);
}

int filter_lag_width(const Spectrum& psi, double tol) {
  const double peak = psi.cwiseAbs().maxCoeff();
  if (peak == 0.0) return 0;
  const Eigen::Index n = psi.size();
  long lo = n, hi = -n;
  for (Eigen::Index b = 0; b < n; ++b) {
    if (std::abs(psi[b]) > tol * peak) {
      const long k = signed_frequency(b, n);
      lo = std::min(lo, k);
      hi = std::max(hi, k);
    }
  }
  return static_cast<int>(hi - lo);
}

double estimate_noise_level(const RealMatrix& g, const WaveletFamily& family) {
  if (g.rows() != family.scales() || g.cols() != family.N()) {
    throw ArgumentError("estimate_noise_level: scalogram shape does not match the bank");
  }
  const Eigen::Index n = g.cols();
  const double total = g.squaredNorm();
  if (total == 0.0) return 0.0;
  double sigma2 = 0.0;
  long bins = 0;
  for (int j = 0; j < family.scales(); ++j) {
    const int lag = filter_lag_width(family[j], kQLagTol);
    const double gj = g.row(j).squaredNorm();
    if (gj == 0.0) continue;
    const Spectrum s = dft(RealVector(g.row(j).transpose().cwiseAbs2()));
    for (Eigen::Index b = 0; b < n; ++b) {
      if (std::abs(signed_frequency(b, n)) <= lag) continue;
      sigma2 += std::norm(s[b]) / (4.0 * gj);
      ++bins;
    }
  }
  if (bins == 0) return 0.0;
  sigma2 /= static_cast<double>(bins);
  return std::sqrt(sigma2 * static_cast<double>(g.size()) / total);
}

double adaptive_lag_tol(const RealMatrix& g, const WaveletFamily& family) {
  return std::clamp(estimate_noise_level(g, family), kQLagTol, 1e-2);
}

QSpectra compute_Q_spectra(const RealMatrix& g, const WaveletFamily& family,
                           const AuxiliaryBank& aux, double lag_tol) {
  if (g.rows() != family.scales() || g.cols() != family.N()) {
    throw ArgumentError("compute_Q_spectra: scalogram shape does not match the bank");
  }
  QSpectra q;
  for (int j = 0; j < family.scales(); ++j) {
    const int lag = lag_tol > 0.0 ? filter_lag_width(family[j], lag_tol) : -1;
    q.Q.push_back(compute_Q_log(g.row(j).transpose(), aux.log_r[static_cast<std::size_t>(j)], lag));
    q.log_r.push_back(aux.log_r[static_cast<std::size_t>(j)]);
  }
  return q;
}

Complex poly_extension_spectrum(const Spectrum& spectrum, Complex z) {
  const Eigen::Index n = spectrum.size();
  const long lo = static_cast<long>(n / 2) - static_cast<long>(n) + 1;
  if (z == Complex(0.0)) {
    for (long k = lo; k < 0; ++k) {
      if (spectrum[bin_of(k, n)] != Complex(0.0)) {
        throw DomainError("poly_extension: negative powers evaluated at z = 0");
      }
    }
    return spectrum[0];
  }
  // Horner in z over k = lo..hi, then the z^lo factor.
  Complex acc(0.0);
  for (long k = static_cast<long>(n / 2); k >= lo; --k) acc = acc * z + spectrum[bin_of(k, n)];
  return acc * std::pow(z, static_cast<double>(lo));
}

Complex poly_extension(const Signal& h, Complex z) { return poly_extension_spectrum(dft(h), z); }

RealVector reformulation_residual(const Signal& f, const AuxiliaryBank& aux, const QSpectra& q) {
  if (q.scales() != aux.scales()) throw ArgumentError("reformulation_residual: scale count mismatch");
  const Spectrum spectrum = dft(f);
  RealVector out(q.scales());
  for (int j = 0; j < q.scales(); ++j) {
    const auto idx = static_cast<std::size_t>(j);
    const Signal low = idft(spectrum.cwiseProduct(aux.low[idx]));
    const Signal high = idft(spectrum.cwiseProduct(aux.high[idx]));
    const double denom = std::max(q.Q[idx].norm(), 1e-30);
    out[j] = (low.cwiseProduct(high.conjugate()) - q.Q[idx]).norm() / denom;
  }
  return out;
}

}  // namespace scalopr
