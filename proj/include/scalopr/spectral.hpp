/**
 * @file spectral.hpp
 * @brief DFT, circular convolution, analytic projection and Tikhonov deconvolution.
 *
 * Forward transform is unnormalized, inverse carries the 1/N factor:
 *   f^[k] = sum_n f[n] exp(-2 pi i k n / N).
 * All functions accept Eigen expressions and return evaluated vectors.
 */
#pragma once

#include <cmath>
#include <span>
#include <string>

#include <unsupported/Eigen/FFT>

#include "scalopr/errors.hpp"
#include "scalopr/types.hpp"

namespace scalopr {

namespace detail {

// Eigen::FFT caches twiddle tables per size; one engine per thread.
template <typename Real>
Eigen::FFT<Real>& fft_engine() {
  thread_local Eigen::FFT<Real> engine;
  return engine;
}

}  // namespace detail

/// Signed frequency of DFT bin k, in {floor(N/2)-N+1, ..., floor(N/2)}.
inline long signed_frequency(Eigen::Index k, Eigen::Index n) {
  return k <= n / 2 ? static_cast<long>(k) : static_cast<long>(k - n);
}

/// DFT bin holding signed frequency k.
inline Eigen::Index bin_of(long k, Eigen::Index n) {
  const long m = k % static_cast<long>(n);
  return m < 0 ? m + n : m;
}

template <typename Derived>
SignalT<typename Derived::RealScalar> dft(const Eigen::MatrixBase<Derived>& f) {
  using R = typename Derived::RealScalar;
  const SignalT<R> in = f.template cast<std::complex<R>>();
  SignalT<R> out(in.size());
  detail::fft_engine<R>().fwd(out, in);
  return out;
}

template <typename Derived>
SignalT<typename Derived::RealScalar> idft(const Eigen::MatrixBase<Derived>& spectrum) {
  using R = typename Derived::RealScalar;
  const SignalT<R> in = spectrum.template cast<std::complex<R>>();
  SignalT<R> out(in.size());
  detail::fft_engine<R>().inv(out, in);
  return out;
}

/// (f * g)[k] = sum_n f[n] g[(k - n) mod N], computed as a spectral product.
template <typename DerivedF, typename DerivedG>
SignalT<typename DerivedF::RealScalar> circular_convolve(const Eigen::MatrixBase<DerivedF>& f,
                                                         const Eigen::MatrixBase<DerivedG>& g) {
  if (f.size() != g.size()) {
    throw ArgumentError("circular_convolve: length mismatch (" + std::to_string(f.size()) +
                        " vs " + std::to_string(g.size()) + ")");
  }
  return idft(dft(f).cwiseProduct(dft(g)));
}

/// Convolution with a filter given by its spectrum: idft(f^ . psi^).
template <typename Derived>
SignalT<typename Derived::RealScalar> filter(const Eigen::MatrixBase<Derived>& f,
                                             const SignalT<typename Derived::RealScalar>& psi_hat) {
  if (f.size() != psi_hat.size()) throw ArgumentError("filter: length mismatch");
  return idft(dft(f).cwiseProduct(psi_hat));
}

/// Zeroes the upper half of the spectrum (bins N/2 < k <= N-1) in place.
template <typename Derived>
void zero_upper_half(Eigen::MatrixBase<Derived>& spectrum) {
  const Eigen::Index n = spectrum.size();
  const Eigen::Index first = n / 2 + 1;
  if (first < n) spectrum.segment(first, n - first).setZero();
}

template <typename Derived>
SignalT<typename Derived::RealScalar> analytic_project(const Eigen::MatrixBase<Derived>& f) {
  auto spectrum = dft(f);
  zero_upper_half(spectrum);
  return idft(spectrum);
}

/// True when every upper-half bin is below eps * max |f^|.
template <typename Derived>
bool is_analytic(const Eigen::MatrixBase<Derived>& f, double eps = 1e-12) {
  const auto spectrum = dft(f);
  const double peak = spectrum.cwiseAbs().maxCoeff();
  const Eigen::Index n = spectrum.size();
  for (Eigen::Index k = n / 2 + 1; k < n; ++k) {
    if (std::abs(spectrum[k]) > eps * peak) return false;
  }
  return true;
}

/**
 * Least-squares estimate of f^ from filtered measurements h_i = f * psi_i:
 *
 *   f^[k] = sum_i h^_i[k] conj(psi^_i[k]) / (sum_i |psi^_i[k]|^2 + eps)
 *
 * Bins whose filter energy sum_i |psi^_i[k]|^2 is below eps are set to zero.
 */
Spectrum regularized_deconvolve(std::span<const Spectrum> measurements,
                                std::span<const Spectrum> filters, double eps);

/// Filter energy sum_i |psi^_i[k]|^2 per bin.
RealVector filter_energy(std::span<const Spectrum> filters);

}  // namespace scalopr
