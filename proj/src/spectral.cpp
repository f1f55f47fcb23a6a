#include "scalopr/spectral.hpp"

namespace scalopr {

RealVector filter_energy(std::span<const Spectrum> filters) {
  if (filters.empty()) throw ArgumentError("filter_energy: empty filter list");
  RealVector energy = RealVector::Zero(filters.front().size());
  for (const auto& psi : filters) {
    if (psi.size() != energy.size()) throw ArgumentError("filter_energy: length mismatch");
    energy += psi.cwiseAbs2();
  }
  return energy;
}

Spectrum regularized_deconvolve(std::span<const Spectrum> measurements,
                                std::span<const Spectrum> filters, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("regularized_deconvolve: eps must be positive");
  if (measurements.size() != filters.size() || measurements.empty()) {
    throw ArgumentError("regularized_deconvolve: need one filter per measurement");
  }
  const RealVector energy = filter_energy(filters);
  const Eigen::Index n = energy.size();
  Spectrum numerator = Spectrum::Zero(n);
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    if (measurements[i].size() != n) throw ArgumentError("regularized_deconvolve: length mismatch");
    numerator += measurements[i].cwiseProduct(filters[i].conjugate());
  }
  Spectrum out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out[k] = energy[k] < eps ? Complex(0.0) : numerator[k] / (energy[k] + eps);
  }
  return out;
}

}  // namespace scalopr
