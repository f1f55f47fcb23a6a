/**
 * @file wavelet.hpp
 * @brief Mother wavelets, dilated families, auxiliary low/high banks, scalograms.
 *
 * Frequencies are measured in DFT bins of scale 0: filter j is
 *   psi^_j[k] = psi^(a^j k),  k the signed frequency of bin k,
 * so the mother's centre frequency omega0 is the peak bin of psi_0 and scale J
 * (the coarsest) peaks near omega0 / a^J. Bins above N/2 hold negative
 * frequencies, where every mother vanishes.
 */
#pragma once

#include <string>
#include <vector>

#include "scalopr/types.hpp"

namespace scalopr {

enum class MotherKind { Morlet, Laplacian, Gammatone, Cauchy };

std::string to_string(MotherKind kind);
MotherKind mother_kind_from_string(const std::string& name);

/// Fourier-domain mother wavelet psi^ on the nonnegative frequency axis (zero for omega <= 0).
class MotherWavelet {
 public:
  /// exp(-p (x-1)^2) - beta exp(-p x^2), x = omega/omega0, beta = e^{-p} so that psi^(0) = 0.
  static MotherWavelet morlet(double p, double omega0 = 1.0);
  /// x^2 exp(1 - x^2), x = omega/omega0.
  static MotherWavelet laplacian(double omega0 = 1.0);
  /// (i x) (1 + i lambda (x-1))^{-order}, x = omega/omega0 (derivative-of-gammatone shape).
  static MotherWavelet gammatone(int order = 4, double lambda = 2.0, double omega0 = 1.0);
  /// omega^{p1} exp(-p2 omega), literal frequency axis.
  static MotherWavelet cauchy(double p1, double p2);

  MotherKind kind() const { return kind_; }
  double p() const { return p_; }
  double beta() const { return beta_; }
  double omega0() const { return omega0_; }
  double p1() const { return p1_; }
  double p2() const { return p2_; }
  int order() const { return order_; }
  double lambda() const { return lambda_; }

  Complex operator()(double omega) const { return weighted(omega, 0.0); }

  /// psi^(omega) * exp(log_factor), combined in the log domain so that large
  /// auxiliary weights r^{-k} never meet an underflowed filter value.
  Complex weighted(double omega, double log_factor) const;

 private:
  MotherWavelet() = default;

  MotherKind kind_ = MotherKind::Morlet;
  double p_ = 0.0;
  double beta_ = 0.0;
  double omega0_ = 1.0;
  double p1_ = 0.0;
  double p2_ = 0.0;
  int order_ = 0;
  double lambda_ = 0.0;
};

struct FamilyInfo {
  MotherWavelet mother = MotherWavelet::morlet(1.0);
  int N = 0;
  double a = 2.0;
  int J = 0;
};

/// Closed interval of DFT bins [first, last]; empty when last < first.
struct BinRange {
  int first = 0;
  int last = -1;
  int size() const { return last >= first ? last - first + 1 : 0; }
};

/// Bins in 1..N/2 where |spectrum| exceeds tol * max over that range.
BinRange essential_support(const Spectrum& spectrum, double tol);

struct FamilyOptions {
  int k_max = 12;             ///< largest Fourier support allowed for psi_J
  double support_tol = 1e-6;  ///< relative threshold defining that support
};

class WaveletFamily {
 public:
  WaveletFamily(FamilyInfo info, std::vector<Spectrum> filters, FamilyOptions options);

  const FamilyInfo& info() const { return info_; }
  const MotherWavelet& mother() const { return info_.mother; }
  int N() const { return info_.N; }
  double a() const { return info_.a; }
  int J() const { return info_.J; }
  int scales() const { return info_.J + 1; }
  const FamilyOptions& options() const { return options_; }

  /// Dilation a^j applied to the frequency axis of scale j.
  double dilation(int j) const;

  const Spectrum& operator[](int j) const { return filters_.at(static_cast<std::size_t>(j)); }
  const std::vector<Spectrum>& filters() const { return filters_; }

  /// sqrt(max_k sum_j |psi^_j[k]|^2) over analytic bins: operator norm of f -> Wf.
  double operator_norm() const;

 private:
  FamilyInfo info_;
  std::vector<Spectrum> filters_;
  FamilyOptions options_;
};

/// Throws ConfigError when psi_J is wider than options.k_max bins.
WaveletFamily build_family(const MotherWavelet& mother, int N, double a, int J,
                           const FamilyOptions& options = {});

/// Largest J with a^J <= N/2.
int default_num_scales(int N, double a);

/// Auxiliary filters psi^_j[k] r_j^{+-k}, with r_j = r^{a^j}.
struct AuxiliaryBank {
  double r = 0.0;
  std::vector<double> log_r;  ///< log r_j = a^j log r (r_j itself may underflow)
  std::vector<Spectrum> low;
  std::vector<Spectrum> high;

  int scales() const { return static_cast<int>(low.size()); }
  double r_j(int j) const;
};

AuxiliaryBank build_auxiliary(const WaveletFamily& family, double r);

/// r = exp(-p2 (a-1)/(a+1)), the radius for which psi_{j+1}^high = a^{p1} psi_j^low.
double cauchy_radius(double p2, double a);

/// Auxiliary bank of a Cauchy family with the matched radius.
AuxiliaryBank cauchy_auxiliary(const WaveletFamily& family);

/// Everything needed to rebuild a bank: serialized to JSON for reproducibility.
struct BankDescription {
  MotherWavelet mother = MotherWavelet::morlet(1.0);
  int N = 0;
  double a = 2.0;
  int J = 0;
  double r = 0.0;
  FamilyOptions options;
};

/// Bandwidth parameter of the default dyadic Morlet bank.
inline constexpr double kDefaultMorletP = 2.0;
/// Default -log(r) for non-Cauchy banks.
inline constexpr double kDefaultMinusLogR = 0.006;

/// Dyadic Morlet, J = default_num_scales(N, 2), omega0 = 2^J, -log r = 0.006.
BankDescription default_bank(int N);

struct Bank {
  BankDescription description;
  WaveletFamily family;
  AuxiliaryBank aux;
};

Bank make_bank(const BankDescription& description);

/// Entrywise modulus of the wavelet transform, one row per scale.
struct Scalogram {
  RealMatrix g;  ///< (J+1) x N
  FamilyInfo info;

  int scales() const { return static_cast<int>(g.rows()); }
  int length() const { return static_cast<int>(g.cols()); }
  RealVector row(int j) const { return g.row(j).transpose(); }
};

/// {f * psi_j}, j = 0..J.
SignalList wavelet_transform(const Signal& f, const WaveletFamily& family);

Scalogram scalogram(const Signal& f, const WaveletFamily& family);

/// Filter j evaluated on a periodic grid of `length` samples: local bin kappa
/// (signed) sits at full-grid frequency w = kappa * N / length, negative w maps
/// to zero. The value is multiplied by exp(log_weight * w), so passing log r_j
/// (or -log r_j) gives the low (high) auxiliary filter.
Spectrum resample_filter(const WaveletFamily& family, int j, int length, double log_weight = 0.0);

}  // namespace scalopr
