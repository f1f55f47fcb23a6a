#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "scalopr/errors.hpp"
#include "scalopr/reformulation.hpp"
#include "scalopr/signals.hpp"
#include "scalopr/wavelet.hpp"

using namespace scalopr;

namespace {

// Q_j computed directly as the product of the two auxiliary transforms (spectral products,
// since the time-domain kernels of strongly weighted filters lose all precision).
oracle::CVec direct_product(const oracle::CVec& f, const Spectrum& low, const Spectrum& high) {
  const oracle::CVec fh = oracle::naive_dft(f);
  const oracle::CVec l = oracle::naive_idft(fh.cwiseProduct(low));
  const oracle::CVec h = oracle::naive_idft(fh.cwiseProduct(high));
  return l.cwiseProduct(h.conjugate());
}

}  // namespace

TEST(Reformulation, QFromScalogramEqualsProductOfAuxiliaryTransforms) {
  const int n = 64;
  const Bank bank = make_bank(default_bank(n));
  const oracle::CVec f = oracle::random_analytic(n, 31);
  const RealMatrix g = scalogram(f, bank.family).g;
  const QSpectra q = compute_Q_spectra(g, bank.family, bank.aux);
  ASSERT_EQ(q.scales(), bank.family.scales());
  for (int j = 0; j < q.scales(); ++j) {
    const auto expected = direct_product(f, bank.aux.low[static_cast<std::size_t>(j)],
                                         bank.aux.high[static_cast<std::size_t>(j)]);
    EXPECT_LT((q.Q[static_cast<std::size_t>(j)] - expected).norm(), 1e-9 * expected.norm()) << "j=" << j;
  }
  const RealVector res = reformulation_residual(f, bank.aux, q);
  EXPECT_LT(res.maxCoeff(), 1e-9);
}

TEST(Reformulation, QOnCauchyBankAtMatchedRadius) {
  const WaveletFamily fam = build_family(MotherWavelet::cauchy(16.0, 1.0), 128, 2.0, 3, {.k_max = 64});
  const AuxiliaryBank aux = cauchy_auxiliary(fam);
  const oracle::CVec f = oracle::random_analytic(128, 2);
  const QSpectra q = compute_Q_spectra(scalogram(f, fam).g, fam, aux);
  for (int j = 0; j <= 3; ++j) {
    const auto expected = direct_product(f, aux.low[static_cast<std::size_t>(j)], aux.high[static_cast<std::size_t>(j)]);
    EXPECT_LT((q.Q[static_cast<std::size_t>(j)] - expected).norm(), 1e-5 * expected.norm()) << "j=" << j;
  }
}

TEST(Reformulation, ComputeQWeightsSignedFrequencies) {
  const int n = 16;
  RealVector g(n);
  for (int i = 0; i < n; ++i) g[i] = 1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * i / n) + 0.1 * (i % 3);
  const double r = 0.8;
  const Signal q = compute_Q(g, r);
  const oracle::CVec spec = oracle::naive_dft(oracle::CVec(g.cwiseAbs2().cast<Complex>()));
  oracle::CVec expected(n);
  for (int b = 0; b < n; ++b) expected[b] = spec[b] * std::pow(r, oracle::freq(b, n));
  EXPECT_LT((oracle::naive_dft(q) - expected).norm(), 1e-10 * expected.norm());
  // log r = 0 reproduces g^2
  EXPECT_LT((compute_Q_log(g, 0.0) - g.cwiseAbs2().cast<Complex>()).norm(), 1e-12 * g.squaredNorm());
  EXPECT_THROW(compute_Q(g, 1.5), ArgumentError);
  EXPECT_THROW(compute_Q_log(g, 0.1), ArgumentError);
}

TEST(Reformulation, MaxLagZeroesOuterFrequencies) {
  const RealVector g = oracle::random_complex(32, 4).real().cwiseAbs();
  const Signal q = compute_Q(g, 0.9, 3);
  const oracle::CVec s = oracle::naive_dft(q);
  for (int b = 0; b < 32; ++b) {
    if (std::abs(oracle::freq(b, 32)) > 3) EXPECT_NEAR(std::abs(s[b]), 0.0, 1e-12);
  }
}

TEST(Reformulation, LagWidthIsSupportDiameter) {
  Spectrum psi = Spectrum::Zero(32);
  psi[4] = 1.0;
  psi[5] = 2.0;
  psi[9] = 0.5;
  psi[10] = 1e-20;
  EXPECT_EQ(filter_lag_width(psi), 5);
  EXPECT_EQ(filter_lag_width(Spectrum::Zero(8)), 0);
}

TEST(Reformulation, PolynomialExtensionOnUnitCircleIsDft) {
  const oracle::CVec h = oracle::random_complex(12, 3);
  const oracle::CVec s = oracle::naive_dft(h);
  for (int b = 0; b < 12; ++b) {
    // sum_k h^[k] z^k with z = exp(2 pi i m / N) gives N h[m]
    const Complex z = std::polar(1.0, 2.0 * std::numbers::pi * b / 12.0);
    EXPECT_NEAR(std::abs(poly_extension(h, z) - 12.0 * h[b]), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(poly_extension_spectrum(s, z) - 12.0 * h[b]), 0.0, 1e-10);
  }
  // off the circle: direct Laurent sum
  const Complex z(0.7, 0.2);
  Complex expected = 0.0;
  for (int b = 0; b < 12; ++b) expected += s[b] * std::pow(z, static_cast<int>(oracle::freq(b, 12)));
  EXPECT_NEAR(std::abs(poly_extension(h, z) - expected), 0.0, 1e-10 * std::abs(expected));
}

TEST(Reformulation, NoiseEstimateTracksInjectedNoise) {
  const Bank bank = make_bank(default_bank(256));
  const Signal f = gen_gaussian_process(256, 3);
  const RealMatrix g = scalogram(f, bank.family).g;
  EXPECT_LT(estimate_noise_level(g, bank.family), 1e-12);
  EXPECT_DOUBLE_EQ(adaptive_lag_tol(g, bank.family), 1e-14);
  for (double level : {1e-3, 1e-2}) {
    const RealMatrix h = add_noise(g, level, 11).h;
    const double est = estimate_noise_level(h, bank.family);
    EXPECT_GT(est, 0.5 * level);
    EXPECT_LT(est, 2.0 * level);
    EXPECT_NEAR(adaptive_lag_tol(h, bank.family), est, 1e-18);
  }
  EXPECT_EQ(estimate_noise_level(RealMatrix::Zero(bank.family.scales(), 256), bank.family), 0.0);
}

TEST(Reformulation, ZeroScalogramGivesZeroQ) {
  const Bank bank = make_bank(default_bank(64));
  const QSpectra q = compute_Q_spectra(RealMatrix::Zero(bank.family.scales(), 64), bank.family, bank.aux);
  EXPECT_EQ(q.squared_norm(), 0.0);
}
