#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "scalopr/errors.hpp"
#include "scalopr/small_solver.hpp"
#include "scalopr/spectral.hpp"
#include "scalopr/wavelet.hpp"

using namespace scalopr;

namespace {

// Signal whose spectrum is the given coefficients on bins first..first+K-1.
oracle::CVec planted(long n, int first, const std::vector<Complex>& c) {
  oracle::CVec s = oracle::CVec::Zero(n);
  for (std::size_t i = 0; i < c.size(); ++i) s[first + static_cast<long>(i)] = c[i];
  return oracle::naive_idft(s);
}

std::vector<Complex> random_coeffs(int k, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Complex> c(static_cast<std::size_t>(k));
  for (auto& x : c) x = Complex(normal(rng), normal(rng));
  return c;
}

}  // namespace

TEST(SmallSolver, AutocorrelationMatchesDirectLagSums) {
  const int K = 5;
  const auto c = random_coeffs(K, 1);
  const oracle::CVec g = planted(32, 3, c);
  const RealVector m = g.cwiseAbs();
  const auto a = autocorrelation_coefficients(m, K);
  ASSERT_EQ(a.size(), static_cast<std::size_t>(2 * K - 1));
  for (int d = -(K - 1); d <= K - 1; ++d) {
    Complex expected = 0.0;
    for (int i = 0; i < K; ++i) {
      if (i + d >= 0 && i + d < K) expected += c[static_cast<std::size_t>(i + d)] * std::conj(c[static_cast<std::size_t>(i)]);
    }
    EXPECT_NEAR(std::abs(a[static_cast<std::size_t>(d + K - 1)] - expected), 0.0, 1e-10) << "lag " << d;
  }
}

TEST(SmallSolver, PolynomialRootsOfPlantedPolynomial) {
  const std::vector<Complex> roots{{0.5, 0.1}, {-1.2, 0.7}, {0.0, -2.0}, {3.0, 0.0}};
  // coefficients low to high of 2 prod (X - s)
  std::vector<Complex> c{2.0};
  for (const auto& s : roots) {
    std::vector<Complex> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= s * c[i];
    }
    c = next;
  }
  auto found = polynomial_roots(c);
  ASSERT_EQ(found.size(), roots.size());
  for (const auto& s : roots) {
    double best = 1e300;
    for (const auto& t : found) best = std::min(best, std::abs(s - t));
    EXPECT_LT(best, 1e-10);
  }
}

TEST(SmallSolver, CandidatesContainTruthAndShareModulus) {
  for (unsigned seed = 0; seed < 5; ++seed) {
    const int K = 6;
    const oracle::CVec g = planted(40, 2, random_coeffs(K, 10 + seed));
    const RealVector m = g.cwiseAbs();
    const SignalList cands = candidate_signals(m, BinRange{2, 2 + K - 1});
    ASSERT_FALSE(cands.empty());
    EXPECT_LE(cands.size(), std::size_t{1} << (K - 1));
    double best = 1e300;
    for (const auto& c : cands) {
      EXPECT_LT((c.cwiseAbs() - m).norm(), 1e-7 * m.norm());
      best = std::min(best, oracle::phase_free_distance(g, c));
      // top bin real positive
      const oracle::CVec s = oracle::naive_dft(c);
      EXPECT_NEAR(s[2 + K - 1].imag(), 0.0, 1e-8 * s.norm());
      EXPECT_GT(s[2 + K - 1].real(), 0.0);
    }
    EXPECT_LT(best, 1e-7) << "seed " << seed;
  }
}

TEST(SmallSolver, SingleBinAndZeroModulus) {
  const oracle::CVec g = planted(16, 4, {Complex(0.0, 2.0)});
  const SignalList one = candidate_signals(g.cwiseAbs(), BinRange{4, 4});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_LT(oracle::phase_free_distance(g, one[0]), 1e-12);
  const SignalList zero = candidate_signals(RealVector::Zero(16), 3);
  ASSERT_EQ(zero.size(), 1u);
  EXPECT_EQ(zero[0].norm(), 0.0);
  EXPECT_THROW(candidate_signals(RealVector::Ones(16), BinRange{3, 2}), ArgumentError);
}

TEST(SmallSolver, ModulusTolFiltersCandidates) {
  const oracle::CVec g = planted(32, 1, random_coeffs(4, 3));
  const RealVector m = g.cwiseAbs();
  const auto all = candidate_signals(m, 4);
  const auto kept = candidate_signals(m, 4, {.modulus_tol = 1e-8});
  EXPECT_EQ(all.size(), kept.size());
}

TEST(SmallSolver, ResolvePairRecoversCoarsestScalesOfWaveletTransform) {
  const Bank bank = make_bank(default_bank(128));
  const int J = bank.family.J();
  for (unsigned seed = 0; seed < 5; ++seed) {
    const oracle::CVec f = oracle::random_analytic(128, 40 + seed);
    const oracle::CVec wj = oracle::naive_circular_convolve(f, oracle::naive_idft(bank.family[J]));
    const oracle::CVec wj1 = oracle::naive_circular_convolve(f, oracle::naive_idft(bank.family[J - 1]));
    const PairResult p = resolve_pair(wj.cwiseAbs(), wj1.cwiseAbs(), bank.family[J], bank.family[J - 1]);
    // a common phase, not two independent ones; the filter tails beyond the 1e-6 support limit the accuracy
    const Complex phase = wj.dot(p.coarse) / std::abs(wj.dot(p.coarse));
    EXPECT_LT((p.coarse - phase * wj).norm(), 1e-3 * wj.norm()) << "seed " << seed;
    EXPECT_LT((p.fine - phase * wj1).norm(), 1e-3 * wj1.norm()) << "seed " << seed;
    EXPECT_LT(p.sin2, 1e-6);
  }
}

TEST(SmallSolver, RankedPairsAreSortedAndLeadWithResolvePair) {
  const Bank bank = make_bank(default_bank(128));
  const int J = bank.family.J();
  const oracle::CVec f = oracle::random_analytic(128, 77);
  const RealVector mc = oracle::naive_circular_convolve(f, oracle::naive_idft(bank.family[J])).cwiseAbs();
  const RealVector mf = oracle::naive_circular_convolve(f, oracle::naive_idft(bank.family[J - 1])).cwiseAbs();
  const BinRange sc = essential_support(bank.family[J], 1e-6), sf = essential_support(bank.family[J - 1], 1e-6);
  const auto ranked = ranked_pairs(mc, mf, bank.family[J], bank.family[J - 1], sc, sf, 4);
  ASSERT_GE(ranked.size(), 2u);
  for (std::size_t i = 1; i < ranked.size(); ++i) EXPECT_LE(ranked[i - 1].sin2, ranked[i].sin2);
  const PairResult best = resolve_pair(mc, mf, bank.family[J], bank.family[J - 1], sc, sf);
  EXPECT_EQ(best.coarse_index, ranked[0].coarse_index);
  EXPECT_EQ(best.fine_index, ranked[0].fine_index);
  ASSERT_TRUE(ranked[0].runner_up.has_value());
  EXPECT_LT((ranked[0].runner_up->first - ranked[1].coarse).norm(), 1e-12);
}

TEST(SmallSolver, TruncateFilterKeepsHighestEnergyWindow) {
  Spectrum psi = Spectrum::Zero(32);
  for (int k = 1; k <= 16; ++k) psi[k] = std::exp(-0.1 * (k - 9) * (k - 9));
  const Spectrum t = truncate_filter(psi, 5);
  for (int k = 0; k < 32; ++k) {
    if (k >= 7 && k <= 11) EXPECT_EQ(t[k], psi[k]);
    else EXPECT_EQ(t[k], Complex(0.0));
  }
  EXPECT_THROW(truncate_filter(psi, 0), ArgumentError);
}

TEST(SmallSolver, WindowOfZerosGivesZeros) {
  const Bank bank = make_bank(default_bank(64));
  const RealVector g = RealVector::Ones(64);
  const PairResult p = windowed_exhaustive(g, g, RealVector::Zero(64), bank.family[2], bank.family[1]);
  EXPECT_EQ(p.coarse.norm(), 0.0);
  EXPECT_EQ(p.fine.norm(), 0.0);
}
