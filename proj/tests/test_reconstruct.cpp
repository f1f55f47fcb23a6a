#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "scalopr/errors.hpp"
#include "scalopr/reconstruct.hpp"
#include "scalopr/reformulation.hpp"
#include "scalopr/signals.hpp"
#include "scalopr/spectral.hpp"

using namespace scalopr;

namespace {

std::size_t at(int j) { return static_cast<std::size_t>(j); }

// f * psi through a naive spectral product.
oracle::CVec filtered(const oracle::CVec& f, const Spectrum& psi) {
  return oracle::naive_idft(oracle::naive_dft(f).cwiseProduct(psi));
}

}  // namespace

TEST(Reconstruct, RecoverHighInvertsTheProduct) {
  const Bank bank = make_bank(default_bank(64));
  const oracle::CVec f = oracle::random_analytic(64, 1);
  const int j = 2;
  const oracle::CVec low = filtered(f, bank.aux.low[at(j)]), high = filtered(f, bank.aux.high[at(j)]);
  const Signal q = low.cwiseProduct(high.conjugate());
  // with no floor the division is exact wherever low is nonzero
  const Signal h = recover_high(low, q, 0.0);
  EXPECT_LT((h - high).norm(), 1e-10 * high.norm());
  bool degenerate = false;
  const Signal z = recover_high(Signal::Zero(64), q, 1e-6, &degenerate);
  EXPECT_TRUE(degenerate);
  EXPECT_EQ(z.norm(), 0.0);
  // the floor only shrinks: |h_eps| <= |h|
  const Signal he = recover_high(low, q, 1e-2);
  for (int i = 0; i < 64; ++i) EXPECT_LE(std::abs(he[i]), std::abs(high[i]) * (1 + 1e-12) + 1e-15);
}

TEST(Reconstruct, PropagatePhaseMatchesTruthAndIsLinear) {
  const Bank bank = make_bank(default_bank(128));
  const int J = bank.family.J();
  const int j = 1;
  // f lives on bins 1..peak of scale j+1, where the coarser scales carry energy
  Eigen::Index top = 0;
  bank.family[j + 1].cwiseAbs().maxCoeff(&top);
  oracle::CVec spec = oracle::CVec::Zero(128);
  const oracle::CVec noise = oracle::random_complex(128, 2);
  for (Eigen::Index k = 1; k <= top; ++k) spec[k] = noise[k];
  const oracle::CVec f = oracle::naive_idft(spec);
  const OptState truth = OptState::from_signal(f, bank.aux);
  const Signal est = propagate_phase(j, truth.low, truth.high, bank.aux, 1e-12);
  const oracle::CVec expected = filtered(f, bank.aux.low[at(j)]);
  EXPECT_LT((est - expected).norm(), 1e-6 * expected.norm());
  // linear in the known transforms
  const oracle::CVec f2 = oracle::random_analytic(128, 3);
  const OptState t2 = OptState::from_signal(f2, bank.aux);
  const Complex c(0.4, -1.3);
  SignalList low = truth.low, high = truth.high;
  for (int i = 0; i <= J; ++i) {
    low[at(i)] += c * t2.low[at(i)];
    high[at(i)] += c * t2.high[at(i)];
  }
  const Signal lhs = propagate_phase(j, low, high, bank.aux, 1e-4);
  const Signal rhs = propagate_phase(j, truth.low, truth.high, bank.aux, 1e-4) +
                     c * propagate_phase(j, t2.low, t2.high, bank.aux, 1e-4);
  EXPECT_LT((lhs - rhs).norm(), 1e-10 * lhs.norm());
  EXPECT_THROW(propagate_phase(J, low, high, bank.aux, 1e-4), ArgumentError);
}

TEST(Reconstruct, ConstraintResidualVanishesOnTruth) {
  const Bank bank = make_bank(default_bank(64));
  const oracle::CVec f = oracle::random_analytic(64, 4);
  for (int j = 0; j < bank.family.J(); ++j) {
    const oracle::CVec low = filtered(f, bank.aux.low[at(j)]), high_next = filtered(f, bank.aux.high[at(j + 1)]);
    EXPECT_LT(constraint_residual(low, high_next, bank.aux, j).norm(), 1e-10 * (low.norm() + high_next.norm()));
    EXPECT_TRUE(detect_errors(low, high_next, bank.aux, j, 5.0, 1e-3, 2).empty());
  }
}

namespace {

struct Corrupted {
  Bank bank = make_bank(default_bank(128));
  int j = 3;
  oracle::CVec f;
  Signal low, high_next, bad_low;
  RealMatrix g;
  int centre = 70, width = 6;

  Corrupted() {
    f = gen_gaussian_process(128, 12);
    g = scalogram(f, bank.family).g;
    low = filtered(f, bank.aux.low[at(j)]);
    high_next = filtered(f, bank.aux.high[at(j + 1)]);
    bad_low = low;
    // conjugate a short stretch: the modulus survives, the constraint breaks
    for (int i = centre - width; i <= centre + width; ++i) bad_low[i] = std::conj(bad_low[i]) * std::polar(1.0, 2.0);
  }
};

}  // namespace

TEST(Reconstruct, DetectErrorsFindsCorruptedStretch) {
  Corrupted c;
  const auto intervals = detect_errors(c.bad_low, c.high_next, c.bank.aux, c.j, 5.0, 1e-3, 4);
  ASSERT_FALSE(intervals.empty());
  bool covers = false;
  for (const auto& iv : intervals) {
    if (iv.start <= c.centre && c.centre < iv.start + iv.length) covers = true;
    EXPECT_GT(iv.length, 0);
  }
  EXPECT_TRUE(covers);
}

TEST(Reconstruct, ErrorCorrectionReducesResidualTenfold) {
  // sign flip of f * psi_0^low on samples 100..140
  const Bank bank = make_bank(default_bank(256));
  const int j = 0;
  const Signal f = gen_gaussian_process(256, 12);
  const RealMatrix g = scalogram(f, bank.family).g;
  const Signal low = filtered(f, bank.aux.low[at(j)]), high_next = filtered(f, bank.aux.high[at(j + 1)]);
  Signal bad = low;
  for (int i = 100; i <= 140; ++i) bad[i] = -bad[i];
  const auto intervals = detect_errors(bad, high_next, bank.aux, j, 5.0, 1e-3, 4);
  ASSERT_FALSE(intervals.empty());
  const CorrectionResult r = error_correct(j, bad, high_next, g, bank.family, bank.aux, intervals);
  EXPECT_TRUE(r.applied);
  EXPECT_NEAR(r.residual_before, constraint_residual(bad, high_next, bank.aux, j).norm(), 1e-12 * r.residual_before);
  EXPECT_LE(r.residual_after, 0.1 * r.residual_before);
  EXPECT_NEAR(r.residual_after, constraint_residual(r.low, r.high_next, bank.aux, j).norm(), 1e-9 * r.residual_before);
  // the flip is undone, not just hidden
  EXPECT_LT(oracle::phase_free_distance(low, r.low), 0.2 * (bad - low).norm() / low.norm());
}

TEST(Reconstruct, ErrorCorrectionNeverRaisesResidual) {
  Corrupted c;
  const auto intervals = detect_errors(c.bad_low, c.high_next, c.bank.aux, c.j, 5.0, 1e-3, 4);
  ASSERT_FALSE(intervals.empty());
  const CorrectionResult r = error_correct(c.j, c.bad_low, c.high_next, c.g, c.bank.family, c.bank.aux, intervals);
  EXPECT_GT(r.windows, 0);
  EXPECT_LE(r.residual_after, r.residual_before);
  if (!r.applied) EXPECT_EQ((r.low - c.bad_low).norm(), 0.0);
  const CorrectionResult none = error_correct(c.j, c.bad_low, c.high_next, c.g, c.bank.family, c.bank.aux, {});
  EXPECT_FALSE(none.applied);
  EXPECT_EQ(none.windows, 0);
}

TEST(Reconstruct, CorrectionWindowSpansKmaxBins) {
  const Bank bank = make_bank(default_bank(256));
  for (int j = 0; j <= bank.family.J(); ++j) {
    const int w = correction_window(bank.family, j, 12);
    EXPECT_EQ(w % 2, 0);
    EXPECT_LE(w, 256);
    const int b = essential_support(bank.family[j], bank.family.options().support_tol).size();
    // clamped to the full grid when k_max bins need more than N samples
    if (w < 256) EXPECT_GE(static_cast<double>(b) * w / 256.0, 12.0 - 1e-9);
    else EXPECT_EQ(w, 256);
  }
}

TEST(Reconstruct, AssembleInvertsTransformOnAnalyticSignals) {
  const Bank bank = make_bank(default_bank(64));
  const oracle::CVec f = gen_gaussian_process(64, 5);
  SignalList comps;
  for (int j = 0; j <= bank.family.J(); ++j) comps.push_back(filtered(f, bank.family[j]));
  const Signal back = assemble_signal(comps, bank.family.filters(), 1e-12);
  // bin 0 carries no filter energy and f has none there either
  EXPECT_LT((back - f).norm(), 1e-10 * f.norm());
  EXPECT_THROW(assemble_signal(SignalList{}, bank.family.filters(), 1e-12), ArgumentError);
}

TEST(Reconstruct, GerchbergSaxtonFixedPointAndMonotoneError) {
  const Bank bank = make_bank(default_bank(64));
  const oracle::CVec f = gen_gaussian_process(64, 6);
  const RealMatrix g = scalogram(f, bank.family).g;
  const Signal same = gerchberg_saxton(f, g, bank.family, 5, 1e-12);
  EXPECT_LT((same - f).norm(), 1e-10 * f.norm());
  std::vector<double> trace;
  gerchberg_saxton(oracle::random_analytic(64, 7), g, bank.family, 30, 1e-12, &trace);
  ASSERT_EQ(trace.size(), 30u);
  for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1] * (1 + 1e-9));
}

TEST(Reconstruct, InitFindsPlantedCoarsestPair) {
  const Bank bank = make_bank(default_bank(256));
  const int J = bank.family.J();
  for (unsigned long long seed = 0; seed < 3; ++seed) {
    const Signal f = gen_gaussian_process(256, seed);
    const RealMatrix g = scalogram(f, bank.family).g;
    const PairResult p = init_coarsest(g, bank.family);
    const oracle::CVec wj = filtered(f, bank.family[J]);
    EXPECT_LT(oracle::phase_free_distance(wj, p.coarse), 1e-3) << seed;
    const auto ranked = init_candidates(g, bank.family, 3);
    ASSERT_FALSE(ranked.empty());
    EXPECT_EQ(ranked[0].coarse_index, p.coarse_index);
  }
}

TEST(Reconstruct, NoiselessEndToEnd) {
  const Bank bank = make_bank(default_bank(64));
  const Signal f = gen_gaussian_process(64, 9);
  const RealMatrix g = scalogram(f, bank.family).g;
  const ReconResult r = reconstruct(g, bank);
  EXPECT_LT(r.reconstruction_error, 1e-6);
  EXPECT_NEAR(modulus_error(r.f_rec, g, bank.family), r.reconstruction_error, 1e-9);
  EXPECT_EQ(r.f_rec.size(), 64);
  EXPECT_GE(r.attempts, 1);
  EXPECT_EQ(static_cast<int>(r.scales.size()), bank.family.scales() - 1);
  EXPECT_FALSE(r.trace.empty());
  // modulus recovery implies signal recovery up to phase here
  EXPECT_LT(signal_error(f, r.f_rec), 1e-4);
}

TEST(Reconstruct, ScaleInvariance) {
  const Bank bank = make_bank(default_bank(64));
  const Signal f = gen_gaussian_process(64, 10);
  const RealMatrix g = scalogram(f, bank.family).g;
  const ReconResult a = reconstruct(g, bank), b = reconstruct(1e3 * g, bank);
  // equal up to the global phase, which is not determined by g
  EXPECT_LT(oracle::phase_free_distance(b.f_rec, Signal(1e3 * a.f_rec)), 1e-8);
}

TEST(Reconstruct, ZeroScalogramGivesZeroSignal) {
  const Bank bank = make_bank(default_bank(64));
  const ReconResult r = reconstruct(RealMatrix::Zero(bank.family.scales(), 64), bank);
  EXPECT_EQ(r.f_rec.norm(), 0.0);
  EXPECT_EQ(r.reconstruction_error, 0.0);
}

TEST(Reconstruct, ShapeMismatchIsRejected) {
  const Bank bank = make_bank(default_bank(64));
  EXPECT_THROW(reconstruct(RealMatrix::Ones(3, 64), bank), ArgumentError);
}
