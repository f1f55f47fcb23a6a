#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "scalopr/baselines.hpp"
#include "scalopr/errors.hpp"
#include "scalopr/signals.hpp"

using namespace scalopr;

TEST(Baselines, RandomAnalyticIsUnitNormAnalyticAndSeeded) {
  const Signal a = random_analytic(64, 5), b = random_analytic(64, 5), c = random_analytic(64, 6);
  EXPECT_NEAR(a.norm(), 1.0, 1e-12);
  EXPECT_EQ((a - b).norm(), 0.0);
  EXPECT_GT((a - c).norm(), 0.1);
  const oracle::CVec s = oracle::naive_dft(a);
  EXPECT_LT(std::abs(s[0]), 1e-12);
  for (int k = 33; k < 64; ++k) EXPECT_LT(std::abs(s[k]), 1e-12) << k;
}

TEST(Baselines, ClassicGsKeepsTheTruthFixed) {
  const Bank bank = make_bank(default_bank(128));
  const Signal f = gen_gaussian_process(128, 3);
  const RealMatrix g = scalogram(f, bank.family).g;
  const ReconResult r = gs_classic(g, bank.family, {.iters = 10}, f);
  EXPECT_LT(signal_error(f, r.f_rec), 1e-9);
  EXPECT_LT(r.reconstruction_error, 1e-9);
  EXPECT_EQ(r.trace.size(), 10u);
}

TEST(Baselines, ClassicGsIsPhaseEquivariant) {
  const Bank bank = make_bank(default_bank(64));
  const Signal f = gen_gaussian_process(64, 4);
  const RealMatrix g = scalogram(f, bank.family).g;
  const Signal init = random_analytic(64, 9);
  const Complex phase = std::polar(1.0, 0.7);
  const ReconResult a = gs_classic(g, bank.family, {.iters = 20}, init);
  const ReconResult b = gs_classic(g, bank.family, {.iters = 20}, Signal(phase * init));
  EXPECT_LT((phase * a.f_rec - b.f_rec).norm(), 1e-10 * a.f_rec.norm());
  EXPECT_NEAR(a.reconstruction_error, b.reconstruction_error, 1e-12);
}

TEST(Baselines, SeededRandomInitIsDeterministic) {
  const Bank bank = make_bank(default_bank(64));
  const RealMatrix g = scalogram(gen_gaussian_process(64, 1), bank.family).g;
  const ReconResult a = gs_classic(g, bank.family, {.iters = 15, .seed = 2});
  const ReconResult b = gs_classic(g, bank.family, {.iters = 15, .seed = 2});
  EXPECT_EQ((a.f_rec - b.f_rec).norm(), 0.0);
}

TEST(Baselines, MultiscaleBudgetCountsEveryStage) {
  const Bank bank = make_bank(default_bank(256));
  EXPECT_EQ(gs_multiscale_budget(bank.family, {.iters = 200}), 200 * bank.family.J());
  EXPECT_EQ(gs_multiscale_budget(bank.family, {.iters = 1}), bank.family.J());
}

TEST(Baselines, MultiscaleBeatsClassicOnPlantedSignalAtEqualBudget) {
  const Bank bank = make_bank(default_bank(128));
  const Signal f = gen_gaussian_process(128, 21);
  const RealMatrix g = scalogram(f, bank.family).g;
  const GsOptions opts{.iters = 50};
  const ReconResult ms = gs_multiscale(g, bank.family, opts);
  const ReconResult cl = gs_classic(g, bank.family, {.iters = gs_multiscale_budget(bank.family, opts), .seed = 21});
  EXPECT_LE(ms.reconstruction_error, cl.reconstruction_error);
  EXPECT_NEAR(ms.reconstruction_error, modulus_error(ms.f_rec, g, bank.family), 1e-12);
}

TEST(Baselines, ZeroScalogramAndBadIterations) {
  const Bank bank = make_bank(default_bank(64));
  const RealMatrix zero = RealMatrix::Zero(bank.family.scales(), 64);
  EXPECT_EQ(gs_classic(zero, bank.family, {}).f_rec.norm(), 0.0);
  EXPECT_EQ(gs_multiscale(zero, bank.family, {}).f_rec.norm(), 0.0);
  EXPECT_THROW(gs_classic(zero, bank.family, {.iters = 0}), ArgumentError);
  EXPECT_THROW(gs_multiscale(zero, bank.family, {.iters = 0}), ArgumentError);
  EXPECT_THROW(gs_classic(zero, bank.family, {}, Signal::Zero(32)), ArgumentError);
}
