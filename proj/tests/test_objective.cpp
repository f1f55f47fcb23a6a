#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "oracles.hpp"
#include "scalopr/errors.hpp"
#include "scalopr/objective.hpp"
#include "scalopr/reformulation.hpp"
#include "scalopr/spectral.hpp"
#include "scalopr/wavelet.hpp"

using namespace scalopr;

namespace {

constexpr int kN = 64;

SignalList random_list(int count, unsigned seed, double scale = 1.0) {
  SignalList out;
  for (int i = 0; i < count; ++i) out.push_back(scale * oracle::random_complex(kN, seed + 17 * static_cast<unsigned>(i)));
  return out;
}

// Sum over variables of Re(conj(grad) dir): the directional derivative for gradients packed as d/dRe + i d/dIm.
double pairing(const SignalList& grad, const SignalList& dir) {
  double s = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) s += grad[i].dot(dir[i]).real();
  return s;
}

double central(const std::function<double(double)>& phi, double h = 1e-6) { return (phi(h) - phi(-h)) / (2.0 * h); }

OptState axpy(const OptState& x, double t, const OptState& d) {
  OptState out = x;
  for (std::size_t i = 0; i < x.low.size(); ++i) {
    out.low[i] += t * d.low[i];
    out.high[i] += t * d.high[i];
  }
  out.f += t * d.f;
  return out;
}

struct Fixture {
  Bank bank = make_bank(default_bank(kN));
  oracle::CVec f = oracle::random_analytic(kN, 5);
  QSpectra q = compute_Q_spectra(scalogram(f, bank.family).g, bank.family, bank.aux);
  int scales = bank.family.scales();
};

}  // namespace

TEST(Objective, GradientMatchesCentralDifferences) {
  Fixture fx;
  const ObjectiveConfig cfg{.lambda = 0.7, .mu = 1.3};
  OptState x{random_list(fx.scales, 1, 0.3), random_list(fx.scales, 2, 0.3), oracle::random_analytic(kN, 3)};
  OptState d{random_list(fx.scales, 4), random_list(fx.scales, 5), oracle::random_complex(kN, 6)};
  const ObjectiveValue v = objective_and_gradient(x, fx.q, fx.bank.aux, cfg);
  const double fd = central([&](double t) {
    return objective_value(axpy(x, t, d), fx.q, fx.bank.aux, cfg, ActiveSet::all(fx.scales));
  });
  const double analytic = pairing(v.gradient.low, d.low) + pairing(v.gradient.high, d.high) +
                          v.gradient.f.dot(d.f).real();
  EXPECT_NEAR(analytic, fd, 1e-6 * std::abs(fd) + 1e-8);
  EXPECT_NEAR(v.value, objective_value(x, fx.q, fx.bank.aux, cfg, ActiveSet::all(fx.scales)), 1e-12 * v.value);
}

TEST(Objective, GradientPerCoordinateOnSubset) {
  Fixture fx;
  const ObjectiveConfig cfg{};
  OptState x{random_list(fx.scales, 11, 0.2), random_list(fx.scales, 12, 0.2), oracle::random_analytic(kN, 13)};
  const ObjectiveValue v = objective_and_gradient(x, fx.q, fx.bank.aux, cfg);
  for (int j : {0, fx.scales / 2, fx.scales - 1}) {
    for (int k : {0, 7, 40}) {
      for (Complex unit : {Complex(1.0, 0.0), Complex(0.0, 1.0)}) {
        auto phi = [&](double t) {
          OptState y = x;
          y.low[static_cast<std::size_t>(j)][k] += t * unit;
          return objective_value(y, fx.q, fx.bank.aux, cfg, ActiveSet::all(fx.scales));
        };
        const double expected = unit.real() != 0.0 ? v.gradient.low[static_cast<std::size_t>(j)][k].real()
                                                   : v.gradient.low[static_cast<std::size_t>(j)][k].imag();
        EXPECT_NEAR(central(phi), expected, 1e-6 * (1.0 + std::abs(expected))) << j << "," << k;
      }
    }
  }
}

TEST(Objective, VanishesAtTruthAndIsGaugeInvariant) {
  Fixture fx;
  const OptState truth = OptState::from_signal(fx.f, fx.bank.aux);
  const ObjectiveValue v = objective_and_gradient(truth, fx.q, fx.bank.aux, ObjectiveConfig{});
  EXPECT_LT(v.value, 1e-18 * fx.q.squared_norm());
  const Signal rotated = std::polar(1.0, 0.9) * fx.f;
  const OptState rot = OptState::from_signal(rotated, fx.bank.aux);
  EXPECT_LT(objective_value(rot, fx.q, fx.bank.aux, ObjectiveConfig{}, ActiveSet::all(fx.scales)),
            1e-18 * fx.q.squared_norm());
  // a generic state and its rotation have the same value
  OptState x{random_list(fx.scales, 21), random_list(fx.scales, 22), oracle::random_analytic(kN, 23)};
  OptState y = x;
  const Complex u = std::polar(1.0, -2.2);
  for (int j = 0; j < fx.scales; ++j) {
    y.low[static_cast<std::size_t>(j)] *= u;
    y.high[static_cast<std::size_t>(j)] *= u;
  }
  y.f *= u;
  const double vx = objective_value(x, fx.q, fx.bank.aux, ObjectiveConfig{}, ActiveSet::all(fx.scales));
  EXPECT_NEAR(objective_value(y, fx.q, fx.bank.aux, ObjectiveConfig{}, ActiveSet::all(fx.scales)), vx, 1e-12 * vx);
}

TEST(Objective, ZeroStateCostsSquaredNormOfQ) {
  Fixture fx;
  const ObjectiveValue v = objective_and_gradient(OptState::zeros(fx.scales, kN), fx.q, fx.bank.aux, ObjectiveConfig{});
  double expected = 0.0;
  for (const auto& q : fx.q.Q) expected += q.squaredNorm();
  EXPECT_NEAR(v.value, expected, 1e-12 * expected);
  for (const auto& g : v.gradient.low) EXPECT_EQ(g.norm(), 0.0);
}

TEST(Objective, FrozenVariablesHaveZeroGradient) {
  Fixture fx;
  OptState x{random_list(fx.scales, 31), random_list(fx.scales, 32), oracle::random_analytic(kN, 33)};
  const ActiveSet act = ActiveSet::from_scale(3, fx.scales);
  const ObjectiveValue v = objective_and_gradient(x, fx.q, fx.bank.aux, ObjectiveConfig{}, act);
  for (int j = 0; j < 3; ++j) {
    EXPECT_EQ(v.gradient.low[static_cast<std::size_t>(j)].norm(), 0.0);
    EXPECT_EQ(v.gradient.high[static_cast<std::size_t>(j)].norm(), 0.0);
  }
  EXPECT_GT(v.gradient.low[3].norm(), 0.0);
  StateLayout layout(act, fx.scales, kN);
  OptState back = OptState::zeros(fx.scales, kN);
  layout.unpack(layout.pack(x), back);
  EXPECT_EQ((back.low[4] - x.low[4]).norm(), 0.0);
  EXPECT_EQ(back.low[1].norm(), 0.0);
}

TEST(Objective, MinimizeFromPerturbedTruthReachesZero) {
  Fixture fx;
  OptState init = OptState::from_signal(fx.f, fx.bank.aux);
  const SignalList noise = random_list(fx.scales, 41, 1e-3 * fx.f.norm() / std::sqrt(kN));
  for (int j = 0; j < fx.scales; ++j) init.low[static_cast<std::size_t>(j)] += noise[static_cast<std::size_t>(j)];
  const MinimizeResult r = minimize(init, fx.q, fx.bank.aux, ObjectiveConfig{}, ActiveSet::all(fx.scales),
                                    {.max_iters = 3000, .grad_tol = 1e-12});
  EXPECT_LT(r.lbfgs.value, 1e-12 * fx.q.squared_norm());
  EXPECT_TRUE(is_analytic(r.state.f, 1e-10));
}

TEST(Objective, ClassicalGradientAndTruth) {
  Fixture fx;
  const RealMatrix g = scalogram(fx.f, fx.bank.family).g;
  const ClassicalState truth = ClassicalState::from_signal(fx.f, fx.bank.family);
  EXPECT_LT(classical_objective_and_gradient(truth, g, fx.bank.family, 1.0).value, 1e-20 * g.squaredNorm());

  ClassicalState x{random_list(fx.scales, 51, 0.2), oracle::random_analytic(kN, 52)};
  ClassicalState d{random_list(fx.scales, 53), oracle::random_complex(kN, 54)};
  const ClassicalValue v = classical_objective_and_gradient(x, g, fx.bank.family, 0.5);
  const double fd = central([&](double t) {
    ClassicalState y = x;
    for (std::size_t i = 0; i < y.h.size(); ++i) y.h[i] += t * d.h[i];
    y.f += t * d.f;
    return classical_objective_and_gradient(y, g, fx.bank.family, 0.5).value;
  });
  const double analytic = pairing(v.gradient.h, d.h) + v.gradient.f.dot(d.f).real();
  EXPECT_NEAR(analytic, fd, 1e-6 * std::abs(fd) + 1e-8);
}

namespace {

struct CauchyFixture {
  WaveletFamily fam = build_family(MotherWavelet::cauchy(16.0, 1.0), 128, 2.0, 3, {.k_max = 64});
  AuxiliaryBank aux = cauchy_auxiliary(fam);
  oracle::CVec f = oracle::random_analytic(128, 61);
  QSpectra q = compute_Q_spectra(scalogram(f, fam).g, fam, aux);
  double a_p1 = cauchy_factor(fam, aux);
};

}  // namespace

TEST(Objective, CauchyFactorAndExpansion) {
  CauchyFixture cx;
  EXPECT_NEAR(cx.a_p1, std::pow(2.0, 16.0), 1e-9);
  const OptState truth = OptState::from_signal(cx.f, cx.aux);
  CauchyVars vars{truth.low, truth.high[0]};
  const OptState full = vars.expand(cx.a_p1);
  for (int j = 0; j <= 3; ++j) {
    EXPECT_LT((full.high[static_cast<std::size_t>(j)] - truth.high[static_cast<std::size_t>(j)]).norm(),
              1e-8 * truth.high[static_cast<std::size_t>(j)].norm());
  }
  // a non-matched radius is rejected
  EXPECT_THROW(cauchy_factor(cx.fam, build_auxiliary(cx.fam, 0.9)), ArgumentError);
}

TEST(Objective, CauchyObjectiveGradientsMatchCentralDifferences) {
  CauchyFixture cx;
  const double scale = 1.0 / std::sqrt(cx.q.squared_norm());
  // variables near the truth, on its scale
  CauchyVars x;
  x.low.resize(4);
  const OptState truth = OptState::from_signal(cx.f, cx.aux);
  for (int j = 0; j <= 3; ++j) {
    x.low[static_cast<std::size_t>(j)] = truth.low[static_cast<std::size_t>(j)] * Complex(1.1, 0.2) +
                                         0.05 * truth.low[static_cast<std::size_t>(j)].norm() / std::sqrt(128.0) *
                                             oracle::random_complex(128, 80 + static_cast<unsigned>(j));
  }
  x.high0 = truth.high[0] * Complex(0.9, -0.1);
  CauchyVars d{{}, oracle::random_complex(128, 90)};
  for (int j = 0; j <= 3; ++j) d.low.push_back(oracle::random_complex(128, 91 + static_cast<unsigned>(j)) * truth.low[static_cast<std::size_t>(j)].norm() / std::sqrt(128.0));
  d.high0 *= truth.high[0].norm() / std::sqrt(128.0);

  const CauchyValue v = cauchy_obj1(x, cx.q, cx.fam, cx.aux);
  const double h = 1e-6;
  auto at = [&](double t) {
    CauchyVars y = x;
    for (std::size_t i = 0; i < y.low.size(); ++i) y.low[i] += t * d.low[i];
    y.high0 += t * d.high0;
    return cauchy_obj1(y, cx.q, cx.fam, cx.aux).value;
  };
  const double fd = central(at, h);
  const double analytic = pairing(v.gradient.low, d.low) + v.gradient.high0.dot(d.high0).real();
  EXPECT_NEAR(analytic * scale, fd * scale, 1e-5 * std::abs(fd * scale) + 1e-9);

  const OptState s = x.expand(cx.a_p1);
  OptState dd{d.low, d.expand(cx.a_p1).high, oracle::random_complex(128, 99)};
  OptState sf = s;
  sf.f = oracle::random_analytic(128, 98);
  const ObjectiveValue v2 = cauchy_obj2(sf, cx.fam, cx.aux);
  const double fd2 = central([&](double t) { return cauchy_obj2(axpy(sf, t, dd), cx.fam, cx.aux).value; }, h);
  const double an2 = pairing(v2.gradient.low, dd.low) + pairing(v2.gradient.high, dd.high) + v2.gradient.f.dot(dd.f).real();
  EXPECT_NEAR(an2, fd2, 1e-5 * std::abs(fd2) + 1e-9);
}

TEST(Objective, CriticalManifoldKeepsProductsAndConstraint) {
  CauchyFixture cx;
  Signal gamma(128);
  for (int i = 0; i < 128; ++i) gamma[i] = std::polar(1.0 + 0.3 * std::sin(0.1 * i), 0.05 * i);
  const OptState c = critical_point(cx.f, gamma, cx.aux);
  // the products L_j conj(H_j) and the coupling H_{j+1} = a^{p1} L_j survive the change
  CauchyVars vars{c.low, c.high[0]};
  EXPECT_LT(cauchy_obj1(vars, cx.q, cx.fam, cx.aux).value, 1e-10 * cx.q.squared_norm());
  const OptState full = vars.expand(cx.a_p1);
  for (int j = 0; j <= 3; ++j) {
    EXPECT_LT((full.high[static_cast<std::size_t>(j)] - c.high[static_cast<std::size_t>(j)]).norm(),
              1e-8 * c.high[static_cast<std::size_t>(j)].norm());
  }
  // but the data terms see it unless gamma is trivial
  EXPECT_GT(cauchy_obj2(c, cx.fam, cx.aux).value, 1e-6);
  const OptState trivial = critical_point(cx.f, Signal::Ones(128), cx.aux);
  double size = 0.0;
  for (const auto& l : trivial.low) size += l.squaredNorm();
  EXPECT_LT(cauchy_obj2(trivial, cx.fam, cx.aux).value, 1e-20 * size);
}
