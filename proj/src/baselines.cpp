#include "scalopr/baselines.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "scalopr/errors.hpp"
#include "scalopr/spectral.hpp"

namespace scalopr {

namespace {

// Projections restricted to scales lo..J.
Signal project_scales(const Signal& f0, const RealMatrix& g, const WaveletFamily& family, int lo,
                      int iters, double eps) {
  const int J = family.J();
  std::vector<Spectrum> filters(family.filters().begin() + lo, family.filters().end());
  Signal f = f0;
  for (int it = 0; it < iters; ++it) {
    const Spectrum f_hat = dft(f);
    SignalList comps;
    for (int j = lo; j <= J; ++j) {
      Signal c = idft(f_hat.cwiseProduct(family[j]));
      const double peak = c.cwiseAbs().maxCoeff();
      for (Eigen::Index i = 0; i < c.size(); ++i) {
        const double mod = std::abs(c[i]);
        c[i] = mod > 1e-14 * peak && mod > 0.0 ? c[i] * (g(j, i) / mod) : Complex(g(j, i));
      }
      comps.push_back(std::move(c));
    }
    f = assemble_signal(comps, filters, eps);
  }
  return f;
}

ReconResult finish(Signal f, const RealMatrix& g, const WaveletFamily& family,
                   std::chrono::steady_clock::time_point t0) {
  ReconResult r;
  r.f_rec = std::move(f);
  r.reconstruction_error = g.norm() > 0.0 ? modulus_error(r.f_rec, g, family) : 0.0;
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

Signal random_analytic(int n, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Spectrum spectrum = Spectrum::Zero(n);
  for (int k = 1; k <= n / 2; ++k) spectrum[k] = Complex(normal(rng), normal(rng));
  Signal f = idft(spectrum);
  return f / f.norm();
}

ReconResult gs_classic(const RealMatrix& g, const WaveletFamily& family, const GsOptions& options,
                       const std::optional<Signal>& init) {
  if (options.iters < 1) throw ArgumentError("gs_classic: iters must be at least 1");
  const auto t0 = std::chrono::steady_clock::now();
  const double eps = options.assemble_eps * filter_energy(family.filters()).maxCoeff();
  Signal f0 = init ? *init : random_analytic(family.N(), options.seed);
  if (f0.size() != family.N()) throw ArgumentError("gs_classic: init length mismatch");
  if (g.isZero(0.0)) return finish(Signal::Zero(family.N()), g, family, t0);
  std::vector<double> errs;
  Signal f = gerchberg_saxton(f0, g, family, options.iters, eps, &errs);
  ReconResult r = finish(std::move(f), g, family, t0);
  for (std::size_t i = 0; i < errs.size(); ++i) r.trace.push_back({"gs", TraceRow{static_cast<int>(i), errs[i], 0.0}});
  return r;
}

int gs_multiscale_budget(const WaveletFamily& family, const GsOptions& options) {
  return options.iters * family.J();
}

ReconResult gs_multiscale(const RealMatrix& g, const WaveletFamily& family, const GsOptions& options) {
  if (options.iters < 1) throw ArgumentError("gs_multiscale: iters must be at least 1");
  const auto t0 = std::chrono::steady_clock::now();
  const int J = family.J();
  const int n = family.N();
  if (g.isZero(0.0)) return finish(Signal::Zero(n), g, family, t0);
  const double peak = filter_energy(family.filters()).maxCoeff();
  const double eps = options.assemble_eps * peak;

  ReconResult r;
  const PairResult init = init_coarsest(g, family);
  if (init.ambiguous) r.flags.push_back("init_ambiguous");
  std::vector<Spectrum> coarse{family[J], family[J - 1]};
  Signal f = assemble_signal({init.coarse, init.fine}, coarse, eps);
  f = project_scales(f, g, family, J - 1, options.iters, eps);
  for (int j = J - 2; j >= 0; --j) {
    // The estimate only knows bins the coarser filters see; the rest stay zero.
    Spectrum f_hat = dft(f);
    std::vector<Spectrum> known(family.filters().begin() + j + 1, family.filters().end());
    const RealVector energy = filter_energy(known);
    for (int k = 0; k < n; ++k) {
      if (energy[k] < options.deconv_eps * peak) f_hat[k] = 0.0;
    }
    f = project_scales(idft(f_hat), g, family, j, options.iters, eps);
  }
  ReconResult out = finish(std::move(f), g, family, t0);
  out.flags = std::move(r.flags);
  return out;
}

}  // namespace scalopr
