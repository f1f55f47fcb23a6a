#include "scalopr/reconstruct.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "scalopr/errors.hpp"
#include "scalopr/lbfgs.hpp"
#include "scalopr/spectral.hpp"

namespace scalopr {

namespace {

std::size_t at(int j) { return static_cast<std::size_t>(j); }

// Multiplies the spectrum by exp(log_weight * w), w the signed frequency times `step`.
// Roundoff-level bins are dropped first: the weight can reach e^{100} on a full grid.
Signal reweight(const Signal& c, double log_weight, double step = 1.0) {
  Spectrum spectrum = dft(c);
  const Eigen::Index n = spectrum.size();
  const double floor = 1e-13 * spectrum.cwiseAbs().maxCoeff();
  for (Eigen::Index b = 0; b < n; ++b) {
    if (std::abs(spectrum[b]) <= floor) spectrum[b] = 0.0;
    else spectrum[b] *= std::exp(log_weight * step * static_cast<double>(signed_frequency(b, n)));
  }
  return idft(spectrum);
}

double peak_energy(std::span<const Spectrum> filters) { return filter_energy(filters).maxCoeff(); }

// Deconvolution of f from every available (L, H) pair of scales in [lo, hi].
Spectrum deconvolve_pairs(int lo, int hi, const SignalList& low, const SignalList& high,
                          const AuxiliaryBank& aux, double rel_eps) {
  std::vector<Spectrum> meas, filt;
  for (int j = lo; j <= hi; ++j) {
    if (low[at(j)].size() > 0) {
      meas.push_back(dft(low[at(j)]));
      filt.push_back(aux.low[at(j)]);
    }
    if (high[at(j)].size() > 0) {
      meas.push_back(dft(high[at(j)]));
      filt.push_back(aux.high[at(j)]);
    }
  }
  if (meas.empty()) throw ArgumentError("deconvolve_pairs: no component available");
  return regularized_deconvolve(meas, filt, rel_eps * peak_energy(filt));
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

int wrap(long i, long n) {
  const long m = i % n;
  return static_cast<int>(m < 0 ? m + n : m);
}

ActiveSet step_set(int j, int scales, int free_scales) {
  ActiveSet a = ActiveSet::from_scale(j, scales);
  a.q[at(j)] = 0;
  a.high_data[at(j)] = 0;
  a.high_free[at(j)] = 0;
  if (free_scales >= 0) {
    for (int k = j + free_scales + 1; k < scales; ++k) a.low_free[at(k)] = a.high_free[at(k)] = 0;
  }
  return a;
}


struct Polished {
  Signal low, high;
  double value = 0.0;
};

// Local least squares on the masked samples of f * psi_j^low and f * psi_{j+1}^high:
// both moduli against g and the constraint low * psi_{j+1}^high = high * psi_j^low.
Polished local_polish(int j, const Signal& low0, const Signal& high0, const RealMatrix& g,
                      const WaveletFamily& family, const AuxiliaryBank& aux, const std::vector<char>& mask,
                      int iters) {
  const int n = family.N();
  const Spectrum& pj = family[j];
  const Spectrum& pn = family[j + 1];
  const Spectrum& low_f = aux.low[at(j)];
  const Spectrum& high_f = aux.high[at(j + 1)];
  // ratios mapping the auxiliary transforms back to the wavelet transforms
  Spectrum ra = Spectrum::Zero(n), rb = Spectrum::Zero(n);
  const double ma = pj.cwiseAbs().maxCoeff(), mb = pn.cwiseAbs().maxCoeff();
  for (int k = 0; k < n; ++k) {
    if (std::abs(low_f[k]) > 0.0 && std::abs(pj[k]) > 1e-12 * ma) ra[k] = pj[k] / low_f[k];
    if (std::abs(high_f[k]) > 0.0 && std::abs(pn[k]) > 1e-12 * mb) rb[k] = pn[k] / high_f[k];
  }
  double s = std::sqrt((g.row(j).squaredNorm() + g.row(j + 1).squaredNorm()) / (2.0 * n));
  if (s <= 0.0) s = 1.0;
  const RealVector ga2 = (g.row(j).transpose() / s).cwiseAbs2();
  const RealVector gb2 = (g.row(j + 1).transpose() / s).cwiseAbs2();
  std::vector<int> idx;
  for (int i = 0; i < n; ++i) {
    if (mask[at(i)]) idx.push_back(i);
  }
  const long m = static_cast<long>(idx.size());
  const Signal base_low = low0 / s, base_high = high0 / s;
  auto unpack = [&](const Eigen::VectorXd& x, Signal& l, Signal& h) {
    l = base_low;
    h = base_high;
    for (long t = 0; t < m; ++t) {
      l[idx[at(static_cast<int>(t))]] = Complex(x[2 * t], x[2 * t + 1]);
      h[idx[at(static_cast<int>(t))]] = Complex(x[2 * m + 2 * t], x[2 * m + 2 * t + 1]);
    }
  };
  const ObjectiveFn fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    Signal l, h;
    unpack(x, l, h);
    const Spectrum lh = dft(l), hh = dft(h);
    const Signal wa = idft(lh.cwiseProduct(ra)), wb = idft(hh.cwiseProduct(rb));
    const Signal c = idft(lh.cwiseProduct(high_f) - hh.cwiseProduct(low_f));
    const RealVector da = wa.cwiseAbs2() - ga2, db = wb.cwiseAbs2() - gb2;
    const Spectrum ch = dft(c);
    const Signal gl = 4.0 * idft(dft(Signal(da.cast<Complex>().cwiseProduct(wa))).cwiseProduct(ra.conjugate())) +
                      2.0 * idft(ch.cwiseProduct(high_f.conjugate()));
    const Signal gh = 4.0 * idft(dft(Signal(db.cast<Complex>().cwiseProduct(wb))).cwiseProduct(rb.conjugate())) -
                      2.0 * idft(ch.cwiseProduct(low_f.conjugate()));
    for (long t = 0; t < m; ++t) {
      const int i = idx[at(static_cast<int>(t))];
      grad[2 * t] = gl[i].real();
      grad[2 * t + 1] = gl[i].imag();
      grad[2 * m + 2 * t] = gh[i].real();
      grad[2 * m + 2 * t + 1] = gh[i].imag();
    }
    return da.squaredNorm() + db.squaredNorm() + c.squaredNorm();
  };
  Eigen::VectorXd x(4 * m);
  for (long t = 0; t < m; ++t) {
    const int i = idx[at(static_cast<int>(t))];
    x[2 * t] = base_low[i].real();
    x[2 * t + 1] = base_low[i].imag();
    x[2 * m + 2 * t] = base_high[i].real();
    x[2 * m + 2 * t + 1] = base_high[i].imag();
  }
  LbfgsOptions opts;
  opts.max_iters = iters;
  opts.grad_tol = 1e-12;
  opts.record_trace = false;
  const LbfgsResult r = lbfgs_minimize(fn, x, opts);
  Polished out;
  unpack(r.x, out.low, out.high);
  out.low *= s;
  out.high *= s;
  out.value = r.value;
  return out;
}

}  // namespace

double modulus_error(const Signal& f, const RealMatrix& g, const WaveletFamily& family) {
  const double gn = g.norm();
  if (gn == 0.0) throw DomainError("modulus_error: zero reference scalogram");
  return (scalogram(f, family).g - g).norm() / gn;
}

Signal propagate_phase(int j, const SignalList& low, const SignalList& high,
                       const AuxiliaryBank& aux, double eps) {
  const int J = aux.scales() - 1;
  if (j < 0 || j >= J) throw ArgumentError("propagate_phase: scale out of range");
  const Spectrum f_hat = deconvolve_pairs(j + 1, J, low, high, aux, eps);
  return idft(f_hat.cwiseProduct(aux.low[at(j)]));
}

Signal recover_high(const Signal& low, const Signal& Q, double eps, bool* degenerate) {
  if (low.size() != Q.size()) throw ArgumentError("recover_high: length mismatch");
  const double peak = low.cwiseAbs2().maxCoeff();
  if (degenerate) *degenerate = peak == 0.0;
  if (peak == 0.0) return Signal::Zero(low.size());
  const RealVector denom = low.cwiseAbs2().array() + eps * peak;
  return Q.conjugate().cwiseProduct(low).cwiseQuotient(denom.cast<Complex>());
}

Signal constraint_residual(const Signal& low_j, const Signal& high_next, const AuxiliaryBank& aux, int j) {
  return idft(dft(low_j).cwiseProduct(aux.high[at(j + 1)]) - dft(high_next).cwiseProduct(aux.low[at(j)]));
}

std::vector<Interval> detect_errors(const Signal& low_j, const Signal& high_next,
                                    const AuxiliaryBank& aux, int j, double factor,
                                    double floor, int merge_gap) {
  const Signal e = constraint_residual(low_j, high_next, aux, j);
  const long n = static_cast<long>(e.size());
  const RealVector mag = e.cwiseAbs();
  const double scale = std::max(idft(dft(low_j).cwiseProduct(aux.high[at(j + 1)])).cwiseAbs().maxCoeff(),
                                idft(dft(high_next).cwiseProduct(aux.low[at(j)])).cwiseAbs().maxCoeff());
  if (scale == 0.0) return {};
  const double med = median(std::vector<double>(mag.data(), mag.data() + n));
  std::vector<int> flagged;
  for (long i = 0; i < n; ++i) {
    if (mag[i] > factor * med && mag[i] > floor * scale) flagged.push_back(static_cast<int>(i));
  }
  if (flagged.empty()) return {};
  if (static_cast<long>(flagged.size()) == n) return {Interval{0, static_cast<int>(n)}};

  // Start the sweep right after the largest gap so that circular runs stay whole.
  std::size_t start_idx = 0;
  long best_gap = -1;
  for (std::size_t i = 0; i < flagged.size(); ++i) {
    const long next = i + 1 < flagged.size() ? flagged[i + 1] : flagged[0] + n;
    if (next - flagged[i] > best_gap) {
      best_gap = next - flagged[i];
      start_idx = (i + 1) % flagged.size();
    }
  }
  std::vector<Interval> out;
  long first = flagged[start_idx], last = first;
  for (std::size_t k = 1; k < flagged.size(); ++k) {
    long cur = flagged[(start_idx + k) % flagged.size()];
    while (cur < last) cur += n;
    if (cur - last <= merge_gap) {
      last = cur;
    } else {
      out.push_back({wrap(first, n), static_cast<int>(last - first + 1)});
      first = last = cur;
    }
  }
  out.push_back({wrap(first, n), static_cast<int>(std::min(last - first + 1, n))});
  return out;
}

constexpr int kPolishIters = 2000;

int correction_window(const WaveletFamily& family, int j, int k_max) {
  const int b = std::max(1, essential_support(family[j], family.options().support_tol).size());
  const double len = static_cast<double>(k_max) * family.N() / b;
  const int even = 2 * static_cast<int>(std::ceil(len / 2.0));
  return std::min(even, family.N());
}

CorrectionResult error_correct(int j, const Signal& low_j, const Signal& high_next,
                               const RealMatrix& g, const WaveletFamily& family,
                               const AuxiliaryBank& aux, const std::vector<Interval>& intervals) {
  const int n = family.N();
  const int k_max = family.options().k_max;
  const double tol = family.options().support_tol;
  CandidateOptions relaxed;
  relaxed.strict = false;
  relaxed.unit_tol = 1e-4;

  CorrectionResult res;
  res.low = low_j;
  res.high_next = high_next;
  res.residual_before = constraint_residual(low_j, high_next, aux, j).norm();
  res.residual_after = res.residual_before;
  if (intervals.empty()) return res;

  const double lr_j = aux.log_r[at(j)];
  const double lr_next = aux.log_r[at(j + 1)];
  const int lw = correction_window(family, j, k_max);
  Signal new_low, new_high;

  if (lw >= n) {
    const RealVector ones = RealVector::Ones(n);
    PairResult pr;
    try {
      pr = windowed_exhaustive(g.row(j + 1).transpose(), g.row(j).transpose(), ones, family[j + 1],
                               family[j], k_max, tol, relaxed);
    } catch (const NumericalError&) {
      return res;
    }
    res.ambiguous = pr.ambiguous;
    res.windows = 1;
    new_low = reweight(pr.fine, lr_j);
    new_high = reweight(pr.coarse, -lr_next);
    const Complex z = new_low.dot(low_j) + new_high.dot(high_next);
    const Complex phase = std::abs(z) > 0.0 ? z / std::abs(z) : Complex(1.0);
    new_low *= phase;
    new_high *= phase;
  } else {
    std::vector<char> flag(at(n), 0);
    for (const auto& iv : intervals) {
      for (int i = 0; i < iv.length; ++i) flag[at(wrap(iv.start + i, n))] = 1;
    }
    const int hop = lw / 2;
    const double step = static_cast<double>(n) / lw;
    const Spectrum psi_j = resample_filter(family, j, lw);
    const Spectrum psi_next = resample_filter(family, j + 1, lw);
    RealVector hann(lw);
    for (int m = 0; m < lw; ++m) hann[m] = std::pow(std::sin(std::numbers::pi * m / lw), 2);

    Signal acc_low = Signal::Zero(n), acc_high = Signal::Zero(n);
    RealVector weight = RealVector::Zero(n);
    for (const auto& iv : intervals) {
      Signal prev_low, prev_high;
      int prev_start = 0;
      for (long s = static_cast<long>(iv.start) - hop; s < static_cast<long>(iv.start) + iv.length; s += hop) {
        RealVector gl_j(lw), gl_next(lw);
        for (int m = 0; m < lw; ++m) {
          gl_j[m] = g(j, wrap(s + m, n));
          gl_next[m] = g(j + 1, wrap(s + m, n));
        }
        PairResult pr;
        try {
          pr = windowed_exhaustive(gl_next, gl_j, hann, psi_next, psi_j, k_max, tol, relaxed);
        } catch (const NumericalError&) {
          continue;
        }
        res.ambiguous = res.ambiguous || pr.ambiguous;
        ++res.windows;
        Signal a_low = reweight(pr.fine, lr_j, step);
        Signal a_high = reweight(pr.coarse, -lr_next, step);

        // Phase: agree with trusted samples and with the previous window on the overlap.
        Complex z(0.0);
        for (int m = 0; m < lw; ++m) {
          const int idx = wrap(s + m, n);
          if (!flag[at(idx)]) {
            z += std::conj(a_low[m]) * hann[m] * low_j[idx] + std::conj(a_high[m]) * hann[m] * high_next[idx];
          }
        }
        if (prev_low.size() > 0) {
          const int shift = wrap(s - prev_start, n);
          for (int m = 0; m + shift < lw; ++m) {
            const double w_prev = hann[m + shift];
            z += std::conj(a_low[m] * w_prev) * prev_low[m + shift] * hann[m] +
                 std::conj(a_high[m] * w_prev) * prev_high[m + shift] * hann[m];
          }
        }
        const Complex phase = std::abs(z) > 0.0 ? z / std::abs(z) : Complex(1.0);
        a_low *= phase;
        a_high *= phase;
        for (int m = 0; m < lw; ++m) {
          const int idx = wrap(s + m, n);
          acc_low[idx] += a_low[m];
          acc_high[idx] += a_high[m];
          weight[idx] += hann[m];
        }
        prev_low = std::move(a_low);
        prev_high = std::move(a_high);
        prev_start = static_cast<int>(s);
      }
    }
    new_low.resize(n);
    new_high.resize(n);
    for (int i = 0; i < n; ++i) {
      const double w = weight[i];
      const double keep = std::max(0.0, 1.0 - w);
      const double norm = std::max(w, 1.0);
      new_low[i] = keep * low_j[i] + acc_low[i] / norm;
      new_high[i] = keep * high_next[i] + acc_high[i] / norm;
    }
  }

  // The windowed moduli are only approximate, so finish with a local least-squares polish
  // around the flagged samples, from both the windowed estimate and the input.
  std::vector<char> mask(at(n), lw >= n ? 1 : 0);
  if (lw < n) {
    for (const auto& iv : intervals) {
      for (int i = -lw / 2; i < iv.length + lw / 2; ++i) mask[at(wrap(iv.start + i, n))] = 1;
    }
  }
  Polished best = local_polish(j, new_low, new_high, g, family, aux, mask, kPolishIters);
  Polished raw = local_polish(j, low_j, high_next, g, family, aux, mask, kPolishIters);
  if (raw.value < best.value) best = std::move(raw);
  new_low = std::move(best.low);
  new_high = std::move(best.high);

  const double after = constraint_residual(new_low, new_high, aux, j).norm();
  if (after < res.residual_before) {
    res.low = std::move(new_low);
    res.high_next = std::move(new_high);
    res.residual_after = after;
    res.applied = true;
  }
  return res;
}

Signal assemble_signal(const SignalList& h, const std::vector<Spectrum>& filters, double eps) {
  if (h.size() != filters.size() || h.empty()) throw ArgumentError("assemble_signal: need one filter per component");
  const RealVector energy = filter_energy(filters);
  const Eigen::Index n = energy.size();
  Spectrum num = Spectrum::Zero(n);
  for (std::size_t j = 0; j < h.size(); ++j) num += dft(h[j]).cwiseProduct(filters[j].conjugate());
  Spectrum out = Spectrum::Zero(n);
  for (Eigen::Index k = 0; k <= n / 2; ++k) {
    if (energy[k] > eps) out[k] = num[k] / energy[k];
  }
  return idft(out);
}

Signal gerchberg_saxton(const Signal& f0, const RealMatrix& g, const WaveletFamily& family,
                        int iters, double eps, std::vector<double>* error_trace) {
  if (iters < 0) throw ArgumentError("gerchberg_saxton: negative iteration count");
  Signal f = f0;
  const double gn = g.norm();
  for (int it = 0; it < iters; ++it) {
    SignalList comps = wavelet_transform(f, family);
    double err2 = 0.0;
    for (int j = 0; j < family.scales(); ++j) {
      Signal& c = comps[at(j)];
      const double peak = c.cwiseAbs().maxCoeff();
      for (Eigen::Index i = 0; i < c.size(); ++i) {
        const double mod = std::abs(c[i]);
        err2 += std::pow(mod - g(j, i), 2);
        c[i] = mod > 1e-14 * peak && mod > 0.0 ? c[i] * (g(j, i) / mod) : Complex(g(j, i));
      }
    }
    if (error_trace) error_trace->push_back(gn > 0.0 ? std::sqrt(err2) / gn : 0.0);
    f = assemble_signal(comps, family.filters(), eps);
  }
  return f;
}

std::vector<PairResult> init_candidates(const RealMatrix& g, const WaveletFamily& family, std::size_t count) {
  const int J = family.J();
  CandidateOptions relaxed;
  relaxed.strict = false;
  relaxed.unit_tol = 1e-4;
  const double tol = family.options().support_tol;
  return ranked_pairs(g.row(J).transpose(), g.row(J - 1).transpose(), family[J], family[J - 1],
                      essential_support(family[J], tol), essential_support(family[J - 1], tol), count, relaxed);
}

PairResult init_coarsest(const RealMatrix& g, const WaveletFamily& family) {
  return init_candidates(g, family, 1).front();
}

namespace {

struct Attempt {
  Signal f;  // in the units of the normalized scalogram
  double error = 0.0;
  std::vector<ScaleDiagnostics> scales;
  std::vector<std::string> flags;
  std::vector<StageTrace> trace;
};

Attempt run_attempt(const RealMatrix& g, const QSpectra& q, const Bank& bank, const ReconConfig& cfg,
                    const PairResult& init, int max_iters) {
  const WaveletFamily& family = bank.family;
  const AuxiliaryBank& aux = bank.aux;
  const int J = family.J();
  const int scales = family.scales();
  const int n = family.N();
  const double q_norm = q.squared_norm();
  const double assemble_eps = cfg.assemble_eps * peak_energy(family.filters());
  Attempt out;

  LbfgsOptions opts;
  opts.max_iters = std::max(1, max_iters);
  opts.grad_tol = cfg.objective.grad_tol;
  opts.stall_tol = cfg.stall_tol;
  opts.value_floor = 1e-24 * q_norm;
  LbfgsOptions refine_opts = opts;
  refine_opts.max_iters = cfg.refine_iters > 0 ? cfg.refine_iters : std::max(1, opts.max_iters / 4);

  auto run = [&](OptState& st, const ActiveSet& act, const LbfgsOptions& o, const std::string& stage,
                 ScaleDiagnostics* diag) {
    MinimizeResult m = minimize(st, q, aux, cfg.objective, act, o);
    st = std::move(m.state);
    for (const auto& row : m.lbfgs.trace) out.trace.push_back({stage, row});
    if (diag) {
      diag->objective = m.lbfgs.value;
      diag->iterations += m.lbfgs.iterations;
      diag->line_search_failed = diag->line_search_failed || m.lbfgs.line_search_failed;
    }
    if (m.lbfgs.line_search_failed) out.flags.push_back("line_search_failed:" + stage);
  };

  OptState st = OptState::zeros(scales, n);
  for (int j = 0; j < scales; ++j) st.low[at(j)].resize(0), st.high[at(j)].resize(0);
  st.low[at(J)] = reweight(init.coarse, aux.log_r[at(J)]);
  st.high[at(J)] = reweight(init.coarse, -aux.log_r[at(J)]);
  st.low[at(J - 1)] = reweight(init.fine, aux.log_r[at(J - 1)]);
  for (int j = J - 1; j >= 0; --j) {
    ScaleDiagnostics diag;
    diag.scale = j;
    if (j < J - 1) st.low[at(j)] = propagate_phase(j, st.low, st.high, aux, cfg.deconv_eps);
    {
      const Signal target = idft(dft(st.high[at(j + 1)]).cwiseProduct(aux.low[at(j)]));
      const double tn = target.norm();
      diag.init_residual = tn > 0.0 ? constraint_residual(st.low[at(j)], st.high[at(j + 1)], aux, j).norm() / tn : 0.0;
    }
    {
      SignalList lows = st.low, highs = st.high;
      st.f = idft(deconvolve_pairs(j, J, lows, highs, aux, cfg.deconv_eps));
      st.f = analytic_project(st.f);
    }
    // Unknown variables of finer scales stay at zero and out of every term.
    OptState work = st;
    for (int k = 0; k < scales; ++k) {
      if (work.low[at(k)].size() == 0) work.low[at(k)] = Signal::Zero(n);
      if (work.high[at(k)].size() == 0) work.high[at(k)] = Signal::Zero(n);
    }
    const ActiveSet act = step_set(j, scales, cfg.free_scales);
    run(work, act, opts, "scale " + std::to_string(j), &diag);

    if (cfg.error_correction) {
      const int lw = correction_window(family, j, family.options().k_max);
      const auto intervals = detect_errors(work.low[at(j)], work.high[at(j + 1)], aux, j,
                                           cfg.ec_residual_factor, cfg.ec_floor, lw);
      if (!intervals.empty()) {
        CorrectionResult c = error_correct(j, work.low[at(j)], work.high[at(j + 1)], g, family, aux, intervals);
        diag.ec_windows = c.windows;
        diag.ec_applied = c.applied;
        if (c.ambiguous) out.flags.push_back("ec_ambiguous:" + std::to_string(j));
        if (c.applied) {
          work.low[at(j)] = std::move(c.low);
          work.high[at(j + 1)] = std::move(c.high_next);
          run(work, act, refine_opts, "refine " + std::to_string(j), &diag);
        }
      }
    }
    bool degenerate = false;
    work.high[at(j)] = recover_high(work.low[at(j)], q.Q[at(j)], cfg.highdiv_eps, &degenerate);
    if (degenerate) out.flags.push_back("zero_low_component:" + std::to_string(j));
    for (int k = j; k < scales; ++k) {
      st.low[at(k)] = work.low[at(k)];
      st.high[at(k)] = work.high[at(k)];
    }
    st.f = work.f;
    out.scales.push_back(diag);
  }

  if (cfg.final_iters > 0) {
    LbfgsOptions final_opts = opts;
    final_opts.max_iters = cfg.final_iters;
    run(st, ActiveSet::all(scales), final_opts, "final", nullptr);
  }

  // Two ways to read f off the state; keep whichever fits the moduli better.
  Signal f = analytic_project(idft(deconvolve_pairs(0, J, st.low, st.high, aux, cfg.assemble_eps)));
  const Signal f_var = analytic_project(st.f);
  if (modulus_error(f_var, g, family) < modulus_error(f, g, family)) f = f_var;

  if (cfg.gs_polish_iters > 0) {
    const double before = modulus_error(f, g, family);
    std::vector<double> errs;
    Signal polished = gerchberg_saxton(f, g, family, cfg.gs_polish_iters, assemble_eps, &errs);
    for (std::size_t i = 0; i < errs.size(); ++i) {
      out.trace.push_back({"gs", TraceRow{static_cast<int>(i), errs[i], 0.0}});
    }
    if (modulus_error(polished, g, family) <= before) f = std::move(polished);
    else out.flags.push_back("gs_polish_rejected");
  }
  out.error = modulus_error(f, g, family);
  out.f = std::move(f);
  return out;
}

}  // namespace

ReconResult reconstruct(const RealMatrix& g_in, const Bank& bank, const ReconConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const WaveletFamily& family = bank.family;
  const int J = family.J();
  const int n = family.N();
  if (g_in.rows() != family.scales() || g_in.cols() != n) {
    throw ArgumentError("reconstruct: scalogram shape does not match the bank");
  }
  if (!g_in.allFinite()) throw NumericalError("reconstruct: non-finite scalogram entry");

  ReconResult out;
  auto finish = [&](Signal f) {
    out.f_rec = std::move(f);
    out.reconstruction_error = g_in.norm() > 0.0 ? modulus_error(out.f_rec, g_in, family) : 0.0;
    out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  };

  const double scale = std::sqrt(g_in.squaredNorm() / static_cast<double>(g_in.size()));
  if (scale == 0.0) {
    out.flags.push_back("zero_scalogram");
    return finish(Signal::Zero(n));
  }
  const RealMatrix g = g_in / scale;
  out.noise_estimate = estimate_noise_level(g, family);
  out.lag_tol = cfg.q_lag_tol > 0.0 ? cfg.q_lag_tol : adaptive_lag_tol(g, family);
  const QSpectra q = compute_Q_spectra(g, family, bank.aux, out.lag_tol);

  const int attempts = std::max(1, cfg.restarts + 1);
  std::vector<PairResult> inits;
  std::vector<std::string> init_flags;
  try {
    inits = init_candidates(g, family, static_cast<std::size_t>(attempts / 2 + 1));
  } catch (const NumericalError& e) {
    init_flags.push_back(std::string("init_failed: ") + e.what());
    PairResult zero;
    zero.coarse = Signal::Zero(n);
    zero.fine = Signal::Zero(n);
    inits.push_back(zero);
  }
  if (inits.front().ambiguous) init_flags.push_back("init_ambiguous");
  if (g.row(J).isZero(0.0)) init_flags.push_back("zero_coarsest_scale");

  // A result whose moduli miss the data by much more than the noise came out of a
  // wrong basin; retry from the next candidate pair and keep the best fit.
  const double accept = cfg.restart_factor * out.noise_estimate + 1e-8;
  Attempt best;
  int best_index = -1;
  for (int a = 0; a < attempts; ++a) {
    // Odd attempts move to the next pair; even ones go back to the best pair with a
    // longer budget, since a slow descent looks the same as a wrong basin.
    const std::size_t rank = static_cast<std::size_t>((a + 1) / 2) % inits.size();
    const int iters = a % 2 == 0 ? cfg.objective.max_iters * (1 + 2 * a) : cfg.objective.max_iters;
    const PairResult& init = a % 2 == 0 ? inits.front() : inits[rank];
    Attempt att = run_attempt(g, q, bank, cfg, init, iters);
    ++out.attempts;
    if (best_index < 0 || att.error < best.error) {
      best = std::move(att);
      best_index = a;
    }
    if (best.error <= accept) break;
  }
  out.flags = init_flags;
  out.flags.insert(out.flags.end(), best.flags.begin(), best.flags.end());
  if (best_index > 0) out.flags.push_back("restart:" + std::to_string(best_index));
  out.scales = std::move(best.scales);
  out.trace = std::move(best.trace);
  return finish(best.f * scale);
}

}  // namespace scalopr
