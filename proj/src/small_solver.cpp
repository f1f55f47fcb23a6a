#include "scalopr/small_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "scalopr/errors.hpp"
#include "scalopr/spectral.hpp"

namespace scalopr {

namespace {

Complex horner(const std::vector<Complex>& c, Complex x) {
  Complex acc(0.0);
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Complex horner_derivative(const std::vector<Complex>& c, Complex x) {
  Complex acc(0.0);
  for (std::size_t i = c.size() - 1; i >= 1; --i) acc = acc * x + static_cast<double>(i) * c[i];
  return acc;
}

// |p(x)| relative to the size of its terms, so that huge and tiny roots compare fairly.
double relative_value(const std::vector<Complex>& c, Complex x) {
  double scale = 0.0, power = 1.0;
  for (const auto& ci : c) {
    scale += std::abs(ci) * power;
    power *= std::abs(x);
  }
  return scale > 0.0 ? std::abs(horner(c, x)) / scale : 0.0;
}

// Monic polynomial with the given roots, coefficients low to high.
std::vector<Complex> from_roots(const std::vector<Complex>& roots) {
  std::vector<Complex> q{Complex(1.0)};
  for (const auto& s : roots) {
    std::vector<Complex> next(q.size() + 1, Complex(0.0));
    for (std::size_t i = 0; i < q.size(); ++i) {
      next[i + 1] += q[i];
      next[i] -= s * q[i];
    }
    q = std::move(next);
  }
  return q;
}

double pair_cost(Complex s, Complex t) {
  return std::abs(s * std::conj(t) - 1.0) / (1.0 + std::abs(s) * std::abs(t));
}

struct RootPair {
  Complex inner;  // |inner| <= 1
  Complex outer;
  bool unit = false;
};

std::vector<RootPair> pair_roots(const std::vector<Complex>& roots, const CandidateOptions& opt) {
  const std::size_t n = roots.size();
  struct Edge {
    double cost;
    std::size_t i, j;
  };
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({pair_cost(roots[i], roots[j]), i, j});
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.cost < b.cost; });

  std::vector<bool> used(n, false);
  std::vector<RootPair> pairs;
  for (const auto& e : edges) {
    if (used[e.i] || used[e.j]) continue;
    if (opt.strict && e.cost > opt.pair_tol) {
      throw DegenerateRootsError("candidate_signals: root without (s, 1/conj(s)) partner", roots[e.i]);
    }
    used[e.i] = used[e.j] = true;
    Complex s = roots[e.i], t = roots[e.j];
    if (std::abs(s) > std::abs(t)) std::swap(s, t);
    RootPair p{s, t, false};
    if (std::abs(std::abs(s) - 1.0) < opt.unit_tol && std::abs(std::abs(t) - 1.0) < opt.unit_tol) {
      const Complex mid = 0.5 * (s + t);
      p.inner = p.outer = std::abs(mid) > 0.0 ? mid / std::abs(mid) : Complex(1.0);
      p.unit = true;
    }
    pairs.push_back(p);
  }
  return pairs;
}

}  // namespace

std::vector<Complex> autocorrelation_coefficients(const RealVector& m, int K) {
  const Eigen::Index n = m.size();
  if (K < 1 || 2 * K - 1 > n) throw ArgumentError("autocorrelation_coefficients: bad support size");
  const Spectrum spectrum = dft(m.cwiseAbs2());
  std::vector<Complex> a(static_cast<std::size_t>(2 * K - 1));
  for (int l = -(K - 1); l <= K - 1; ++l) {
    // m^2 is real, so the spectrum is Hermitian; average out roundoff.
    const Complex plus = spectrum[bin_of(l, n)];
    const Complex minus = spectrum[bin_of(-l, n)];
    a[static_cast<std::size_t>(l + K - 1)] = 0.5 * static_cast<double>(n) * (plus + std::conj(minus));
  }
  return a;
}

std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeffs) {
  std::vector<Complex> c = coeffs;
  while (!c.empty() && c.back() == Complex(0.0)) c.pop_back();
  if (c.size() <= 1) return {};
  std::vector<Complex> roots;
  std::size_t low = 0;
  while (c[low] == Complex(0.0)) {
    roots.emplace_back(0.0);
    ++low;
  }
  std::vector<Complex> reduced(c.begin() + static_cast<std::ptrdiff_t>(low), c.end());
  const auto degree = static_cast<Eigen::Index>(reduced.size() - 1);
  if (degree == 0) return roots;

  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(degree, degree);
  const Complex lead = reduced.back();
  for (Eigen::Index i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < degree; ++i) {
    companion(i, degree - 1) = -reduced[static_cast<std::size_t>(i)] / lead;
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  if (solver.info() != Eigen::Success) throw NumericalError("polynomial_roots: eigenvalue solver failed");

  for (Eigen::Index i = 0; i < degree; ++i) {
    Complex x = solver.eigenvalues()[i];
    double best = relative_value(reduced, x);
    for (int it = 0; it < 8 && best > 0.0; ++it) {
      const Complex d = horner_derivative(reduced, x);
      if (d == Complex(0.0)) break;
      const Complex next = x - horner(reduced, x) / d;
      const double value = relative_value(reduced, next);
      if (!(value < best)) break;
      x = next;
      best = value;
    }
    roots.push_back(x);
  }
  return roots;
}

SignalList candidate_signals(const RealVector& m, BinRange support, const CandidateOptions& options) {
  const Eigen::Index n = m.size();
  const int K = support.size();
  if (K < 1) throw ArgumentError("candidate_signals: empty support");
  if (support.first < 0 || support.last >= n) throw ArgumentError("candidate_signals: support outside grid");
  if (m.minCoeff() < 0.0 && options.strict) throw ArgumentError("candidate_signals: negative modulus");
  if (m.cwiseAbs().maxCoeff() == 0.0) return {Signal::Zero(n)};

  const std::vector<Complex> a = autocorrelation_coefficients(m, K);
  const double a0 = std::abs(a[static_cast<std::size_t>(K - 1)]);
  if (K > 1 && std::abs(a.back()) <= 1e-14 * a0) {
    // One end bin of the support carries no energy; we cannot tell which, so try both.
    SignalList out = candidate_signals(m, BinRange{support.first, support.last - 1}, options);
    SignalList more = candidate_signals(m, BinRange{support.first + 1, support.last}, options);
    out.insert(out.end(), more.begin(), more.end());
    return out;
  }

  const std::vector<RootPair> pairs = pair_roots(polynomial_roots(a), options);
  std::vector<std::size_t> free_pairs;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!pairs[i].unit) free_pairs.push_back(i);
  }

  const double norm_m = m.norm();
  SignalList out;
  const std::size_t choices = std::size_t{1} << free_pairs.size();
  for (std::size_t mask = 0; mask < choices; ++mask) {
    std::vector<Complex> roots;
    roots.reserve(pairs.size());
    std::size_t bit = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (pairs[i].unit) {
        roots.push_back(pairs[i].inner);
      } else {
        roots.push_back((mask >> bit) & 1U ? pairs[i].outer : pairs[i].inner);
        ++bit;
      }
    }
    const std::vector<Complex> q = from_roots(roots);
    // |g^[last]|^2 by least squares: a ~ c^2 conv(q, reverse(conj(q))).
    Complex dot(0.0);
    double vv = 0.0;
    for (std::size_t l = 0; l < a.size(); ++l) {
      Complex v(0.0);
      for (std::size_t i = 0; i < q.size(); ++i) {
        const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(l) - static_cast<std::ptrdiff_t>(q.size() - 1 - i);
        if (k >= 0 && k < static_cast<std::ptrdiff_t>(q.size())) v += q[static_cast<std::size_t>(k)] * std::conj(q[i]);
      }
      dot += std::conj(v) * a[l];
      vv += std::norm(v);
    }
    const double c2 = dot.real() / vv;
    if (!(c2 > 0.0) || !std::isfinite(c2)) continue;
    const double c = std::sqrt(c2);
    Spectrum spectrum = Spectrum::Zero(n);
    for (int i = 0; i < K; ++i) spectrum[support.first + i] = c * q[static_cast<std::size_t>(i)];
    Signal g = idft(spectrum);
    if (options.modulus_tol > 0.0 && (g.cwiseAbs() - m).norm() > options.modulus_tol * norm_m) continue;
    out.push_back(std::move(g));
  }
  return out;
}

SignalList candidate_signals(const RealVector& m, int K, const CandidateOptions& options) {
  return candidate_signals(m, BinRange{1, K}, options);
}

std::vector<PairResult> ranked_pairs(const RealVector& m_coarse, const RealVector& m_fine,
                                     const Spectrum& psi_coarse, const Spectrum& psi_fine,
                                     BinRange support_coarse, BinRange support_fine,
                                     std::size_t count, const CandidateOptions& options) {
  const Eigen::Index n = m_coarse.size();
  if (m_fine.size() != n || psi_coarse.size() != n || psi_fine.size() != n) {
    throw ArgumentError("resolve_pair: length mismatch");
  }
  const SignalList coarse = candidate_signals(m_coarse, support_coarse, options);
  const SignalList fine = candidate_signals(m_fine, support_fine, options);
  if (coarse.empty() || fine.empty()) throw NumericalError("resolve_pair: no admissible candidate");

  std::vector<Spectrum> u, v;
  for (const auto& c : coarse) u.push_back(dft(c).cwiseProduct(psi_fine));
  for (const auto& c : fine) v.push_back(dft(c).cwiseProduct(psi_coarse));

  struct Score {
    double sin2;
    std::size_t i, k;
    Complex inner;
  };
  std::vector<Score> scores;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double uu = u[i].squaredNorm();
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double vv = v[k].squaredNorm();
      const Complex inner = v[k].dot(u[i]);  // sum conj(v) u
      double sin2 = 1.0;
      if (uu > 0.0 && vv > 0.0) sin2 = std::max(0.0, 1.0 - std::norm(inner) / (uu * vv));
      else if (uu == 0.0 && vv == 0.0) sin2 = 0.0;
      scores.push_back({sin2, i, k, inner});
    }
  }
  std::stable_sort(scores.begin(), scores.end(), [](const Score& a, const Score& b) { return a.sin2 < b.sin2; });

  auto aligned = [&](const Score& s) {
    const Complex phase = std::abs(s.inner) > 0.0 ? s.inner / std::abs(s.inner) : Complex(1.0);
    return std::make_pair(coarse[s.i], Signal(fine[s.k] * phase));
  };

  std::vector<PairResult> out;
  for (std::size_t r = 0; r < std::min(count, scores.size()); ++r) {
    const Score& s = scores[r];
    PairResult p;
    std::tie(p.coarse, p.fine) = aligned(s);
    p.coarse_index = s.i;
    p.fine_index = s.k;
    p.sin2 = s.sin2;
    const double r2 = u[s.i].squaredNorm() + v[s.k].squaredNorm() - 2.0 * std::abs(s.inner);
    p.residual = std::sqrt(std::max(0.0, r2) / static_cast<double>(n));
    if (r + 1 < scores.size()) {
      const Score& next = scores[r + 1];
      p.runner_up = aligned(next);
      p.ambiguous = next.sin2 <= 2.0 * std::max(s.sin2, 1e-12);
    }
    out.push_back(std::move(p));
  }
  return out;
}

PairResult resolve_pair(const RealVector& m_coarse, const RealVector& m_fine,
                        const Spectrum& psi_coarse, const Spectrum& psi_fine,
                        BinRange support_coarse, BinRange support_fine,
                        const CandidateOptions& options) {
  return ranked_pairs(m_coarse, m_fine, psi_coarse, psi_fine, support_coarse, support_fine, 1, options).front();
}

PairResult resolve_pair(const RealVector& m_coarse, const RealVector& m_fine,
                        const Spectrum& psi_coarse, const Spectrum& psi_fine, double support_tol,
                        const CandidateOptions& options) {
  return resolve_pair(m_coarse, m_fine, psi_coarse, psi_fine,
                      essential_support(psi_coarse, support_tol),
                      essential_support(psi_fine, support_tol), options);
}

Spectrum truncate_filter(const Spectrum& psi, int k_max) {
  const Eigen::Index n = psi.size();
  const Eigen::Index top = n / 2;
  if (k_max < 1) throw ArgumentError("truncate_filter: k_max must be positive");
  const Eigen::Index width = std::min<Eigen::Index>(k_max, top);
  Eigen::Index best_start = 1;
  double best = -1.0;
  for (Eigen::Index s = 1; s + width - 1 <= top; ++s) {
    const double e = psi.segment(s, width).squaredNorm();
    if (e > best) {
      best = e;
      best_start = s;
    }
  }
  Spectrum out = Spectrum::Zero(n);
  out.segment(best_start, width) = psi.segment(best_start, width);
  return out;
}

PairResult windowed_exhaustive(const RealVector& g_coarse, const RealVector& g_fine,
                               const RealVector& window, const Spectrum& psi_coarse,
                               const Spectrum& psi_fine, int k_max, double support_tol,
                               const CandidateOptions& options) {
  const Eigen::Index n = window.size();
  if (g_coarse.size() != n || g_fine.size() != n) throw ArgumentError("windowed_exhaustive: length mismatch");
  const Spectrum tc = truncate_filter(psi_coarse, k_max);
  const Spectrum tf = truncate_filter(psi_fine, k_max);
  return resolve_pair(window.cwiseProduct(g_coarse), window.cwiseProduct(g_fine), tc, tf,
                      essential_support(tc, support_tol), essential_support(tf, support_tol), options);
}

}  // namespace scalopr
