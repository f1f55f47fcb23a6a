#include "scalopr/objective.hpp"

#include <cmath>

#include "scalopr/errors.hpp"
#include "scalopr/spectral.hpp"

namespace scalopr {

namespace {

std::size_t at(int j) { return static_cast<std::size_t>(j); }

void check_finite(double v, int j, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("objective: non-finite ") + what, j);
}


Eigen::Map<const Eigen::VectorXcd> as_complex(const Eigen::VectorXd& x, Eigen::Index offset, Eigen::Index n) {
  return Eigen::Map<const Eigen::VectorXcd>(reinterpret_cast<const Complex*>(x.data()) + offset, n);
}

Eigen::Map<Eigen::VectorXcd> as_complex(Eigen::VectorXd& x, Eigen::Index offset, Eigen::Index n) {
  return Eigen::Map<Eigen::VectorXcd>(reinterpret_cast<Complex*>(x.data()) + offset, n);
}

struct Evaluation {
  double value = 0.0;
  OptState grad;
};

Evaluation evaluate(const OptState& s, const QSpectra& q, const AuxiliaryBank& aux,
                    const ObjectiveConfig& cfg, const ActiveSet& act, bool want_grad) {
  const int scales = s.scales();
  const Eigen::Index n = s.f.size();
  if (q.scales() != scales || aux.scales() != scales || static_cast<int>(s.high.size()) != scales) {
    throw ArgumentError("objective: scale count mismatch");
  }
  Evaluation e;
  if (want_grad) e.grad = OptState::zeros(scales, n);
  Spectrum grad_f_hat = Spectrum::Zero(n);
  const Spectrum f_hat = dft(s.f);

  for (int j = 0; j < scales; ++j) {
    const auto J = at(j);
    const Signal& L = s.low[J];
    const Signal& H = s.high[J];
    if (act.q[J]) {
      const Signal R = L.cwiseProduct(H.conjugate()) - q.Q[J];
      const double v = R.squaredNorm();
      check_finite(v, j, "reformulation term");
      e.value += v;
      if (want_grad) {
        if (act.low_free[J]) e.grad.low[J] += 2.0 * R.cwiseProduct(H);
        if (act.high_free[J]) e.grad.high[J] += 2.0 * L.cwiseProduct(R.conjugate());
      }
    }
    if (act.low_data[J]) {
      const Signal D = idft(f_hat.cwiseProduct(aux.low[J])) - L;
      const double v = cfg.lambda * D.squaredNorm();
      check_finite(v, j, "data term");
      e.value += v;
      if (want_grad) {
        if (act.low_free[J]) e.grad.low[J] -= 2.0 * cfg.lambda * D;
        if (act.f_free) grad_f_hat += 2.0 * cfg.lambda * dft(D).cwiseProduct(aux.low[J].conjugate());
      }
    }
    if (act.high_data[J]) {
      const Signal D = idft(f_hat.cwiseProduct(aux.high[J])) - H;
      const double v = cfg.lambda * D.squaredNorm();
      check_finite(v, j, "data term");
      e.value += v;
      if (want_grad) {
        if (act.high_free[J]) e.grad.high[J] -= 2.0 * cfg.lambda * D;
        if (act.f_free) grad_f_hat += 2.0 * cfg.lambda * dft(D).cwiseProduct(aux.high[J].conjugate());
      }
    }
    if (j + 1 < scales && act.constraint[J]) {
      const Spectrum& B = aux.high[J + 1];
      const Spectrum& C = aux.low[J];
      const Spectrum E_hat = dft(L).cwiseProduct(B) - dft(s.high[J + 1]).cwiseProduct(C);
      const double v = cfg.mu * E_hat.squaredNorm() / static_cast<double>(n);
      check_finite(v, j, "constraint term");
      e.value += v;
      if (want_grad) {
        if (act.low_free[J]) e.grad.low[J] += 2.0 * cfg.mu * idft(E_hat.cwiseProduct(B.conjugate()));
        if (act.high_free[J + 1]) {
          e.grad.high[J + 1] -= 2.0 * cfg.mu * idft(E_hat.cwiseProduct(C.conjugate()));
        }
      }
    }
  }
  if (want_grad && act.f_free) {
    zero_upper_half(grad_f_hat);
    e.grad.f = idft(grad_f_hat);
  }
  return e;
}

ActiveSet blank(int scales) {
  ActiveSet a;
  const auto n = at(scales);
  a.q.assign(n, 0);
  a.low_data.assign(n, 0);
  a.high_data.assign(n, 0);
  a.constraint.assign(n, 0);
  a.low_free.assign(n, 0);
  a.high_free.assign(n, 0);
  return a;
}

}  // namespace

OptState OptState::from_signal(const Signal& f, const AuxiliaryBank& aux) {
  OptState s;
  const Spectrum f_hat = dft(f);
  for (int j = 0; j < aux.scales(); ++j) {
    s.low.push_back(idft(f_hat.cwiseProduct(aux.low[at(j)])));
    s.high.push_back(idft(f_hat.cwiseProduct(aux.high[at(j)])));
  }
  s.f = f;
  return s;
}

OptState OptState::zeros(int scales, Eigen::Index n) {
  OptState s;
  s.low.assign(at(scales), Signal::Zero(n));
  s.high.assign(at(scales), Signal::Zero(n));
  s.f = Signal::Zero(n);
  return s;
}

ActiveSet ActiveSet::all(int scales) { return from_scale(0, scales); }

ActiveSet ActiveSet::from_scale(int lo, int scales) {
  ActiveSet a = blank(scales);
  for (int j = std::max(lo, 0); j < scales; ++j) {
    const auto J = at(j);
    a.q[J] = a.low_data[J] = a.high_data[J] = a.low_free[J] = a.high_free[J] = 1;
    if (j + 1 < scales) a.constraint[J] = 1;
  }
  a.f_free = true;
  return a;
}

ObjectiveValue objective_and_gradient(const OptState& state, const QSpectra& q,
                                      const AuxiliaryBank& aux, const ObjectiveConfig& cfg,
                                      const ActiveSet& active) {
  Evaluation e = evaluate(state, q, aux, cfg, active, true);
  return ObjectiveValue{e.value, std::move(e.grad)};
}

double objective_value(const OptState& state, const QSpectra& q, const AuxiliaryBank& aux,
                       const ObjectiveConfig& cfg, const ActiveSet& active) {
  return evaluate(state, q, aux, cfg, active, false).value;
}

StateLayout::StateLayout(ActiveSet active, int scales, Eigen::Index n)
    : active_(std::move(active)), scales_(scales), n_(n) {
  Eigen::Index blocks = active_.f_free ? 1 : 0;
  for (int j = 0; j < scales_; ++j) blocks += active_.low_free[at(j)] + active_.high_free[at(j)];
  size_ = 2 * n_ * blocks;
}

Eigen::VectorXd StateLayout::pack(const OptState& state) const {
  Eigen::VectorXd x(size_);
  Eigen::Index off = 0;
  for (int j = 0; j < scales_; ++j) {
    if (active_.low_free[at(j)]) {
      as_complex(x, off, n_) = state.low[at(j)];
      off += n_;
    }
    if (active_.high_free[at(j)]) {
      as_complex(x, off, n_) = state.high[at(j)];
      off += n_;
    }
  }
  if (active_.f_free) as_complex(x, off, n_) = state.f;
  return x;
}

void StateLayout::unpack(const Eigen::VectorXd& x, OptState& state) const {
  Eigen::Index off = 0;
  for (int j = 0; j < scales_; ++j) {
    if (active_.low_free[at(j)]) {
      state.low[at(j)] = as_complex(x, off, n_);
      off += n_;
    }
    if (active_.high_free[at(j)]) {
      state.high[at(j)] = as_complex(x, off, n_);
      off += n_;
    }
  }
  if (active_.f_free) state.f = as_complex(x, off, n_);
}

MinimizeResult minimize(const OptState& init, const QSpectra& q, const AuxiliaryBank& aux,
                        const ObjectiveConfig& cfg, const ActiveSet& active,
                        const LbfgsOptions& options) {
  const Eigen::Index n = init.f.size();
  const StateLayout layout(active, init.scales(), n);
  MinimizeResult out;
  out.state = init;
  if (layout.size() == 0) return out;

  OptState work = init;
  auto fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    layout.unpack(x, work);
    Evaluation e = evaluate(work, q, aux, cfg, active, true);
    grad = layout.pack(e.grad);
    return e.value;
  };
  ProjectionFn project;
  if (active.f_free) {
    const Eigen::Index off = layout.size() / 2 - n;
    project = [off, n](Eigen::VectorXd& x) {
      auto f = as_complex(x, off, n);
      f = analytic_project(Signal(f));
    };
  }
  out.lbfgs = lbfgs_minimize(fn, layout.pack(init), options, project);
  layout.unpack(out.lbfgs.x, out.state);
  out.lbfgs.x.resize(0);
  return out;
}

ClassicalState ClassicalState::from_signal(const Signal& f, const WaveletFamily& family) {
  return ClassicalState{wavelet_transform(f, family), f};
}

ClassicalValue classical_objective_and_gradient(const ClassicalState& state, const RealMatrix& g,
                                                const WaveletFamily& family, double lambda) {
  const int scales = family.scales();
  const Eigen::Index n = family.N();
  if (static_cast<int>(state.h.size()) != scales || g.rows() != scales || g.cols() != n) {
    throw ArgumentError("classical_objective: shape mismatch");
  }
  ClassicalValue out;
  out.gradient.h.assign(at(scales), Signal::Zero(n));
  const Spectrum f_hat = dft(state.f);
  Spectrum grad_f_hat = Spectrum::Zero(n);
  for (int j = 0; j < scales; ++j) {
    const Signal& h = state.h[at(j)];
    const RealVector diff = h.cwiseAbs2() - g.row(j).transpose().cwiseAbs2();
    const Signal D = idft(f_hat.cwiseProduct(family[j])) - h;
    const double v = diff.squaredNorm() + lambda * D.squaredNorm();
    check_finite(v, j, "classical term");
    out.value += v;
    out.gradient.h[at(j)] = 4.0 * diff.cast<Complex>().cwiseProduct(h) - 2.0 * lambda * D;
    grad_f_hat += 2.0 * lambda * dft(D).cwiseProduct(family[j].conjugate());
  }
  zero_upper_half(grad_f_hat);
  out.gradient.f = idft(grad_f_hat);
  return out;
}

ClassicalMinimizeResult minimize_classical(const ClassicalState& init, const RealMatrix& g,
                                           const WaveletFamily& family, double lambda,
                                           const LbfgsOptions& options) {
  const int scales = family.scales();
  const Eigen::Index n = family.N();
  const Eigen::Index size = 2 * n * (scales + 1);
  auto unpack = [&](const Eigen::VectorXd& x, ClassicalState& s) {
    s.h.resize(at(scales));
    for (int j = 0; j < scales; ++j) s.h[at(j)] = as_complex(x, j * n, n);
    s.f = as_complex(x, scales * n, n);
  };
  auto pack = [&](const ClassicalState& s) {
    Eigen::VectorXd x(size);
    for (int j = 0; j < scales; ++j) as_complex(x, j * n, n) = s.h[at(j)];
    as_complex(x, scales * n, n) = s.f;
    return x;
  };
  ClassicalState work = init;
  auto fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    unpack(x, work);
    ClassicalValue v = classical_objective_and_gradient(work, g, family, lambda);
    grad = pack(v.gradient);
    return v.value;
  };
  const Eigen::Index off = scales * n;
  auto project = [off, n](Eigen::VectorXd& x) {
    auto f = as_complex(x, off, n);
    f = analytic_project(Signal(f));
  };
  ClassicalMinimizeResult out;
  out.lbfgs = lbfgs_minimize(fn, pack(init), options, project);
  unpack(out.lbfgs.x, out.state);
  out.lbfgs.x.resize(0);
  return out;
}

OptState CauchyVars::expand(double a_p1) const {
  OptState s;
  s.low = low;
  s.high.resize(low.size());
  s.high[0] = high0;
  for (std::size_t j = 1; j < low.size(); ++j) s.high[j] = a_p1 * low[j - 1];
  s.f = Signal::Zero(high0.size());
  return s;
}

double cauchy_factor(const WaveletFamily& family, const AuxiliaryBank& aux) {
  if (family.mother().kind() != MotherKind::Cauchy) throw ArgumentError("cauchy objective: bank is not Cauchy");
  const double r = cauchy_radius(family.mother().p2(), family.a());
  if (std::abs(std::log(aux.r) - std::log(r)) > 1e-12 * std::abs(std::log(r))) {
    throw ArgumentError("cauchy objective: auxiliary radius is not exp(-p2 (a-1)/(a+1))");
  }
  return std::pow(family.a(), family.mother().p1());
}

CauchyValue cauchy_obj1(const CauchyVars& vars, const QSpectra& q, const WaveletFamily& family,
                        const AuxiliaryBank& aux) {
  const double c = cauchy_factor(family, aux);
  const int scales = family.scales();
  if (static_cast<int>(vars.low.size()) != scales || q.scales() != scales) {
    throw ArgumentError("cauchy_obj1: scale count mismatch");
  }
  const OptState s = vars.expand(c);
  const Eigen::Index n = vars.high0.size();
  CauchyValue out;
  out.gradient.low.assign(at(scales), Signal::Zero(n));
  SignalList grad_high(at(scales), Signal::Zero(n));
  for (int j = 0; j < scales; ++j) {
    const auto J = at(j);
    const Signal R = s.low[J].cwiseProduct(s.high[J].conjugate()) - q.Q[J];
    const double v = R.squaredNorm();
    check_finite(v, j, "obj1 term");
    out.value += v;
    out.gradient.low[J] += 2.0 * R.cwiseProduct(s.high[J]);
    grad_high[J] = 2.0 * s.low[J].cwiseProduct(R.conjugate());
  }
  out.gradient.high0 = grad_high[0];
  for (int j = 0; j + 1 < scales; ++j) out.gradient.low[at(j)] += c * grad_high[at(j + 1)];
  return out;
}

ObjectiveValue cauchy_obj2(const OptState& state, const WaveletFamily& family, const AuxiliaryBank& aux) {
  if (family.mother().kind() != MotherKind::Cauchy) throw ArgumentError("cauchy_obj2: bank is not Cauchy");
  const int scales = family.scales();
  const int J = family.J();
  ActiveSet act = blank(scales);
  for (int j = 0; j < scales; ++j) {
    const auto i = at(j);
    act.low_free[i] = act.high_free[i] = 1;
    if ((J - j) % 2 == 0) act.low_data[i] = 1;
    else act.high_data[i] = 1;
  }
  act.f_free = true;
  ObjectiveConfig unit;
  unit.lambda = 1.0;
  QSpectra none;
  none.Q.assign(at(scales), Signal::Zero(state.f.size()));
  none.log_r = aux.log_r;
  return objective_and_gradient(state, none, aux, unit, act);
}

OptState critical_point(const Signal& f, const Signal& gamma, const AuxiliaryBank& aux) {
  OptState s = OptState::from_signal(f, aux);
  const int J = aux.scales() - 1;
  const Signal inv = gamma.cwiseInverse().conjugate();
  for (int j = 0; j <= J; ++j) {
    const auto i = at(j);
    const bool even = (J - j) % 2 == 0;
    s.low[i] = s.low[i].cwiseProduct(even ? gamma : inv);
    s.high[i] = s.high[i].cwiseProduct(even ? inv : gamma);
  }
  return s;
}

}  // namespace scalopr
