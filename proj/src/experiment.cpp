#include "scalopr/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "scalopr/errors.hpp"
#include "scalopr/objective.hpp"
#include "scalopr/signals.hpp"
#include "scalopr/spectral.hpp"

namespace scalopr {

namespace {

// splitmix64 step: decorrelates neighbouring (seed, stream) pairs.
unsigned long long mix(unsigned long long seed, unsigned long long stream) {
  unsigned long long z = seed * 0x9E3779B97F4A7C15ULL + (stream + 1) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

template <typename T>
T get_or(const Json& j, const std::string& key, T fallback, const std::string& what) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(what + ": key '" + key + "' has the wrong type");
  }
}

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(what + ": unknown key '" + key + "'");
  }
}

SignalClass class_from_json(const Json& j) {
  const std::string what = "classes[]";
  check_keys(j, {"kind", "prob", "cutoff", "path", "rows", "offsets"}, what);
  SignalClass c;
  const std::string kind = get_or<std::string>(j, "kind", "gaussian", what);
  if (kind == "gaussian") {
    c.kind = SignalKind::Gaussian;
  } else if (kind == "sparse_sinusoids") {
    c.kind = SignalKind::SparseSinusoids;
    c.prob = get_or(j, "prob", c.prob, what);
    if (!(c.prob >= 0.0 && c.prob < 1.0)) throw ConfigError("classes[]: prob must lie in [0, 1)");
  } else if (kind == "audio_like") {
    c.kind = SignalKind::AudioLike;
    c.cutoff = get_or(j, "cutoff", c.cutoff, what);
    if (c.cutoff < 1) throw ConfigError("classes[]: cutoff must be positive");
  } else if (kind == "image_line" || kind == "wav") {
    c.kind = kind == "wav" ? SignalKind::Wav : SignalKind::ImageLine;
    c.path = get_or<std::string>(j, "path", "", what);
    if (c.path.empty()) throw ConfigError("classes[]: " + kind + " needs a path");
    const std::string key = kind == "wav" ? "offsets" : "rows";
    c.positions = get_or<std::vector<long>>(j, key, {0}, what);
    if (c.positions.empty()) throw ConfigError("classes[]: empty " + key);
    for (long p : c.positions) {
      if (p < 0) throw ConfigError("classes[]: negative " + key);
    }
  } else {
    throw ConfigError("classes[]: unknown kind '" + kind + "'");
  }
  return c;
}

Method method_from_string(const std::string& s) {
  if (s == "multiscale") return Method::Multiscale;
  if (s == "gs_classic") return Method::GsClassic;
  if (s == "gs_multiscale") return Method::GsMultiscale;
  throw ConfigError("methods: unknown method '" + s + "'");
}

Bank bank_for(const ExperimentConfig& cfg, int n) {
  try {
    return make_bank(bank_from_json(cfg.bank, n));
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("bank: ") + e.what());
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::string join(const std::vector<std::string>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

unsigned long long noise_seed(const ExperimentConfig& cfg, int seed, std::size_t noise_index) {
  return mix(cfg.seed_base + static_cast<unsigned long long>(seed), 1000 + noise_index);
}

struct Trial {
  Signal f;
  Signal f_rec;
  TrialRecord record;
};

Trial run_one(const ExperimentConfig& cfg, const Bank& bank, const SignalClass& cls, int n,
              std::size_t noise_index, int seed, Method method) {
  Trial t;
  TrialRecord& r = t.record;
  r.cls = cls.name();
  r.n = n;
  r.noise_target = cfg.noise[noise_index];
  r.seed = seed;
  r.method = to_string(method);
  std::string flag;
  t.f = cls.generate(n, cfg.seed_base + static_cast<unsigned long long>(seed), &flag);
  if (!flag.empty()) r.flags.push_back(flag);
  const WaveletFamily& family = bank.family;
  const RealMatrix g = scalogram(t.f, family).g;
  const NoisyMeasurement m = add_noise(g, r.noise_target, noise_seed(cfg, seed, noise_index));
  r.noise_amount = m.amount;

  ReconResult res;
  switch (method) {
    case Method::Multiscale:
      res = reconstruct(m.h, bank, cfg.recon);
      break;
    case Method::GsClassic: {
      GsOptions o = cfg.gs;
      o.iters = gs_multiscale_budget(family, cfg.gs);
      o.seed = mix(cfg.seed_base + static_cast<unsigned long long>(seed), 7);
      r.iterations = o.iters;
      res = gs_classic(m.h, family, o);
      break;
    }
    case Method::GsMultiscale:
      r.iterations = gs_multiscale_budget(family, cfg.gs);
      res = gs_multiscale(m.h, family, cfg.gs);
      break;
  }
  t.f_rec = res.f_rec;
  r.wall_time_s = res.wall_time_s;
  r.flags.insert(r.flags.end(), res.flags.begin(), res.flags.end());
  if (t.f.norm() == 0.0) {
    r.flags.push_back("zero_signal");
    r.recon_error = r.signal_error = r.lipschitz = 0.0;
    return t;
  }
  const Errors e = metrics(t.f, t.f_rec, family);
  r.recon_error = e.recon;
  r.signal_error = e.signal;
  r.lipschitz = modulus_lipschitz(t.f, family);
  return t;
}

}  // namespace

std::string SignalClass::name() const {
  switch (kind) {
    case SignalKind::Gaussian: return "gaussian";
    case SignalKind::SparseSinusoids: return "sparse_sinusoids";
    case SignalKind::AudioLike: return "audio_like";
    case SignalKind::ImageLine: return "image_line";
    case SignalKind::Wav: return "wav";
  }
  return "unknown";
}

Signal SignalClass::generate(int n, unsigned long long seed, std::string* flag) const {
  bool marker = false;
  Signal f;
  const long pos = positions.empty() ? 0 : positions[seed % positions.size()];
  switch (kind) {
    case SignalKind::Gaussian: f = gen_gaussian_process(n, seed); break;
    case SignalKind::SparseSinusoids: f = gen_sparse_sinusoids(n, prob, seed, &marker); break;
    case SignalKind::AudioLike: f = gen_audio_like(n, seed, cutoff); break;
    case SignalKind::ImageLine: f = ingest_image_line(path, static_cast<int>(pos), n, &marker); break;
    case SignalKind::Wav: f = ingest_wav(path, pos, n, &marker); break;
  }
  if (marker && flag) *flag = kind == SignalKind::SparseSinusoids ? "redrawn" : "degenerate";
  return f;
}

std::string to_string(Method m) {
  switch (m) {
    case Method::Multiscale: return "multiscale";
    case Method::GsClassic: return "gs_classic";
    case Method::GsMultiscale: return "gs_multiscale";
  }
  return "unknown";
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  const std::string what = "experiment";
  check_keys(j, {"kind", "N", "noise", "seeds", "seed_base", "classes", "methods", "bank", "recon", "gs",
                 "phase_map", "local_minima"},
             what);
  ExperimentConfig c;
  c.kind = get_or<std::string>(j, "kind", c.kind, what);
  if (c.kind != "sweep" && c.kind != "stability" && c.kind != "local_minima") {
    throw ConfigError("experiment: unknown kind '" + c.kind + "'");
  }
  if (j.contains("N")) {
    c.sizes = j.at("N").is_array() ? get_or<std::vector<int>>(j, "N", {}, what)
                                   : std::vector<int>{get_or<int>(j, "N", 256, what)};
  }
  if (c.sizes.empty()) throw ConfigError("experiment: N is empty");
  for (int n : c.sizes) {
    if (n < 8) throw ConfigError("experiment: N must be at least 8");
  }
  if (j.contains("noise")) {
    c.noise = j.at("noise").is_array() ? get_or<std::vector<double>>(j, "noise", {}, what)
                                       : std::vector<double>{get_or<double>(j, "noise", 0.0, what)};
  }
  if (c.noise.empty()) throw ConfigError("experiment: noise is empty");
  for (double x : c.noise) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("experiment: noise levels must be nonnegative");
  }
  c.seeds = get_or(j, "seeds", c.seeds, what);
  if (c.seeds < 1) throw ConfigError("experiment: seeds must be at least 1");
  c.seed_base = get_or(j, "seed_base", c.seed_base, what);
  if (j.contains("classes")) {
    if (!j.at("classes").is_array() || j.at("classes").empty()) throw ConfigError("experiment: classes must be a nonempty array");
    c.classes.clear();
    for (const auto& cj : j.at("classes")) c.classes.push_back(class_from_json(cj));
  }
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : get_or<std::vector<std::string>>(j, "methods", {}, what)) c.methods.push_back(method_from_string(m));
    if (c.methods.empty()) throw ConfigError("experiment: methods is empty");
  }
  if (j.contains("bank")) {
    c.bank = j.at("bank");
    for (int n : c.sizes) bank_from_json(c.bank, n);  // validate now, not mid-run
  }
  if (j.contains("recon")) c.recon = recon_config_from_json(j.at("recon"));
  if (j.contains("gs")) {
    const Json& g = j.at("gs");
    check_keys(g, {"iters", "deconv_eps", "assemble_eps"}, "gs");
    c.gs.iters = get_or(g, "iters", c.gs.iters, "gs");
    c.gs.deconv_eps = get_or(g, "deconv_eps", c.gs.deconv_eps, "gs");
    c.gs.assemble_eps = get_or(g, "assemble_eps", c.gs.assemble_eps, "gs");
    if (c.gs.iters < 1 || !(c.gs.deconv_eps > 0.0) || !(c.gs.assemble_eps > 0.0)) {
      throw ConfigError("gs: iters must be positive and eps values positive");
    }
  }
  if (j.contains("phase_map")) {
    const Json& p = j.at("phase_map");
    check_keys(p, {"class", "N", "noise", "seed"}, "phase_map");
    PhaseMapRequest r;
    r.cls = get_or<std::size_t>(p, "class", 0, "phase_map");
    r.n = get_or<int>(p, "N", c.sizes.front(), "phase_map");
    r.noise = get_or<double>(p, "noise", c.noise.front(), "phase_map");
    r.seed = get_or<int>(p, "seed", 0, "phase_map");
    if (r.cls >= c.classes.size()) throw ConfigError("phase_map: class index out of range");
    if (r.n < 8 || !(r.noise >= 0.0)) throw ConfigError("phase_map: bad N or noise");
    c.phase_map = r;
  }
  if (j.contains("local_minima")) {
    const Json& l = j.at("local_minima");
    check_keys(l, {"trials", "threshold", "minus_log_r", "max_iters"}, "local_minima");
    c.lm_trials = get_or(l, "trials", c.lm_trials, "local_minima");
    c.lm_threshold = get_or(l, "threshold", c.lm_threshold, "local_minima");
    c.lm_minus_log_r = get_or(l, "minus_log_r", c.lm_minus_log_r, "local_minima");
    c.lm_max_iters = get_or(l, "max_iters", c.lm_max_iters, "local_minima");
    if (c.lm_trials < 1 || !(c.lm_threshold > 0.0) || !(c.lm_minus_log_r > 0.0) || c.lm_max_iters < 1) {
      throw ConfigError("local_minima: trials, threshold, minus_log_r and max_iters must be positive");
    }
  }
  return c;
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg) {
  std::vector<TrialRecord> out;
  for (const auto& cls : cfg.classes) {
    for (int n : cfg.sizes) {
      const Bank bank = bank_for(cfg, n);
      for (std::size_t k = 0; k < cfg.noise.size(); ++k) {
        for (int s = 0; s < cfg.seeds; ++s) {
          for (Method m : cfg.methods) out.push_back(run_one(cfg, bank, cls, n, k, s, m).record);
        }
      }
    }
  }
  return out;
}

void write_trials(const std::string& dir, const ExperimentConfig& cfg, const std::vector<TrialRecord>& trials) {
  ensure_dir(dir);
  const std::filesystem::path base(dir);
  {
    std::ofstream out = open_out(base / "trials.csv");
    out << "class,N,noise_target,seed,method,noise_amount,recon_error,signal_error,lipschitz,iterations,flags\n";
    for (const auto& r : trials) {
      out << r.cls << ',' << r.n << ',' << format_double(r.noise_target) << ',' << r.seed << ',' << r.method
          << ',' << format_double(r.noise_amount) << ',' << format_double(r.recon_error) << ','
          << format_double(r.signal_error) << ',' << format_double(r.lipschitz) << ',' << r.iterations << ','
          << join(r.flags, ';') << '\n';
    }
  }
  {
    std::ofstream out = open_out(base / "timing.csv");
    out << "class,N,noise_target,seed,method,wall_time_s\n";
    for (const auto& r : trials) {
      out << r.cls << ',' << r.n << ',' << format_double(r.noise_target) << ',' << r.seed << ',' << r.method
          << ',' << format_double(r.wall_time_s) << '\n';
    }
  }
  // Cells keyed in first-appearance order so the JSON is stable.
  std::vector<std::string> order;
  std::map<std::string, std::vector<const TrialRecord*>> cells;
  for (const auto& r : trials) {
    std::ostringstream key;
    key << r.cls << '|' << r.n << '|' << format_double(r.noise_target) << '|' << r.method;
    if (!cells.count(key.str())) order.push_back(key.str());
    cells[key.str()].push_back(&r);
  }
  Json summary = Json::array();
  for (const auto& key : order) {
    const auto& rs = cells[key];
    std::vector<double> rec, sig;
    for (const auto* r : rs) {
      rec.push_back(r->recon_error);
      sig.push_back(r->signal_error);
    }
    summary.push_back({{"class", rs.front()->cls},
                       {"N", rs.front()->n},
                       {"noise", rs.front()->noise_target},
                       {"method", rs.front()->method},
                       {"trials", rs.size()},
                       {"median_recon_error", median(rec)},
                       {"mean_recon_error", mean(rec)},
                       {"max_recon_error", *std::max_element(rec.begin(), rec.end())},
                       {"median_signal_error", median(sig)},
                       {"mean_signal_error", mean(sig)}});
  }
  Json doc{{"kind", cfg.kind}, {"cells", summary}, {"recon", recon_config_to_json(cfg.recon)}};
  write_json_file((base / "summary.json").string(), doc);
}

void write_stability(const std::string& dir, const std::vector<TrialRecord>& trials) {
  ensure_dir(dir);
  std::ofstream out = open_out(std::filesystem::path(dir) / "stability.csv");
  out << "class,N,noise_target,seed,method,recon_error,signal_error,ratio,lipschitz,bound_ok\n";
  for (const auto& r : trials) {
    const double ratio = r.recon_error > 0.0 ? r.signal_error / r.recon_error : 0.0;
    const bool ok = r.recon_error <= r.lipschitz * r.signal_error * (1.0 + 1e-12) + 1e-15;
    out << r.cls << ',' << r.n << ',' << format_double(r.noise_target) << ',' << r.seed << ',' << r.method << ','
        << format_double(r.recon_error) << ',' << format_double(r.signal_error) << ',' << format_double(ratio)
        << ',' << format_double(r.lipschitz) << ',' << (ok ? 1 : 0) << '\n';
  }
}

RealMatrix phase_difference_map(const Signal& f, const Signal& f_rec, const WaveletFamily& family) {
  if (f.size() != f_rec.size()) throw ArgumentError("phase_difference_map: length mismatch");
  const Complex inner = f.dot(f_rec);  // sum conj(f) f_rec
  const Complex align = std::abs(inner) > 0.0 ? std::conj(inner) / std::abs(inner) : Complex(1.0);
  const SignalList w = wavelet_transform(f, family);
  const SignalList w_rec = wavelet_transform(Signal(f_rec * align), family);
  double peak = 0.0;
  for (const auto& c : w) peak = std::max(peak, c.cwiseAbs().maxCoeff());
  RealMatrix map(family.scales(), family.N());
  for (int j = 0; j < family.scales(); ++j) {
    for (Eigen::Index n = 0; n < family.N(); ++n) {
      const Complex a = w[static_cast<std::size_t>(j)][n];
      map(j, n) = std::abs(a) < 1e-3 * peak ? std::numeric_limits<double>::quiet_NaN()
                                            : std::arg(w_rec[static_cast<std::size_t>(j)][n] * std::conj(a));
    }
  }
  return map;
}

void write_phase_map(const std::string& dir, const ExperimentConfig& cfg) {
  if (!cfg.phase_map) return;
  const PhaseMapRequest& p = *cfg.phase_map;
  ExperimentConfig one = cfg;
  one.noise = {p.noise};
  const Bank bank = bank_for(cfg, p.n);
  const Trial t = run_one(one, bank, cfg.classes[p.cls], p.n, 0, p.seed, Method::Multiscale);
  const RealMatrix map = phase_difference_map(t.f, t.f_rec, bank.family);
  ensure_dir(dir);
  std::ofstream out = open_out(std::filesystem::path(dir) / "phase_map.dat");
  out << "# j n phase_difference (nan: modulus below 1e-3 of the max)\n";
  for (Eigen::Index j = 0; j < map.rows(); ++j) {
    for (Eigen::Index n = 0; n < map.cols(); ++n) out << j << ' ' << n << ' ' << format_double(map(j, n)) << '\n';
    out << '\n';
  }
}

LocalMinimaSummary local_minima_study(const ExperimentConfig& cfg) {
  const int n = cfg.sizes.front();
  Json bj = cfg.bank;
  bj.erase("r");
  bj["minus_log_r"] = cfg.lm_minus_log_r;
  const Bank bank = [&] {
    try {
      return make_bank(bank_from_json(bj, n));
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string("bank: ") + e.what());
    }
  }();
  const WaveletFamily& family = bank.family;
  LbfgsOptions opts;
  opts.max_iters = cfg.lm_max_iters;
  opts.grad_tol = cfg.recon.objective.grad_tol;
  opts.stall_tol = cfg.recon.stall_tol;

  LocalMinimaSummary s;
  int fail_aux = 0, fail_classical = 0, global_aux = 0, global_classical = 0;
  for (int t = 0; t < cfg.lm_trials; ++t) {
    const unsigned long long seed = cfg.seed_base + static_cast<unsigned long long>(t);
    Signal f = gen_gaussian_process(n, seed);
    RealMatrix g = scalogram(f, family).g;
    const double scale = std::sqrt(g.squaredNorm() / static_cast<double>(g.size()));
    f /= scale;
    g /= scale;
    const QSpectra q = compute_Q_spectra(g, family, bank.aux);
    const Signal f0 = random_analytic(n, mix(seed, 99)) * f.norm();

    LbfgsOptions o = opts;
    o.value_floor = 1e-24 * q.squared_norm();
    const MinimizeResult aux = minimize(OptState::from_signal(f0, bank.aux), q, bank.aux, cfg.recon.objective,
                                        ActiveSet::all(family.scales()), o);
    double g4 = 0.0;
    for (Eigen::Index j = 0; j < g.rows(); ++j) g4 += g.row(j).array().square().matrix().squaredNorm();
    o.value_floor = 1e-24 * g4;
    const ClassicalMinimizeResult cl =
        minimize_classical(ClassicalState::from_signal(f0, family), g, family, cfg.recon.objective.lambda, o);

    LocalMinimaRecord r;
    r.trial = t;
    r.value_aux = aux.lbfgs.value / q.squared_norm();
    r.value_classical = cl.lbfgs.value / g4;
    r.iters_aux = aux.lbfgs.iterations;
    r.iters_classical = cl.lbfgs.iterations;
    r.error_aux = modulus_error(aux.state.f, g, family);
    r.error_classical = modulus_error(cl.state.f, g, family);
    global_aux += r.error_aux < kGlobalHitTol;
    global_classical += r.error_classical < kGlobalHitTol;
    fail_aux += r.value_aux > cfg.lm_threshold;
    fail_classical += r.value_classical > cfg.lm_threshold;
    s.records.push_back(r);
  }
  s.fail_aux = static_cast<double>(fail_aux) / cfg.lm_trials;
  s.fail_classical = static_cast<double>(fail_classical) / cfg.lm_trials;
  s.global_aux = static_cast<double>(global_aux) / cfg.lm_trials;
  s.global_classical = static_cast<double>(global_classical) / cfg.lm_trials;
  return s;
}

void write_local_minima(const std::string& dir, const ExperimentConfig& cfg, const LocalMinimaSummary& s) {
  ensure_dir(dir);
  const std::filesystem::path base(dir);
  {
    std::ofstream out = open_out(base / "local_minima.csv");
    out << "trial,value_aux,value_classical,iters_aux,iters_classical,error_aux,error_classical\n";
    for (const auto& r : s.records) {
      out << r.trial << ',' << format_double(r.value_aux) << ',' << format_double(r.value_classical) << ','
          << r.iters_aux << ',' << r.iters_classical << ',' << format_double(r.error_aux) << ','
          << format_double(r.error_classical) << '\n';
    }
  }
  write_json_file((base / "summary.json").string(),
                  Json{{"kind", cfg.kind},
                       {"N", cfg.sizes.front()},
                       {"trials", cfg.lm_trials},
                       {"threshold", cfg.lm_threshold},
                       {"minus_log_r", cfg.lm_minus_log_r},
                       {"failure_proportion_aux", s.fail_aux},
                       {"failure_proportion_classical", s.fail_classical},
                       {"global_proportion_aux", s.global_aux},
                       {"global_proportion_classical", s.global_classical}});
}

std::string run_experiment(const ExperimentConfig& cfg, const std::string& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream msg;
  if (cfg.kind == "local_minima") {
    const LocalMinimaSummary s = local_minima_study(cfg);
    write_local_minima(dir, cfg, s);
    msg << "local minima: failure proportion " << s.fail_aux << " (auxiliary) vs " << s.fail_classical
        << " (classical) over " << cfg.lm_trials << " trials, global minimum reached " << s.global_aux << " vs "
        << s.global_classical;
  } else {
    const std::vector<TrialRecord> trials = run_trials(cfg);
    write_trials(dir, cfg, trials);
    if (cfg.kind == "stability") {
      write_stability(dir, trials);
      write_phase_map(dir, cfg);
    }
    std::vector<double> rec;
    for (const auto& r : trials) rec.push_back(r.recon_error);
    msg << trials.size() << " trials, median reconstruction error " << median(rec);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_json_file((std::filesystem::path(dir) / "timing.json").string(), Json{{"wall_time_s", secs}});
  msg << ", " << secs << " s";
  return msg.str();
}

}  // namespace scalopr
