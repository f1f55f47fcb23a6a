#include "scalopr/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "scalopr/errors.hpp"

namespace scalopr {

namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(what + ": unknown key '" + key + "'");
  }
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

double positive(double x, const std::string& name) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(name + " must be positive");
  return x;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& text, const std::string& path, int line) {
  std::size_t a = text.find_first_not_of(" \t\r");
  std::size_t b = text.find_last_not_of(" \t\r");
  if (a == std::string::npos) throw IoError(path + ":" + std::to_string(line) + ": empty field");
  const std::string t = text.substr(a, b - a + 1);
  try {
    std::size_t used = 0;
    const double x = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return x;
  } catch (const std::exception&) {
    throw IoError(path + ":" + std::to_string(line) + ": not a number '" + t + "'");
  }
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json read_json_file(const std::string& path) {
  std::ifstream in = open_in(path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed on '" + path + "'");
}

Json bank_to_json(const BankDescription& d) {
  const MotherWavelet& m = d.mother;
  Json mother{{"kind", to_string(m.kind())}};
  switch (m.kind()) {
    case MotherKind::Morlet:
      mother["p"] = m.p();
      mother["omega0"] = m.omega0();
      break;
    case MotherKind::Laplacian:
      mother["omega0"] = m.omega0();
      break;
    case MotherKind::Gammatone:
      mother["order"] = m.order();
      mother["lambda"] = m.lambda();
      mother["omega0"] = m.omega0();
      break;
    case MotherKind::Cauchy:
      mother["p1"] = m.p1();
      mother["p2"] = m.p2();
      break;
  }
  Json j{{"mother", mother}, {"N", d.N}, {"a", d.a}, {"J", d.J},
         {"k_max", d.options.k_max}, {"support_tol", d.options.support_tol}};
  if (d.r > 0.0) j["r"] = d.r;  // exact round trip; minus_log_r is accepted on input
  return j;
}

BankDescription bank_from_json(const Json& j, int default_n) {
  const std::string what = "bank";
  check_keys(j, {"mother", "N", "a", "J", "r", "minus_log_r", "k_max", "support_tol"}, what);
  BankDescription d;
  d.N = get_or<int>(j, "N", default_n, what);
  if (d.N < 8) throw ConfigError("bank: N must be at least 8");
  d.a = get_or<double>(j, "a", 2.0, what);
  if (!(d.a > 1.0)) throw ConfigError("bank: a must exceed 1");
  d.J = get_or<int>(j, "J", default_num_scales(d.N, d.a), what);
  if (d.J < 1) throw ConfigError("bank: J must be at least 1");
  d.options.k_max = get_or<int>(j, "k_max", d.options.k_max, what);
  d.options.support_tol = positive(get_or<double>(j, "support_tol", d.options.support_tol, what), "bank: support_tol");

  const Json m = j.contains("mother") ? j.at("mother") : Json{{"kind", "morlet"}};
  check_keys(m, {"kind", "p", "omega0", "order", "lambda", "p1", "p2"}, "bank.mother");
  const std::string kind = get_or<std::string>(m, "kind", "morlet", "bank.mother");
  const double omega0 = get_or<double>(m, "omega0", std::pow(d.a, d.J), "bank.mother");
  try {
    switch (mother_kind_from_string(kind)) {
      case MotherKind::Morlet:
        d.mother = MotherWavelet::morlet(get_or<double>(m, "p", kDefaultMorletP, "bank.mother"), omega0);
        break;
      case MotherKind::Laplacian:
        d.mother = MotherWavelet::laplacian(omega0);
        break;
      case MotherKind::Gammatone:
        d.mother = MotherWavelet::gammatone(get_or<int>(m, "order", 4, "bank.mother"),
                                            get_or<double>(m, "lambda", 2.0, "bank.mother"), omega0);
        break;
      case MotherKind::Cauchy:
        d.mother = MotherWavelet::cauchy(get_or<double>(m, "p1", 1.0, "bank.mother"),
                                         get_or<double>(m, "p2", 1.0, "bank.mother"));
        break;
    }
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("bank.mother: ") + e.what());
  }

  if (j.contains("r") && j.contains("minus_log_r")) throw ConfigError("bank: give r or minus_log_r, not both");
  if (j.contains("r")) {
    d.r = get_or<double>(j, "r", 0.0, what);
    if (!(d.r > 0.0 && d.r < 1.0)) throw ConfigError("bank: r must lie in (0, 1)");
  } else if (j.contains("minus_log_r")) {
    d.r = std::exp(-positive(get_or<double>(j, "minus_log_r", 0.0, what), "bank: minus_log_r"));
  } else {
    d.r = 0.0;  // resolved by make_bank
  }
  return d;
}

Json recon_config_to_json(const ReconConfig& c) {
  return Json{{"lambda", c.objective.lambda},
              {"mu", c.objective.mu},
              {"max_iters", c.objective.max_iters},
              {"grad_tol", c.objective.grad_tol},
              {"refine_iters", c.refine_iters},
              {"final_iters", c.final_iters},
              {"free_scales", c.free_scales},
              {"stall_tol", c.stall_tol},
              {"deconv_eps", c.deconv_eps},
              {"assemble_eps", c.assemble_eps},
              {"highdiv_eps", c.highdiv_eps},
              {"error_correction", c.error_correction},
              {"ec_residual_factor", c.ec_residual_factor},
              {"ec_floor", c.ec_floor},
              {"gs_polish_iters", c.gs_polish_iters},
              {"q_lag_tol", c.q_lag_tol},
              {"restarts", c.restarts},
              {"restart_factor", c.restart_factor},
              {"rng_seed", c.rng_seed}};
}

ReconConfig recon_config_from_json(const Json& j) {
  const std::string what = "recon";
  const ReconConfig d;
  check_keys(j, {"lambda", "mu", "max_iters", "grad_tol", "refine_iters", "final_iters", "free_scales",
                 "stall_tol", "deconv_eps", "assemble_eps", "highdiv_eps", "error_correction",
                 "ec_residual_factor", "ec_floor", "gs_polish_iters", "q_lag_tol", "restarts",
                 "restart_factor", "rng_seed"},
             what);
  ReconConfig c;
  c.objective.lambda = positive(get_or(j, "lambda", d.objective.lambda, what), "recon: lambda");
  c.objective.mu = positive(get_or(j, "mu", d.objective.mu, what), "recon: mu");
  c.objective.max_iters = get_or(j, "max_iters", d.objective.max_iters, what);
  if (c.objective.max_iters < 1) throw ConfigError("recon: max_iters must be at least 1");
  c.objective.grad_tol = get_or(j, "grad_tol", d.objective.grad_tol, what);
  if (c.objective.grad_tol < 0.0) throw ConfigError("recon: grad_tol must be nonnegative");
  c.refine_iters = get_or(j, "refine_iters", d.refine_iters, what);
  c.final_iters = get_or(j, "final_iters", d.final_iters, what);
  c.free_scales = get_or(j, "free_scales", d.free_scales, what);
  c.stall_tol = get_or(j, "stall_tol", d.stall_tol, what);
  c.deconv_eps = positive(get_or(j, "deconv_eps", d.deconv_eps, what), "recon: deconv_eps");
  c.assemble_eps = positive(get_or(j, "assemble_eps", d.assemble_eps, what), "recon: assemble_eps");
  c.highdiv_eps = positive(get_or(j, "highdiv_eps", d.highdiv_eps, what), "recon: highdiv_eps");
  c.error_correction = get_or(j, "error_correction", d.error_correction, what);
  c.ec_residual_factor = positive(get_or(j, "ec_residual_factor", d.ec_residual_factor, what), "recon: ec_residual_factor");
  c.ec_floor = get_or(j, "ec_floor", d.ec_floor, what);
  c.gs_polish_iters = get_or(j, "gs_polish_iters", d.gs_polish_iters, what);
  c.q_lag_tol = get_or(j, "q_lag_tol", d.q_lag_tol, what);
  c.restarts = get_or(j, "restarts", d.restarts, what);
  c.restart_factor = get_or(j, "restart_factor", d.restart_factor, what);
  c.rng_seed = get_or(j, "rng_seed", d.rng_seed, what);
  if (c.refine_iters < 0 || c.final_iters < 0 || c.gs_polish_iters < 0 || c.restarts < 0) {
    throw ConfigError("recon: iteration counts must be nonnegative");
  }
  return c;
}

Json recon_result_to_json(const ReconResult& r, bool with_signal) {
  Json scales = Json::array();
  for (const auto& s : r.scales) {
    scales.push_back({{"scale", s.scale},
                      {"init_residual", s.init_residual},
                      {"objective", s.objective},
                      {"iterations", s.iterations},
                      {"ec_windows", s.ec_windows},
                      {"ec_applied", s.ec_applied},
                      {"line_search_failed", s.line_search_failed}});
  }
  Json j{{"reconstruction_error", r.reconstruction_error},
         {"noise_estimate", r.noise_estimate},
         {"lag_tol", r.lag_tol},
         {"attempts", r.attempts},
         {"flags", r.flags},
         {"scales", scales},
         {"wall_time_s", r.wall_time_s}};
  if (with_signal) {
    std::vector<double> re(static_cast<std::size_t>(r.f_rec.size())), im(re.size());
    for (Eigen::Index i = 0; i < r.f_rec.size(); ++i) {
      re[static_cast<std::size_t>(i)] = r.f_rec[i].real();
      im[static_cast<std::size_t>(i)] = r.f_rec[i].imag();
    }
    j["f_rec"] = {{"re", re}, {"im", im}};
  }
  return j;
}

void write_scalogram_csv(const std::string& path, const RealMatrix& g, const BankDescription& bank) {
  std::ofstream out = open_out(path);
  out << "# scalogram: " << g.rows() << " scales x " << g.cols() << " samples\n";
  out << "# bank: " << bank_to_json(bank).dump() << '\n';
  for (Eigen::Index j = 0; j < g.rows(); ++j) {
    for (Eigen::Index n = 0; n < g.cols(); ++n) {
      if (n) out << ',';
      out << format_double(g(j, n));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed on '" + path + "'");
}

ScalogramFile read_scalogram_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  ScalogramFile file;
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("bank:");
      if (pos != std::string::npos) {
        try {
          file.bank = bank_from_json(Json::parse(line.substr(pos + 5)));
        } catch (const Json::parse_error& e) {
          throw IoError(path + ":" + std::to_string(lineno) + ": bad bank header: " + e.what());
        }
        file.has_bank = true;
      }
      continue;
    }
    std::vector<double> row;
    for (const auto& cell : split(line, ',')) row.push_back(parse_double(cell, path, lineno));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(path + ":" + std::to_string(lineno) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("'" + path + "' holds no scalogram rows");
  file.g.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t n = 0; n < rows[j].size(); ++n) {
      file.g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(n)) = rows[j][n];
    }
  }
  if (file.has_bank && (file.g.rows() != file.bank.J + 1 || file.g.cols() != file.bank.N)) {
    throw IoError("'" + path + "': shape does not match its bank header");
  }
  return file;
}

void write_signal_csv(const std::string& path, const Signal& f) {
  std::ofstream out = open_out(path);
  out << "n,re,im\n";
  for (Eigen::Index n = 0; n < f.size(); ++n) {
    out << n << ',' << format_double(f[n].real()) << ',' << format_double(f[n].imag()) << '\n';
  }
  if (!out) throw IoError("write failed on '" + path + "'");
}

Signal read_signal_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<Complex> samples;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line, ',');
    if (samples.empty() && !cells.empty() && cells[0].find_first_of("0123456789") == std::string::npos) {
      continue;  // header row such as "n,re,im"
    }
    if (cells.size() == 1) {
      samples.emplace_back(parse_double(cells[0], path, lineno), 0.0);
    } else if (cells.size() == 3) {
      samples.emplace_back(parse_double(cells[1], path, lineno), parse_double(cells[2], path, lineno));
    } else {
      throw IoError(path + ":" + std::to_string(lineno) + ": expected 1 or 3 columns");
    }
  }
  if (samples.empty()) throw IoError("'" + path + "' holds no samples");
  return Eigen::Map<Signal>(samples.data(), static_cast<Eigen::Index>(samples.size()));
}

void write_trace_csv(const std::string& path, const std::vector<StageTrace>& trace) {
  std::ofstream out = open_out(path);
  out << "stage,iter,value,grad_norm\n";
  for (const auto& t : trace) {
    out << t.stage << ',' << t.row.iter << ',' << format_double(t.row.value) << ','
        << format_double(t.row.grad_norm) << '\n';
  }
  if (!out) throw IoError("write failed on '" + path + "'");
}

}  // namespace scalopr
