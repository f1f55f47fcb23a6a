// scalopr: scalogram transform, reconstruction and experiment drivers.
//
// Exit codes: 0 success, 2 configuration error, 3 IO error, 4 numerical failure.

#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "scalopr/errors.hpp"
#include "scalopr/experiment.hpp"
#include "scalopr/io.hpp"
#include "scalopr/reconstruct.hpp"
#include "scalopr/signals.hpp"

namespace {

using namespace scalopr;

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

bool has_ext(const std::string& path, const std::string& ext) {
  std::string e = std::filesystem::path(path).extension().string();
  for (auto& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e == ext;
}

BankDescription load_bank(const std::string& path) { return bank_from_json(read_json_file(path)); }

// A signal from a WAV, a PGM row, or a signal CSV.
Signal load_signal(const std::string& path, int n, long offset, int row) {
  bool degenerate = false;
  Signal f;
  if (has_ext(path, ".wav")) {
    f = ingest_wav(path, offset, n, &degenerate);
  } else if (has_ext(path, ".pgm")) {
    f = ingest_image_line(path, row, n, &degenerate);
  } else {
    f = read_signal_csv(path);
    if (f.size() != n) {
      throw ConfigError("signal '" + path + "' has " + std::to_string(f.size()) + " samples, bank expects " +
                        std::to_string(n));
    }
  }
  if (degenerate) std::cerr << "warning: '" << path << "' gives a constant segment\n";
  return f;
}

struct TransformArgs {
  std::string in, bank, out;
  long offset = 0;
  int row = 0;
};

int cmd_transform(const TransformArgs& a) {
  const Bank bank = make_bank(load_bank(a.bank));
  const Signal f = load_signal(a.in, bank.description.N, a.offset, a.row);
  write_scalogram_csv(a.out, scalogram(f, bank.family).g, bank.description);
  return 0;
}

struct ReconstructArgs {
  std::string in, bank, config, out, trace;
  long offset = 0;
  double noise = 0.0;
  unsigned long long seed = 0;
};

int cmd_reconstruct(const ReconstructArgs& a) {
  const ReconConfig cfg = a.config.empty() ? ReconConfig{} : recon_config_from_json(read_json_file(a.config));
  RealMatrix g;
  BankDescription desc;
  Signal truth;
  if (has_ext(a.in, ".wav")) {
    if (a.bank.empty()) throw ConfigError("reconstruct: a WAV input needs --bank");
    desc = load_bank(a.bank);
    const Bank tmp = make_bank(desc);
    truth = load_signal(a.in, desc.N, a.offset, 0);
    g = add_noise(scalogram(truth, tmp.family).g, a.noise, a.seed).h;
  } else {
    const ScalogramFile file = read_scalogram_csv(a.in);
    if (!a.bank.empty()) {
      desc = load_bank(a.bank);
    } else if (file.has_bank) {
      desc = file.bank;
    } else {
      throw ConfigError("reconstruct: no --bank and no bank header in '" + a.in + "'");
    }
    g = file.g;
  }
  const Bank bank = make_bank(desc);
  if (g.rows() != bank.family.scales() || g.cols() != bank.family.N()) {
    throw ConfigError("reconstruct: scalogram is " + std::to_string(g.rows()) + "x" + std::to_string(g.cols()) +
                      ", bank expects " + std::to_string(bank.family.scales()) + "x" +
                      std::to_string(bank.family.N()));
  }
  const ReconResult r = reconstruct(g, bank, cfg);
  Json doc = recon_result_to_json(r, has_ext(a.out, ".json"));
  if (truth.size() > 0 && truth.norm() > 0.0) {
    const Errors e = metrics(truth, r.f_rec, bank.family);
    doc["truth"] = {{"recon_error", e.recon}, {"signal_error", e.signal}};
  }
  if (has_ext(a.out, ".json")) {
    write_json_file(a.out, doc);
  } else {
    write_signal_csv(a.out, r.f_rec);
    std::filesystem::path side(a.out);
    side.replace_extension(".result.json");
    write_json_file(side.string(), doc);
  }
  if (!a.trace.empty()) write_trace_csv(a.trace, r.trace);
  std::cout << "reconstruction error " << r.reconstruction_error << " (" << r.attempts << " attempt"
            << (r.attempts == 1 ? "" : "s") << ", " << r.wall_time_s << " s)\n";
  return 0;
}

int cmd_experiment(const std::string& config, const std::string& out, const std::string& kind) {
  Json j = read_json_file(config);
  if (!kind.empty()) {
    if (j.contains("kind") && j.at("kind") != kind) {
      throw ConfigError("config kind '" + j.at("kind").get<std::string>() + "' does not match the subcommand");
    }
    j["kind"] = kind;
  }
  const ExperimentConfig cfg = experiment_config_from_json(j);
  std::cout << run_experiment(cfg, out) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase retrieval from scalograms"};
  app.require_subcommand(1);

  TransformArgs ta;
  auto* transform = app.add_subcommand("transform", "scalogram of a signal (CSV, WAV or PGM row)");
  transform->add_option("input", ta.in, "signal file")->required();
  transform->add_option("--bank", ta.bank, "bank JSON")->required();
  transform->add_option("-o,--output", ta.out, "scalogram CSV")->required();
  transform->add_option("--offset", ta.offset, "first WAV sample");
  transform->add_option("--row", ta.row, "PGM row");

  ReconstructArgs ra;
  auto* recon = app.add_subcommand("reconstruct", "signal from a scalogram CSV (or the scalogram of a WAV)");
  recon->add_option("input", ra.in, "scalogram CSV or WAV")->required();
  recon->add_option("--bank", ra.bank, "bank JSON (default: the CSV header)");
  recon->add_option("--config", ra.config, "reconstruction config JSON");
  recon->add_option("-o,--output", ra.out, "signal CSV (plus .result.json) or result JSON")->required();
  recon->add_option("--trace", ra.trace, "optimization trace CSV");
  recon->add_option("--offset", ra.offset, "first WAV sample");
  recon->add_option("--noise", ra.noise, "relative noise added to a WAV scalogram");
  recon->add_option("--seed", ra.seed, "noise seed");

  std::string exp_config, exp_out;
  auto* experiment = app.add_subcommand("experiment", "trial sweep from a config JSON");
  experiment->add_option("config", exp_config)->required();
  experiment->add_option("-o,--output", exp_out, "output directory")->required();

  std::string stab_config, stab_out;
  auto* stability = app.add_subcommand("stability", "stability study from a config JSON");
  stability->add_option("config", stab_config)->required();
  stability->add_option("-o,--output", stab_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*transform) return cmd_transform(ta);
    if (*recon) return cmd_reconstruct(ra);
    if (*experiment) return cmd_experiment(exp_config, exp_out, "");
    if (*stability) return cmd_experiment(stab_config, stab_out, "stability");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ArgumentError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
