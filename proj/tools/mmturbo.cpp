// Command-line front end: mmturbo {air|ber|noise|complexity} [--config FILE] [--KEY VALUE ...]

#include "mmturbo/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace mmturbo;

struct Subcommand {
  Experiment kind;
  CLI::App* app;
  std::string config_path;
  std::string out_path;
  std::map<std::string, std::string> flags;
};

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << contents;
  out.close();
  if (!out) throw IoError("error writing '" + path + "'");
}

std::string run(const SimConfig& cfg) {
  std::ostringstream csv;
  switch (cfg.kind) {
    case Experiment::air: write_air_csv(csv, run_air_sweep(cfg)); break;
    case Experiment::ber: write_ber_csv(csv, run_ber_sweep(cfg)); break;
    case Experiment::noise: write_noise_csv(csv, run_noise_dump(cfg)); break;
    case Experiment::complexity: write_complexity_csv(csv, cfg); break;
  }
  return csv.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Turbo DPSK receivers over the Markov-Middleton impulsive noise channel"};
  app.require_subcommand(1);

  std::vector<Subcommand> subs;
  subs.reserve(4);
  const std::pair<Experiment, const char*> kinds[] = {
      {Experiment::air, "achievable information rate sweep"},
      {Experiment::ber, "turbo receiver bit error rate sweep"},
      {Experiment::noise, "dump one noise realization"},
      {Experiment::complexity, "multiplications per symbol of the joint and separate receivers"}};
  for (const auto& [kind, help] : kinds) {
    auto& sub = subs.emplace_back(Subcommand{kind, app.add_subcommand(std::string(to_string(kind)), help), {}, {}, {}});
    sub.app->add_option("--config", sub.config_path, "key = value configuration file");
    sub.app->add_option("--out", sub.out_path, "CSV output path (stdout when omitted)");
    for (const auto& key : config_keys(kind)) {
      sub.app->add_option_function<std::string>(
          "--" + key, [&sub, key](const std::string& v) { sub.flags[key] = v; }, "override '" + key + "'");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (auto& sub : subs) {
    if (!sub.app->parsed()) continue;
    try {
      auto values = sub.config_path.empty() ? std::map<std::string, std::string>{} : read_config_file(sub.config_path);
      for (const auto& [k, v] : sub.flags) values[k] = v;
      const SimConfig cfg = resolve_config(sub.kind, values);
      const std::string csv = run(cfg);
      if (sub.out_path.empty()) {
        std::cout << csv;
      } else {
        write_file(sub.out_path, csv);
        write_file(sub.out_path + ".config", render_config(cfg));
      }
    } catch (const ConfigError& e) {
      std::cerr << "invalid config: " << e.what() << '\n';
      return 1;
    } catch (const IoError& e) {
      std::cerr << "I/O error: " << e.what() << '\n';
      return 2;
    } catch (const std::invalid_argument& e) {
      std::cerr << "invalid config: " << e.what() << '\n';
      return 1;
    }
  }
  return 0;
}
