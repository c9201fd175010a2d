// gbarq command-line tool.
// Precedence: flags > environment > config file > defaults.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gbarq/commands.hpp"

namespace {

std::string env(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

void apply_override(gbarq::RunConfig& cfg, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw gbarq::ParseError(kv, 0, "override must look like key=value");
  cfg.set(gbarq::cfg::trim(kv.substr(0, eq)), kv.substr(eq + 1));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-reflection free-fall model: maps, sampling and g estimation"};
  std::string config, command, out;
  long long seed = -1, workers = -1;
  std::vector<std::string> sets;
  bool list = false;
  app.add_option("-c,--config", config, "config file (key = value lines)");
  app.add_option("command,--command", command,
                 "scales | basis | source-dist | end-of-mirror | current-map | simulate | estimate | fisher | campaign");
  app.add_option("--seed", seed, "run.seed");
  app.add_option("--out", out, "run.out");
  app.add_option("--workers", workers, "run.workers (0 = all cores)");
  app.add_option("--set", sets, "key=value override, repeatable");
  app.add_flag("--list-keys", list, "print the config keys and exit");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& k : gbarq::config_keys())
      std::cout << k.key << " = " << gbarq::RunConfig::format_value(k, k.def) << (k.doc.empty() ? "" : "  # " + k.doc) << '\n';
    return 0;
  }

  if (config.empty()) config = env("GBARQ_CONFIG");
  if (command.empty()) command = env("GBARQ_COMMAND");
  if (command.empty()) {
    std::cerr << "error: no command given\n" << app.help();
    return 2;
  }

  gbarq::RunConfig cfg;
  try {
    if (!config.empty()) cfg = gbarq::parse_config(config);
    // environment
    if (auto s = env("GBARQ_SEED"); !s.empty()) cfg.set("run.seed", s);
    if (auto s = env("GBARQ_WORKERS"); !s.empty()) cfg.set("run.workers", s);
    if (auto s = env("GBARQ_OUT"); !s.empty()) cfg.set("run.out", s);
    if (auto s = env("GBARQ_SET"); !s.empty()) {
      std::stringstream ss(s);
      std::string item;
      while (std::getline(ss, item, ';'))
        if (!gbarq::cfg::trim(item).empty()) apply_override(cfg, item);
    }
    // flags
    if (seed >= 0) cfg.set("run.seed", std::to_string(seed));
    if (workers >= 0) cfg.set("run.workers", std::to_string(workers));
    if (!out.empty()) cfg.set("run.out", out);
    for (const auto& kv : sets) apply_override(cfg, kv);
    cfg.validate();
  } catch (const gbarq::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  gbarq::set_default_workers(static_cast<int>(cfg.integer("run.workers")));
  return gbarq::run(cfg, command, cfg.text("run.out"));
}
