// replearn: deterministic experiment driver for metalearning and multitask
// learning of halfspaces over shared linear representations.
//
//   replearn <mode> --config <path> [--seed-range a..b] [--out <dir>]
//
// Modes: metalearn-mon | metalearn-real | metalearn-agn | multitask |
//        reduction | verify | vc-witness | nrc-scan
//
// REPLEARN_THREADS caps the number of parallel seed workers.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "replearn/replearn.hpp"

namespace {

std::size_t thread_cap_from_env() {
  const char* env = std::getenv("REPLEARN_THREADS");
  if (!env) return 1;
  try {
    const long v = std::stol(env);
    return v >= 1 ? static_cast<std::size_t>(v) : 1;
  } catch (const std::exception&) {
    return 1;
  }
}

bool parse_seed_range(const std::string& text, std::uint64_t& lo, std::uint64_t& hi) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) return false;
  try {
    lo = std::stoull(text.substr(0, dots));
    hi = std::stoull(text.substr(dots + 2));
  } catch (const std::exception&) {
    return false;
  }
  return lo <= hi;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"halfspace representation-learning experiments"};
  app.require_subcommand(1);

  std::string config_path, seed_range, out_dir;
  for (const auto& mode : replearn::experiment_modes()) {
    CLI::App* sub = app.add_subcommand(mode);
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--seed-range", seed_range, "inclusive seed range a..b");
    sub->add_option("--out", out_dir, "output directory (overrides config)");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string mode = app.get_subcommands().front()->get_name();

  try {
    replearn::ExperimentConfig cfg = replearn::parse_config_file(config_path, mode);
    if (!seed_range.empty()) {
      std::uint64_t lo = 0, hi = 0;
      if (!parse_seed_range(seed_range, lo, hi)) {
        std::cerr << "error: --seed-range expects a..b with a <= b\n";
        return 2;
      }
      cfg.seeds.clear();
      for (std::uint64_t s = lo; s <= hi; ++s) cfg.seeds.push_back(s);
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    cfg.validate();

    const replearn::RunResult result = replearn::run_and_write(cfg, thread_cap_from_env());
    std::cout << "wrote " << result.rows.size() << " rows to " << cfg.out_dir
              << "/rows.csv\n";
    for (const auto& [k, v] : result.summary) std::cout << k << " = " << v << "\n";
    return 0;
  } catch (const replearn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const replearn::InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const replearn::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  }
}
