// Command-line front end: run, validate, list-scenarios, defaults.
// Exit status: 0 all checks passed, 1 a check failed, 2 bad config or
// arguments, 3 any other error.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "bohmkit/error.hpp"
#include "bohmkit/parallel.hpp"
#include "bohmkit/scenario.hpp"

namespace {

int run(const std::string& path, const std::string& out, const bohmkit::RunOverrides& o, std::size_t threads) {
  bohmkit::set_thread_count(threads);
  const auto cfg = bohmkit::apply_overrides(bohmkit::load_scenario_config(path), o);
  std::printf("%s  config %s  seed %llu\n", cfg.scenario.c_str(), cfg.hash().c_str(),
              static_cast<unsigned long long>(cfg.seed()));
  const auto rep = bohmkit::run_scenario(cfg, out);
  for (const auto& c : rep.checks)
    std::printf("%s %-40s %.6g %s %.6g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.relation.c_str(),
                c.limit);
  for (const auto& w : rep.warnings) std::printf("warning: %s\n", w.c_str());
  std::printf("wrote %zu files to %s\n", rep.files.size(), out.c_str());
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bohmian trajectory scenarios"};
  app.require_subcommand(1);

  std::string config, out = "out";
  std::size_t threads = 1;
  std::uint64_t seed = 0;
  double checkpoint = 0.0;
  auto* run_cmd = app.add_subcommand("run", "run a scenario and write its output bundle");
  run_cmd->add_option("config", config, "scenario config (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("-o,--out", out, "output directory");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "override /ensemble/seed");
  auto* cp_opt = run_cmd->add_option("--checkpoint-every", checkpoint, "override /outputs/checkpoint_every");
  run_cmd->add_option("--threads", threads, "worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);

  auto* validate_cmd = app.add_subcommand("validate", "check a config and print it merged with defaults");
  validate_cmd->add_option("config", config, "scenario config (JSON)")->required()->check(CLI::ExistingFile);

  app.add_subcommand("list-scenarios", "print the scenario ids");

  std::string id;
  auto* defaults_cmd = app.add_subcommand("defaults", "print the default config of a scenario");
  defaults_cmd->add_option("scenario", id, "scenario id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) {
      bohmkit::RunOverrides o;
      if (*seed_opt) o.seed = seed;
      if (*cp_opt) o.checkpoint_every = checkpoint;
      return run(config, out, o, threads);
    }
    if (*validate_cmd) {
      const auto cfg = bohmkit::load_scenario_config(config);
      std::cout << cfg.document().dump(2) << "\nconfig hash " << cfg.hash() << '\n';
      return 0;
    }
    if (*defaults_cmd) {
      std::cout << bohmkit::scenario_defaults(id).dump(2) << '\n';
      return 0;
    }
    for (const auto& s : bohmkit::scenario_ids()) std::cout << s << '\n';
    return 0;
  } catch (const bohmkit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
