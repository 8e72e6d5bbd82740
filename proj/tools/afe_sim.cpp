// afe_sim: batch runner for the link, converter and component experiments.
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "afe/config.hpp"
#include "afe/error.hpp"
#include "afe/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Behavioural simulator of a 20 Gb/s ADC-based receiver front end"};
  app.set_version_flag("--version", std::string(AFE_VERSION));

  std::string command;
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  int parallel = 0;
  bool check = false;

  app.add_option("command", command, "link-sim | adc-char | comparator-mc | dtle-bode | channel-sweep")
      ->required()
      ->check(CLI::IsMember({"link-sim", "adc-char", "comparator-mc", "dtle-bode", "channel-sweep"}));
  app.add_option("-c,--config", config_path, "scenario file (INI)");
  app.add_option("-o,--out", out_dir, "output directory (default: run.out_dir, then $AFE_OUT_DIR, then ./afe_out)");
  app.add_option("-s,--seed", seed, "master seed (overrides run.seed)");
  app.add_option("--set", overrides, "override a config value, section.key=value (repeatable)");
  app.add_option("-j,--parallel", parallel, "worker threads; without a value uses all cores")
      ->expected(0, 1)
      ->default_str("0");
  app.add_flag("--check", check, "verify the command's acceptance checks; exit 4 on failure");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : afe::exit_code::config_error;
  }

  unsigned threads = 1;
  if (app.count("--parallel")) {
    threads = parallel > 0 ? static_cast<unsigned>(parallel) : std::max(1u, std::thread::hardware_concurrency());
  }
  if (seed) overrides.push_back("run.seed=" + std::to_string(*seed));

  afe::ScenarioConfig cfg;
  try {
    cfg = afe::load_scenario(config_path, overrides);
  } catch (const afe::ConfigError& e) {
    std::fprintf(stderr, "afe_sim: %s\n", e.what());
    return afe::exit_code::config_error;
  }

  afe::RunOptions opt;
  opt.threads = threads;
  opt.check = check;
  if (!out_dir.empty()) opt.out_dir = out_dir;
  else if (!cfg.run.out_dir.empty()) opt.out_dir = cfg.run.out_dir;
  else if (const char* env = std::getenv("AFE_OUT_DIR"); env && *env) opt.out_dir = env;
  else opt.out_dir = "afe_out";

  const auto cmd = *afe::parse_command(command);
  afe::RunOutcome outcome;
  try {
    outcome = afe::run_scenario(cfg, cmd, opt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "afe_sim: %s\n", e.what());
    return afe::exit_code::failure;
  }
  if (outcome.exit_code == afe::exit_code::config_error || outcome.exit_code == afe::exit_code::calibration_failure) {
    std::fprintf(stderr, "afe_sim: %s", outcome.summary.c_str());
    return outcome.exit_code;
  }
  std::cout << outcome.summary;
  std::cout << "artifacts: " << opt.out_dir.string() << "\n";
  return outcome.exit_code;
}
