#include <doctest.h>

#include <string>

#include "afe/config.hpp"
#include "afe/error.hpp"

using namespace afe;

namespace {

std::string error_of(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    scenario_from_text(text, "case.ini", overrides);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults and round trip") {
  const auto cfg = scenario_from_text("", "empty.ini");
  CHECK(cfg.source.prbs_order == 7);
  CHECK(cfg.adc.full_scale == 0.6);
  CHECK(cfg.comparator.offset_sigma == 14.4e-3);
  CHECK(cfg.run.seed == 1);
  const std::string canon = cfg.canonical_text();
  CHECK(canon.find("[dtle]\n") != std::string::npos);
  CHECK(canon.find("bubble_policy = majority\n") != std::string::npos);
  CHECK(scenario_from_text(canon, "canon.ini").canonical_text() == canon);
}

TEST_CASE("file values and overrides") {
  const std::string text =
      "# scenario\n"
      "[dtle]\n"
      "gm = 5e-3   ; inline comment\n"
      "blockers_enabled = false\n"
      "\n"
      "[ADC]\n"
      "Bubble_Policy = first-zero\n"
      "rate_mode = quarter\n"
      "[metrics]\n"
      "test_freqs = 1e9, 2e9, 3e9\n"
      "[source]\n"
      "prbs_seed = 0x55\n";
  auto cfg = scenario_from_text(text, "a.ini");
  CHECK(cfg.dtle.params.gm == 5e-3);
  CHECK_FALSE(cfg.dtle.params.blockers_enabled);
  CHECK(cfg.adc.bubble_policy == BubblePolicy::first_zero);
  CHECK(cfg.adc.rate_mode == RateMode::quarter);
  CHECK(cfg.metrics.test_freqs == std::vector<double>{1e9, 2e9, 3e9});
  CHECK(cfg.source.prbs_seed == 0x55u);

  cfg = scenario_from_text(text, "a.ini", {"dtle.gm=7e-3", "run.seed=99"});
  CHECK(cfg.dtle.params.gm == 7e-3);
  CHECK(cfg.run.seed == 99);
  CHECK(cfg.canonical_text() != scenario_from_text(text, "a.ini").canonical_text());
}

TEST_CASE("diagnostics carry the line") {
  CHECK(error_of("[source]\nprbs_order = 7\nbogus = 1\n").find("case.ini:3") == 0);
  CHECK(error_of("[dtle]\n\ngm = abc\n").find("case.ini:3") == 0);
  CHECK(error_of("[nowhere]\nx = 1\n").find("case.ini:2") == 0);
  CHECK(error_of("[source]\nprbs_order 7\n").find("case.ini:2") == 0);
  CHECK(error_of("x = 1\n").find("case.ini:1") == 0);
  CHECK(error_of("[source\n").find("case.ini:1") == 0);
  CHECK(error_of("[source]\nswing = 1\nswing = 2\n").find("case.ini:3") == 0);
  CHECK(error_of("[adc]\nshared_ladder = maybe\n").find("case.ini:2") == 0);
  CHECK(error_of("[run]\nseed = -4\n").find("case.ini:2") == 0);
  CHECK(error_of("", {"dtle.gm"}).find("--set") == 0);
  CHECK(error_of("", {"dtle.nope=1"}).find("--set dtle.nope=1") == 0);
}

TEST_CASE("semantic validation") {
  CHECK(error_of("[source]\nprbs_order = 8\n").find("invalid configuration") != std::string::npos);
  CHECK(error_of("[source]\nprbs_seed = 0\n").find("invalid configuration") != std::string::npos);
  CHECK(error_of("[dtle]\ntrack_duty = 1.5\n").find("invalid configuration") != std::string::npos);
  CHECK(error_of("[comparator]\nvcm = 0.3\n").find("invalid configuration") != std::string::npos);
  CHECK(error_of("[metrics]\nn_fft = 1000\n").find("n_fft") != std::string::npos);
  CHECK(error_of("[run]\nmc_trials = 10\n").find("mc_trials") != std::string::npos);
  CHECK(error_of("[dtle]\nrd_from_switch = true\nswitch_vgs = -0.3\n").find("invalid configuration") !=
        std::string::npos);
  CHECK_THROWS_AS(load_scenario("/nonexistent/x.ini", {}), ConfigError);
}

TEST_CASE("derived parameters") {
  auto cfg = scenario_from_text("[dtle]\nrd_from_switch = true\nswitch_vgs = -0.9\n", "d.ini");
  CHECK(cfg.effective_dtle().rd == doctest::Approx(2000.0));
  cfg = scenario_from_text("[comparator]\nc_load = 1e-15\ncalibrate_gain = false\n", "c.ini");
  CHECK(cfg.effective_comparator().c_load == 1e-15);
  cfg = scenario_from_text("[comparator]\nc_load = 1e-15\n", "c.ini");
  CHECK(cfg.effective_comparator().c_load == doctest::Approx(ComparatorParams{}.c_load));
}

TEST_CASE("shipped default.ini equals the built-in defaults") {
  const ScenarioConfig shipped = load_scenario(AFE_DEFAULT_INI, {});
  CHECK(shipped.canonical_text() == ScenarioConfig{}.canonical_text());
}
