#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "afe/config.hpp"
#include "afe/flash_adc.hpp"
#include "afe/metrics.hpp"

namespace afe {

enum class Command { link_sim, adc_char, comparator_mc, dtle_bode, channel_sweep };

std::optional<Command> parse_command(const std::string& name);
std::string to_string(Command c);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int config_error = 2;
inline constexpr int calibration_failure = 3;
inline constexpr int check_failure = 4;
}  // namespace exit_code

struct RunOptions {
  std::filesystem::path out_dir;
  unsigned threads = 1;
  bool check = false;
};

struct RunOutcome {
  int exit_code = exit_code::ok;
  std::string summary;                     // report text also written to disk
  std::vector<std::string> check_failures;
};

/// Runs one command, writes its artifacts and manifest.json into
/// opt.out_dir, and maps failures onto exit codes.
RunOutcome run_scenario(const ScenarioConfig& cfg, Command cmd, const RunOptions& opt);

// Computational cores of the commands, exposed for tests.

struct LinkSimResult {
  ChannelCalibration channel;
  EyeResult rx_eye;
  EyeResult dtle_eye;   // recombined held samples at the equalizer output
  EyeResult pga_eye;    // same after the gain stage
  double dtle_phase = 0.0;  // s, first track-window start of channel 0
  double pga_gain = 0.0;
  SampledWaveform rx;
  SampledWaveform held;     // recombined, after the gain stage
  AdcResult adc;
  std::size_t bits_compared = 0;
  std::size_t bit_errors = 0;
  int adc_latency_ui = 0;
};
LinkSimResult link_sim(const ScenarioConfig& cfg, unsigned threads = 1);

struct ToneResult {
  double fin_requested = 0.0;
  SpectralResult measured;
  SpectralResult ideal;  // same stimulus through an ideal zero-offset quantizer
  std::vector<int> codes;
};

struct AdcCharResult {
  double fs = 0.0;  // ADC output rate
  std::vector<ToneResult> tones;
  std::vector<double> sweep_fin;
  std::vector<double> sweep_enob;
  Linearity linearity;
  Linearity ideal_linearity;
  PowerLedger ledger;
  PowerFom fom;            // with the measured near-Nyquist ENOB
  PowerFom fom_reference;  // with ENOB 3.67
  std::size_t metastable = 0;
  MetricsReport report;
};
AdcConfig make_adc_config(const ScenarioConfig& cfg);
AdcCharResult adc_char(const ScenarioConfig& cfg, unsigned threads = 1);

}  // namespace afe
