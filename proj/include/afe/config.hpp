#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "afe/channel.hpp"
#include "afe/comparator.hpp"
#include "afe/dtle.hpp"
#include "afe/flash_adc.hpp"

namespace afe {

/// Plain-text scenario file: `[section]` headers, `key = value` lines,
/// `#` or `;` comments. Every entry remembers where it came from.
struct IniEntry {
  std::string value;
  std::string origin;  // "file:line" or "--set"
};

class IniDocument {
public:
  static IniDocument parse(const std::string& text, const std::string& source_name);

  void set(const std::string& section, const std::string& key, const std::string& value,
           const std::string& origin);
  const std::map<std::string, std::map<std::string, IniEntry>>& sections() const { return sections_; }

private:
  std::map<std::string, std::map<std::string, IniEntry>> sections_;
};

struct SourceConfig {
  int prbs_order = 7;
  std::uint32_t prbs_seed = 0x7F;
  std::size_t n_bits = 127 * 24;
  double bit_rate = 20e9;
  int samples_per_bit = 16;
  double swing = 1.0;  // V ppd at the transmitter
  double common_mode = 0.6;
  double rise_time = 0.0;
};

struct ChannelConfig {
  ChannelSpec spec{};
  bool calibrate = true;
  double target_loss_db = 12.0;
  double at_freq = 2.5e9;
  double sweep_max = 20e9;
  double sweep_step = 10e6;
};

struct DtleConfig {
  DtleParams params{};
  bool rd_from_switch = false;
  SwitchDevice device{};
  double bode_f_min = 1e7;
  double bode_f_max = 1e11;
  std::size_t bode_points = 401;
};

struct PgaConfig {
  double gain = 0.0;  // <= 0 selects automatic range mapping
  double common_mode = 0.75;
  double fill = 0.9;  // auto mode: fraction of FS/2 reached by the largest held sample
};

struct AdcSection {
  double full_scale = 0.6;
  int n_bits = 4;
  bool shared_ladder = true;
  BubblePolicy bubble_policy = BubblePolicy::majority;
  RateMode rate_mode = RateMode::full;
  bool ideal_comparators = false;
  bool use_offsets = true;
  double kickback_v = 1e-3;
  double input_clk = 10e9;
};

struct MetricsConfig {
  std::size_t n_fft = 4096;
  std::vector<double> test_freqs{4.84e9, 9.84e9};
  double tone_amplitude = 0.6;  // V ppd
  std::size_t sweep_points = 16;
  std::size_t dnl_samples = 1u << 17;
  double dnl_overdrive = 1.02;
  double eye_aperture = 0.10;
  std::size_t eye_skip_ui = 256;
};

struct PowerConfig {
  double ladder_w = 200e-6;
  double comparator_w = 189e-6;
  std::size_t comparator_count = 60;
  double clock_buffer_w = 1e-3;
  std::size_t clock_buffer_count = 4;
  double dtle_w = 0.57e-3;
  std::size_t dtle_count = 4;
  double bit_rate = 20e9;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t mc_trials = 10000;
  std::string out_dir;  // --out wins; empty falls back to AFE_OUT_DIR, then "afe_out"
};

struct ScenarioConfig {
  SourceConfig source;
  ChannelConfig channel;
  DtleConfig dtle;
  PgaConfig pga;
  ComparatorParams comparator{};
  bool calibrate_comparator = true;
  AdcSection adc;
  MetricsConfig metrics;
  PowerConfig power;
  RunConfig run;

  /// Applies every entry; throws ConfigError with the entry's origin on
  /// unknown keys or malformed values, then validates each section.
  void apply(const IniDocument& doc);
  void validate() const;

  /// All keys with resolved values, one canonical line each.
  std::string canonical_text() const;

  /// Effective comparator params (gain calibration applied when enabled).
  ComparatorParams effective_comparator() const;
  DtleParams effective_dtle() const;
};

/// Defaults < file < overrides ("section.key=value").
ScenarioConfig load_scenario(const std::string& path, const std::vector<std::string>& overrides);
ScenarioConfig scenario_from_text(const std::string& text, const std::string& source_name,
                                  const std::vector<std::string>& overrides = {});

}  // namespace afe
