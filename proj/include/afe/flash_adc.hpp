#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "afe/comparator.hpp"
#include "afe/signal.hpp"

namespace afe {

struct LadderSpec {
  double full_scale_diff = 0.6;  // V
  int n_bits = 4;
  std::vector<double> tap_voltages;  // differential thresholds, ascending
  bool shared = true;                // one ladder for all interleaved channels

  std::size_t tap_count() const { return tap_voltages.size(); }
  double lsb() const { return full_scale_diff / static_cast<double>(1u << n_bits); }
};

/// tap_i = -FS/2 + (i+1) FS/2^n for i = 0 .. 2^n - 2.
LadderSpec build_ladder(double full_scale_diff = 0.6, int n_bits = 4);

/// Up to 63 comparator outputs; bit i set <=> input above tap i.
struct ThermometerWord {
  std::uint64_t bits = 0;
  int width = 15;

  bool test(int i) const { return (bits >> i) & 1u; }
  void set(int i, bool v) {
    if (v) bits |= (std::uint64_t{1} << i);
    else bits &= ~(std::uint64_t{1} << i);
  }
  int popcount() const;
  bool monotonic() const;  // no 0 below a 1
  std::string to_string() const;  // MSB first
  static ThermometerWord from_string(const std::string& msb_first);
  static ThermometerWord of_code(int code, int width);
  bool operator==(const ThermometerWord&) const = default;
};

/// One clock as a high interval inside a frame (times relative to frame start).
struct ClockWave {
  double rise = 0.0;
  double fall = 0.0;
  double period = 0.0;
  int high_slots = 0;  // quarter-frame slots spent high

  double duty() const;
  bool high_at(double t) const;
};

struct ChannelClocks {
  double offset = 0.0;  // s, frame start of this channel
  ClockWave clk1;       // amplification (25 %)
  ClockWave clk2;       // reset / pre-charge (50 %)
  ClockWave clk3;       // low during regeneration (75 %)

  double sample_instant() const { return offset + clk1.rise; }  // first frame
};

struct ClockPhaseSchedule {
  double input_clk = 10e9;
  double frame_period = 0.0;  // 1 / (input_clk / 2)
  std::array<ChannelClocks, 4> channels{};
};

/// Divide-by-2 of the input clock through a master/slave latch pair, giving
/// in-phase and quadrature half-rate clocks; their inverses complete four
/// 90-degree phases P0..P3. Channel c uses CLK2 = P_c, CLK1 = P_{c+1} AND
/// P_{c+2} (buffered 25 %), CLK3 = NAND(P_{c+2}, P_{c+3}) (75 %).
ClockPhaseSchedule gen_clock_phases(double input_clk = 10e9);

enum class BubblePolicy { majority, first_zero };
enum class RateMode { full, half, quarter };

std::string to_string(BubblePolicy p);
std::string to_string(RateMode m);

struct AdcConfig {
  LadderSpec ladder = build_ladder();
  ComparatorParams comparator{};
  ClockPhaseSchedule schedule = gen_clock_phases();
  std::vector<double> offsets;   // 4 x taps, channel-major; empty = all zero
  BubblePolicy bubble_policy = BubblePolicy::majority;
  RateMode rate_mode = RateMode::full;
  bool ideal_comparators = false;  // instant, infinitely sensitive decisions
  double kickback_v = 1e-3;        // per-evaluation tap disturbance amplitude
  std::uint64_t kickback_seed = 0;
  double time_origin = 0.0;        // s, channel 0's first CLK1 edge relative to wave.t0
  std::size_t n_frames = 0;        // 0 = every frame the record covers

  double offset(int channel, int tap) const;
  void validate() const;
};

/// Frozen per-comparator offsets ~ N(0, sigma), 4 x taps, from `seed`.
std::vector<double> draw_offsets(std::size_t taps, double sigma, std::uint64_t seed);

/// Raw comparator-bank word. Metastable comparators read as 0 and are
/// counted in `metastable` when provided.
ThermometerWord encode_thermometer(double sample, const LadderSpec& ladder,
                                   const ComparatorParams& comp, std::span<const double> offsets,
                                   int* metastable = nullptr);

/// majority: count of set bits after majority-of-3 smoothing (rails padded
/// with 1 below, 0 above); first_zero: index of the first clear bit.
int thermometer_to_binary(const ThermometerWord& word, BubblePolicy policy);

struct AdcSample {
  double t;
  int code;
  int channel;
  ThermometerWord thermo;  // bubble-corrected
};

struct AdcResult {
  std::vector<AdcSample> samples;  // in time order
  std::size_t metastable_count = 0;
  double output_rate = 0.0;  // S/s
};

/// Single input shared by every channel (comparators sample it directly).
AdcResult adc_convert(const SampledWaveform& wave, const AdcConfig& cfg, unsigned threads = 1);

/// One held input per channel, e.g. the per-channel equalizer outputs.
AdcResult adc_convert(std::span<const SampledWaveform> channel_waves, const AdcConfig& cfg,
                      unsigned threads = 1);

/// Writes `t_s,channel,code,thermo_bits`.
void write_adc_csv(std::ostream& os, const AdcResult& result);

}  // namespace afe
