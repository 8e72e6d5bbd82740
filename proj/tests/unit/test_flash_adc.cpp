#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "afe/error.hpp"
#include "afe/flash_adc.hpp"

using namespace afe;

namespace {

// Direct threshold comparison against independently computed midpoints.
int oracle_code(double v, double fs_diff, int n_bits) {
  const int levels = 1 << n_bits;
  int code = 0;
  for (int i = 0; i < levels - 1; ++i)
    if (v > -fs_diff / 2 + (i + 1) * fs_diff / levels) ++code;
  return code;
}

AdcConfig ideal_config() {
  AdcConfig c;
  c.ideal_comparators = true;
  c.kickback_v = 0.0;
  return c;
}

SampledWaveform ramp(double lo, double hi, double fs, std::size_t n) {
  SampledWaveform w;
  w.sample_rate = fs;
  w.common_mode = 0.75;
  for (std::size_t k = 0; k < n; ++k) w.samples.push_back(lo + (hi - lo) * k / (n - 1));
  return w;
}

}  // namespace

TEST_CASE("ladder") {
  const auto l = build_ladder(0.6, 4);
  REQUIRE(l.tap_count() == 15);
  CHECK(l.tap_voltages.front() == doctest::Approx(-0.2625));
  CHECK(l.tap_voltages.back() == doctest::Approx(0.2625));
  for (std::size_t i = 1; i < 15; ++i) CHECK(l.tap_voltages[i] - l.tap_voltages[i - 1] == doctest::Approx(0.0375));
  for (std::size_t i = 0; i < 15; ++i) CHECK(l.tap_voltages[i] == doctest::Approx(-l.tap_voltages[14 - i]));
  const auto one = build_ladder(0.6, 1);
  REQUIRE(one.tap_count() == 1);
  CHECK(one.tap_voltages[0] == doctest::Approx(0.0));
  CHECK_THROWS_AS(build_ladder(0.6, 0), InvalidArgument);
}

TEST_CASE("clock phases") {
  const auto s = gen_clock_phases(10e9);
  CHECK(s.frame_period == doctest::Approx(200e-12));
  std::vector<double> instants;
  for (int c = 0; c < 4; ++c) {
    const auto& ch = s.channels[c];
    CHECK(ch.offset == doctest::Approx(c * 50e-12));
    CHECK(ch.clk1.duty() == 0.25);
    CHECK(ch.clk2.duty() == 0.5);
    CHECK(ch.clk3.duty() == 0.75);
    CHECK(ch.clk1.period == doctest::Approx(200e-12));
    // Amplification follows reset; CLK3 drops for regeneration right after.
    CHECK(ch.clk1.rise == doctest::Approx(ch.clk2.fall));
    CHECK(std::fmod(ch.clk3.fall - ch.clk1.fall + 1e-9, s.frame_period) == doctest::Approx(1e-9));
    for (int k = 0; k < 5; ++k) instants.push_back(ch.sample_instant() + k * s.frame_period);
  }
  std::sort(instants.begin(), instants.end());
  for (std::size_t i = 1; i < instants.size(); ++i) CHECK(instants[i] - instants[i - 1] == doctest::Approx(50e-12));

  // Edge-time arithmetic: sampled high fraction of CLK3 over a frame.
  const auto& c3 = s.channels[2].clk3;
  int high = 0;
  for (int i = 0; i < 4000; ++i) high += c3.high_at((i + 0.5) * c3.period / 4000) ? 1 : 0;
  CHECK(high == 3000);
}

TEST_CASE("thermometer encode") {
  const auto l = build_ladder();
  const ComparatorParams comp;
  const std::vector<double> zero(15, 0.0);
  CHECK(encode_thermometer(0.3, l, comp, zero).popcount() == 15);
  const auto mid = encode_thermometer(0.0, l, comp, zero);
  CHECK(mid.to_string() == "000000001111111");
  CHECK(encode_thermometer(-0.6, l, comp, zero).popcount() == 0);
  int meta = 0;
  const auto on_tap = encode_thermometer(l.tap_voltages[3], l, comp, zero, &meta);
  CHECK(meta == 1);
  CHECK(on_tap.popcount() == 3);
  CHECK_THROWS_AS(encode_thermometer(0.0, l, comp, std::vector<double>(3, 0.0)), InvalidArgument);
}

TEST_CASE("thermometer to binary") {
  using W = ThermometerWord;
  CHECK(thermometer_to_binary(W::from_string("000000011111111"), BubblePolicy::majority) == 8);
  CHECK(thermometer_to_binary(W::from_string("000000011111111"), BubblePolicy::first_zero) == 8);
  CHECK(thermometer_to_binary(W::from_string("000000000101111"), BubblePolicy::majority) == 5);
  CHECK(thermometer_to_binary(W::from_string("000000000101111"), BubblePolicy::first_zero) == 4);
  CHECK(thermometer_to_binary(W::from_string("000000000000000"), BubblePolicy::majority) == 0);
  CHECK(thermometer_to_binary(W::from_string("111111111111111"), BubblePolicy::majority) == 15);
  CHECK(thermometer_to_binary(W::from_string("111111111111111"), BubblePolicy::first_zero) == 15);
  CHECK(W::from_string("000000000101111").to_string() == "000000000101111");
  CHECK_FALSE(W::from_string("000000000101111").monotonic());
  for (int c = 0; c <= 15; ++c) {
    const auto w = W::of_code(c, 15);
    CHECK(w.monotonic());
    CHECK(thermometer_to_binary(w, BubblePolicy::majority) == c);
    CHECK(thermometer_to_binary(w, BubblePolicy::first_zero) == c);
  }
}

TEST_CASE("zero-offset conversion equals the direct quantizer") {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  SampledWaveform w;
  w.sample_rate = 20e9;
  for (int k = 0; k < 20000; ++k) w.samples.push_back(u(eng));
  for (bool ideal : {true, false}) {
    AdcConfig cfg = ideal_config();
    cfg.ideal_comparators = ideal;
    const auto r = adc_convert(w, cfg);
    REQUIRE(r.samples.size() == 20000);
    const double band = min_resolvable_input(cfg.comparator);
    const auto taps = build_ladder().tap_voltages;
    std::size_t bad = 0, outside_band = 0;
    for (std::size_t k = 0; k < r.samples.size(); ++k) {
      const auto& s = r.samples[k];
      CHECK(s.t == doctest::Approx(k * 50e-12));
      CHECK(s.channel == static_cast<int>(k % 4));
      if (s.code == oracle_code(w.samples[k], 0.6, 4)) continue;
      ++bad;
      double nearest = 1e9;
      for (double t : taps) nearest = std::min(nearest, std::abs(w.samples[k] - t));
      outside_band += nearest > band;
    }
    // Behavioural comparators only disagree inside their sensitivity band.
    if (ideal) CHECK(bad == 0);
    CHECK(outside_band == 0);
  }
}

TEST_CASE("slow ramp and transfer function") {
  const auto w = ramp(-0.35, 0.35, 20e9, 7001);
  const auto r = adc_convert(w, ideal_config());
  std::set<int> seen;
  int prev = -1, transitions = 0;
  const auto l = build_ladder();
  for (std::size_t k = 0; k < r.samples.size(); ++k) {
    const int c = r.samples[k].code;
    CHECK(c >= prev);
    if (prev >= 0 && c != prev) {
      ++transitions;
      const double v_before = w.samples[k - 1], v_after = w.samples[k];
      CHECK(l.tap_voltages[static_cast<std::size_t>(c - 1)] >= v_before);
      CHECK(l.tap_voltages[static_cast<std::size_t>(c - 1)] < v_after);
    }
    prev = c;
    seen.insert(c);
    CHECK(r.samples[k].thermo.monotonic());
  }
  CHECK(seen.size() == 16);
  CHECK(transitions == 15);
}

TEST_CASE("rate modes and interleaving equivalence") {
  std::mt19937_64 eng(9);
  std::uniform_real_distribution<double> u(-0.35, 0.35);
  SampledWaveform w;
  w.sample_rate = 80e9;
  for (int k = 0; k < 8000; ++k) w.samples.push_back(u(eng));

  AdcConfig full = ideal_config();
  full.ideal_comparators = false;
  full.kickback_v = 0.0;
  const auto rf = adc_convert(w, full, 4);
  CHECK(rf.output_rate == doctest::Approx(20e9));

  AdcConfig half = full;
  half.rate_mode = RateMode::half;
  const auto rh = adc_convert(w, half);
  CHECK(rh.output_rate == doctest::Approx(10e9));
  for (const auto& s : rh.samples) CHECK((s.channel == 0 || s.channel == 2));

  AdcConfig quarter = full;
  quarter.rate_mode = RateMode::quarter;
  const auto rq = adc_convert(w, quarter);
  CHECK(rq.output_rate == doctest::Approx(5e9));
  for (const auto& s : rq.samples) CHECK(s.channel == 0);
  for (std::size_t k = 1; k < rq.samples.size(); ++k) CHECK(rq.samples[k].t - rq.samples[k - 1].t == doctest::Approx(200e-12));

  // Channel c of the full-rate run equals channel 0 of a quarter-rate run
  // whose record starts c slots later.
  for (int c = 0; c < 4; ++c) {
    SampledWaveform shifted = w;
    shifted.samples.erase(shifted.samples.begin(), shifted.samples.begin() + 4 * c);
    shifted.t0 = w.t0 + c * 50e-12;
    AdcConfig q = quarter;
    std::vector<AdcSample> own;
    for (const auto& s : rf.samples)
      if (s.channel == c) own.push_back(s);
    q.n_frames = own.size();
    const auto rc = adc_convert(shifted, q);
    REQUIRE(rc.samples.size() == own.size());
    for (std::size_t k = 0; k < own.size(); ++k) CHECK(rc.samples[k].code == own[k].code);
    for (std::size_t k = 0; k < own.size(); ++k) CHECK(rc.samples[k].t == doctest::Approx(own[k].t));
  }
  // Kick-back streams are per channel; channel 0 still matches.
  full.kickback_v = 1e-3;
  full.kickback_seed = 77;
  quarter.kickback_v = 1e-3;
  quarter.kickback_seed = 77;
  const auto kf = adc_convert(w, full);
  const auto kq = adc_convert(w, quarter);
  for (std::size_t k = 0; k < kq.samples.size(); ++k) CHECK(kq.samples[k].code == kf.samples[4 * k].code);
  CHECK_THROWS_AS(adc_convert(SampledWaveform{{}, 1e9, 0, 0}, full), InvalidArgument);
}

TEST_CASE("offsets and metastability accounting") {
  AdcConfig cfg;
  cfg.offsets = draw_offsets(15, 14.4e-3, 1234);
  CHECK(cfg.offsets == draw_offsets(15, 14.4e-3, 1234));
  CHECK(cfg.offsets != draw_offsets(15, 14.4e-3, 1235));
  CHECK(cfg.offset(2, 5) == cfg.offsets[2 * 15 + 5]);
  cfg.offsets.pop_back();
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);

  std::ostringstream os;
  AdcResult r;
  r.samples.push_back({1e-10, 3, 2, ThermometerWord::of_code(3, 15)});
  write_adc_csv(os, r);
  CHECK(os.str() == "t_s,channel,code,thermo_bits\n1e-10,2,3,000000000000111\n");
}
