#include "afe/flash_adc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "afe/error.hpp"
#include "afe/parallel.hpp"
#include "afe/rng.hpp"

namespace afe {

LadderSpec build_ladder(double full_scale_diff, int n_bits) {
  if (n_bits < 1 || n_bits > 6) throw InvalidArgument("ladder n_bits must be in [1, 6]");
  if (!(full_scale_diff > 0)) throw InvalidArgument("ladder full scale must be positive");
  LadderSpec l;
  l.full_scale_diff = full_scale_diff;
  l.n_bits = n_bits;
  const int taps = (1 << n_bits) - 1;
  const double step = full_scale_diff / static_cast<double>(1 << n_bits);
  for (int i = 0; i < taps; ++i)
    l.tap_voltages.push_back(-full_scale_diff / 2.0 + static_cast<double>(i + 1) * step);
  return l;
}

int ThermometerWord::popcount() const { return std::popcount(bits); }

bool ThermometerWord::monotonic() const {
  bool seen_zero = false;
  for (int i = 0; i < width; ++i) {
    if (!test(i)) seen_zero = true;
    else if (seen_zero) return false;
  }
  return true;
}

std::string ThermometerWord::to_string() const {
  std::string s(static_cast<std::size_t>(width), '0');
  for (int i = 0; i < width; ++i)
    if (test(i)) s[static_cast<std::size_t>(width - 1 - i)] = '1';
  return s;
}

ThermometerWord ThermometerWord::from_string(const std::string& msb_first) {
  ThermometerWord w;
  w.width = static_cast<int>(msb_first.size());
  if (w.width > 63) throw InvalidArgument("thermometer word wider than 63 bits");
  for (int i = 0; i < w.width; ++i) {
    const char c = msb_first[static_cast<std::size_t>(w.width - 1 - i)];
    if (c != '0' && c != '1') throw InvalidArgument("thermometer string must be 0/1");
    w.set(i, c == '1');
  }
  return w;
}

ThermometerWord ThermometerWord::of_code(int code, int width) {
  ThermometerWord w;
  w.width = width;
  w.bits = code <= 0 ? 0 : (code >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << code) - 1));
  if (width < 64) w.bits &= (std::uint64_t{1} << width) - 1;
  return w;
}

double ClockWave::duty() const { return high_slots / 4.0; }

bool ClockWave::high_at(double t) const {
  double pos = std::fmod(t - rise, period);
  if (pos < 0) pos += period;
  double high = fall - rise;
  if (high <= 0) high += period;
  return pos < high;
}

namespace {

using Slots = std::array<bool, 4>;

ClockWave wave_of(const Slots& s, int origin_slot, double slot) {
  ClockWave w;
  w.period = 4.0 * slot;
  for (int i = 0; i < 4; ++i) {
    w.high_slots += s[static_cast<std::size_t>(i)];
    const int rel = ((i - origin_slot) % 4 + 4) % 4;
    if (s[static_cast<std::size_t>(i)] && !s[static_cast<std::size_t>((i + 3) % 4)])
      w.rise = rel * slot;
    if (!s[static_cast<std::size_t>(i)] && s[static_cast<std::size_t>((i + 3) % 4)])
      w.fall = rel * slot;
  }
  return w;
}

}  // namespace

ClockPhaseSchedule gen_clock_phases(double input_clk) {
  if (!(input_clk > 0)) throw InvalidArgument("input clock must be positive");
  const double slot = 0.5 / input_clk;  // half period of the input clock

  // Master latch transparent while the input is high (d = !slave), slave
  // transparent while low (d = master). Run two frames to flush the reset state.
  bool master = false, slave = false;
  Slots in_phase{}, quadrature{};
  for (int s = 0; s < 8; ++s) {
    if (s % 2 == 0) master = !slave;
    else slave = master;
    if (s >= 4) {
      in_phase[static_cast<std::size_t>(s - 4)] = master;
      quadrature[static_cast<std::size_t>(s - 4)] = slave;
    }
  }
  std::array<Slots, 4> phase{};
  phase[0] = in_phase;
  phase[1] = quadrature;
  for (std::size_t i = 0; i < 4; ++i) {
    phase[2][i] = !in_phase[i];
    phase[3][i] = !quadrature[i];
  }

  ClockPhaseSchedule sch;
  sch.input_clk = input_clk;
  sch.frame_period = 4.0 * slot;
  for (int c = 0; c < 4; ++c) {
    const auto& p1 = phase[static_cast<std::size_t>((c + 1) % 4)];
    const auto& p2 = phase[static_cast<std::size_t>((c + 2) % 4)];
    const auto& p3 = phase[static_cast<std::size_t>((c + 3) % 4)];
    Slots clk1{}, clk3{};
    for (std::size_t i = 0; i < 4; ++i) {
      clk1[i] = p1[i] && p2[i];
      clk3[i] = !(p2[i] && p3[i]);
    }
    auto& ch = sch.channels[static_cast<std::size_t>(c)];
    ch.offset = c * slot;
    ch.clk1 = wave_of(clk1, c, slot);
    ch.clk2 = wave_of(phase[static_cast<std::size_t>(c)], c, slot);
    ch.clk3 = wave_of(clk3, c, slot);
  }
  return sch;
}

std::string to_string(BubblePolicy p) { return p == BubblePolicy::majority ? "majority" : "first-zero"; }

std::string to_string(RateMode m) {
  switch (m) {
    case RateMode::full: return "full";
    case RateMode::half: return "half";
    case RateMode::quarter: return "quarter";
  }
  return "full";
}

double AdcConfig::offset(int channel, int tap) const {
  if (offsets.empty()) return 0.0;
  return offsets[static_cast<std::size_t>(channel) * ladder.tap_count() + static_cast<std::size_t>(tap)];
}

void AdcConfig::validate() const {
  if (ladder.tap_voltages.empty()) throw InvalidArgument("ladder has no taps");
  if (!offsets.empty() && offsets.size() != 4 * ladder.tap_count())
    throw InvalidArgument("offsets must hold 4 x tap_count entries");
  if (!(kickback_v >= 0)) throw InvalidArgument("kickback must be >= 0");
  if (!ideal_comparators) comparator.validate();
}

std::vector<double> draw_offsets(std::size_t taps, double sigma, std::uint64_t seed) {
  std::vector<double> out(4 * taps);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto eng = counter_engine(seed, i);
    std::normal_distribution<double> normal(0.0, 1.0);
    out[i] = sigma * normal(eng);
  }
  return out;
}

namespace {

Decision decide(const ComparatorParams& comp, bool ideal, double vin, double offset) {
  if (ideal) {
    const double eff = vin + offset;
    return eff > 0 ? Decision::plus : (eff < 0 ? Decision::minus : Decision::metastable);
  }
  return evaluate(comp, vin, offset).decision;
}

template <class TapFn>
ThermometerWord encode(double sample, std::size_t taps, TapFn&& tap_at, const ComparatorParams& comp,
                       bool ideal, std::span<const double> offsets, int* metastable) {
  ThermometerWord w;
  w.width = static_cast<int>(taps);
  for (std::size_t i = 0; i < taps; ++i) {
    const double off = offsets.empty() ? 0.0 : offsets[i];
    const Decision d = decide(comp, ideal, sample - tap_at(i), off);
    if (d == Decision::metastable && metastable) ++*metastable;
    w.set(static_cast<int>(i), d == Decision::plus);
  }
  return w;
}

}  // namespace

ThermometerWord encode_thermometer(double sample, const LadderSpec& ladder,
                                   const ComparatorParams& comp, std::span<const double> offsets,
                                   int* metastable) {
  if (offsets.size() != ladder.tap_count())
    throw InvalidArgument("encode_thermometer: offsets length must equal tap count");
  return encode(
      sample, ladder.tap_count(), [&](std::size_t i) { return ladder.tap_voltages[i]; }, comp, false,
      offsets, metastable);
}

int thermometer_to_binary(const ThermometerWord& word, BubblePolicy policy) {
  const int n = word.width;
  if (policy == BubblePolicy::first_zero) {
    for (int i = 0; i < n; ++i)
      if (!word.test(i)) return i;
    return n;
  }
  auto bit = [&](int i) { return i < 0 ? true : (i >= n ? false : word.test(i)); };
  int count = 0;
  for (int i = 0; i < n; ++i) {
    const int votes = int(bit(i - 1)) + int(bit(i)) + int(bit(i + 1));
    count += votes >= 2 ? 1 : 0;
  }
  return count;
}

namespace {

std::vector<int> active_channels(RateMode m) {
  switch (m) {
    case RateMode::full: return {0, 1, 2, 3};
    case RateMode::half: return {0, 2};
    case RateMode::quarter: return {0};
  }
  return {0, 1, 2, 3};
}

double value_at(const SampledWaveform& w, double t) {
  const double pos = (t - w.t0) * w.sample_rate;
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) < 1e-6) return w.samples[static_cast<std::size_t>(nearest)];
  const auto k = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(k);
  return w.samples[k] + frac * (w.samples[k + 1] - w.samples[k]);
}

double kick(std::uint64_t seed, int channel, std::size_t frame, std::size_t tap, double amplitude) {
  if (amplitude == 0.0) return 0.0;
  const std::uint64_t key = (std::uint64_t(channel) << 58) ^ (std::uint64_t(frame) << 6) ^ tap;
  return (mix64(seed ^ mix64(key)) & 1u) ? amplitude : -amplitude;
}

}  // namespace

AdcResult adc_convert(std::span<const SampledWaveform> channel_waves, const AdcConfig& cfg,
                      unsigned threads) {
  cfg.validate();
  if (channel_waves.size() != 4) throw InvalidArgument("adc_convert needs one waveform per channel");
  for (const auto& w : channel_waves) {
    w.validate();
    if (w.samples.empty()) throw InvalidArgument("adc_convert: empty waveform");
  }

  const auto channels = active_channels(cfg.rate_mode);
  const double frame = cfg.schedule.frame_period;
  const double first = cfg.schedule.channels[0].sample_instant();

  // Frames covered by every active channel's record.
  std::size_t frames_fit = 0;
  bool any = true;
  for (int c : channels) {
    const auto& w = channel_waves[static_cast<std::size_t>(c)];
    const double start = w.t0 + cfg.time_origin + cfg.schedule.channels[static_cast<std::size_t>(c)].sample_instant() - first;
    const double end = w.time_at(w.size() - 1) + 1e-6 / w.sample_rate;
    if (start < w.t0 - 1e-6 / w.sample_rate || start > end) {
      any = false;
      break;
    }
    const auto fit = static_cast<std::size_t>(std::floor((end - start) / frame)) + 1;
    frames_fit = (c == channels.front()) ? fit : std::min(frames_fit, fit);
  }
  if (!any || frames_fit == 0) throw InvalidArgument("adc_convert: waveform shorter than the clock schedule");
  if (cfg.n_frames > frames_fit) throw InvalidArgument("adc_convert: waveform shorter than the clock schedule");
  const std::size_t frames = cfg.n_frames ? cfg.n_frames : frames_fit;

  const std::size_t taps = cfg.ladder.tap_count();
  std::vector<std::vector<AdcSample>> per_channel(channels.size());
  std::vector<std::size_t> meta(channels.size(), 0);
  parallel_for(channels.size(), threads, [&](std::size_t idx) {
    const int c = channels[idx];
    const auto& w = channel_waves[static_cast<std::size_t>(c)];
    const double start = w.t0 + cfg.time_origin + cfg.schedule.channels[static_cast<std::size_t>(c)].sample_instant() - first;
    std::span<const double> offs;
    if (!cfg.offsets.empty()) offs = std::span<const double>(cfg.offsets).subspan(static_cast<std::size_t>(c) * taps, taps);
    auto& out = per_channel[idx];
    out.reserve(frames);
    for (std::size_t k = 0; k < frames; ++k) {
      const double t = start + static_cast<double>(k) * frame;
      const double v = value_at(w, t);
      int m = 0;
      const auto raw = encode(
          v, taps,
          [&](std::size_t i) { return cfg.ladder.tap_voltages[i] + kick(cfg.kickback_seed, c, k, i, cfg.kickback_v); },
          cfg.comparator, cfg.ideal_comparators, offs, &m);
      meta[idx] += static_cast<std::size_t>(m);
      const int code = thermometer_to_binary(raw, cfg.bubble_policy);
      out.push_back({t, code, c, ThermometerWord::of_code(code, static_cast<int>(taps))});
    }
  });

  AdcResult r;
  r.output_rate = static_cast<double>(channels.size()) / frame;
  for (std::size_t i = 0; i < channels.size(); ++i) r.metastable_count += meta[i];
  r.samples.reserve(frames * channels.size());
  for (std::size_t k = 0; k < frames; ++k)
    for (std::size_t i = 0; i < channels.size(); ++i) r.samples.push_back(per_channel[i][k]);
  return r;
}

AdcResult adc_convert(const SampledWaveform& wave, const AdcConfig& cfg, unsigned threads) {
  const std::array<SampledWaveform, 4> waves{wave, wave, wave, wave};
  return adc_convert(std::span<const SampledWaveform>(waves), cfg, threads);
}

void write_adc_csv(std::ostream& os, const AdcResult& result) {
  os << "t_s,channel,code,thermo_bits\n";
  char buf[64];
  for (const auto& s : result.samples) {
    std::snprintf(buf, sizeof buf, "%.17g,", s.t);
    os << buf << s.channel << ',' << s.code << ',' << s.thermo.to_string() << '\n';
  }
}

}  // namespace afe
