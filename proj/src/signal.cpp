#include "afe/signal.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include "afe/error.hpp"

namespace afe {

void SampledWaveform::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
    throw InvalidArgument("waveform sample_rate must be positive");
  for (double v : samples)
    if (!std::isfinite(v)) throw InvalidArgument("waveform contains a non-finite sample");
}

namespace {

struct LfsrTaps {
  int order;
  int tap;  // second feedback tap (1-based), the first is `order`
};

constexpr std::array<LfsrTaps, 5> kPolynomials{{{7, 6}, {9, 5}, {15, 14}, {23, 18}, {31, 28}}};

}  // namespace

BitStream gen_prbs(int order, std::uint32_t seed, std::size_t n_bits, double bit_rate) {
  int tap = 0;
  for (const auto& p : kPolynomials)
    if (p.order == order) tap = p.tap;
  if (tap == 0) throw InvalidArgument("prbs order must be one of 7, 9, 15, 23, 31");
  if (!(bit_rate > 0.0)) throw InvalidArgument("bit_rate must be positive");

  const std::uint32_t mask = (1u << order) - 1u;
  std::uint32_t state = seed & mask;
  if (state == 0) throw InvalidArgument("prbs seed must be nonzero (LFSR lock-up state)");

  BitStream out;
  out.bit_rate = bit_rate;
  out.bits.reserve(n_bits);
  for (std::size_t i = 0; i < n_bits; ++i) {
    const std::uint32_t fb = ((state >> (order - 1)) ^ (state >> (tap - 1))) & 1u;
    state = ((state << 1) | fb) & mask;
    out.bits.push_back(static_cast<std::uint8_t>(fb));
  }
  return out;
}

SampledWaveform nrz_waveform(const BitStream& bits, int samples_per_bit, double swing,
                             double common_mode, double rise_time) {
  if (samples_per_bit < 4) throw InvalidArgument("samples_per_bit must be >= 4");
  if (!(bits.bit_rate > 0.0)) throw InvalidArgument("bit_rate must be positive");
  const double ui = 1.0 / bits.bit_rate;
  if (rise_time < 0.0 || rise_time >= ui)
    throw InvalidArgument("rise_time must be in [0, bit period)");

  SampledWaveform w;
  w.sample_rate = bits.bit_rate * samples_per_bit;
  w.common_mode = common_mode;
  w.samples.resize(bits.size() * static_cast<std::size_t>(samples_per_bit));

  const auto level = [&](std::size_t b) { return bits.bits[b] ? 0.5 * swing : -0.5 * swing; };
  const double half_rise = 0.5 * rise_time;
  const std::size_t n = bits.size();
  for (std::size_t b = 0; b < n; ++b) {
    const double cur = level(b);
    for (int j = 0; j < samples_per_bit; ++j) {
      const double tau = static_cast<double>(j) / w.sample_rate;  // time since bit start
      double v = cur;
      if (rise_time > 0.0) {
        if (b > 0 && tau < half_rise) {
          const double prev = level(b - 1);
          v = prev + (cur - prev) * (tau / rise_time + 0.5);
        } else if (b + 1 < n && tau > ui - half_rise) {
          const double next = level(b + 1);
          v = cur + (next - cur) * ((tau - ui) / rise_time + 0.5);
        }
      }
      w.samples[b * static_cast<std::size_t>(samples_per_bit) + static_cast<std::size_t>(j)] = v;
    }
  }
  return w;
}

SampledWaveform gen_sine(double freq, double amplitude_diff, double common_mode,
                         double sample_rate, std::size_t n_samples) {
  if (!(sample_rate > 0.0)) throw InvalidArgument("sample_rate must be positive");
  if (!(freq >= 0.0) || freq >= 0.5 * sample_rate)
    throw InvalidArgument("sine frequency must be below sample_rate/2");
  SampledWaveform w;
  w.sample_rate = sample_rate;
  w.common_mode = common_mode;
  w.samples.resize(n_samples);
  const double cycles_per_sample = freq / sample_rate;
  for (std::size_t k = 0; k < n_samples; ++k) {
    // Reduce the phase before scaling by 2*pi so long records stay accurate.
    const double cycles = std::fmod(cycles_per_sample * static_cast<double>(k), 1.0);
    w.samples[k] = 0.5 * amplitude_diff * std::sin(2.0 * std::numbers::pi * cycles);
  }
  return w;
}

void write_waveform_csv(std::ostream& os, const SampledWaveform& wave) {
  os << "t_s,v_diff,v_cm\n";
  char buf[96];
  for (std::size_t k = 0; k < wave.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", wave.time_at(k), wave.samples[k],
                  wave.common_mode);
    os << buf;
  }
}

}  // namespace afe
