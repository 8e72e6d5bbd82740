#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace afe {

/// Uniformly sampled differential voltage record.
///
/// Only the differential value is stored; the single-ended legs are
/// common_mode +/- v/2 and are derived on demand.
struct SampledWaveform {
  std::vector<double> samples;  // V, differential
  double sample_rate = 1.0;     // Hz
  double common_mode = 0.0;     // V
  double t0 = 0.0;              // s, time of samples[0]

  std::size_t size() const { return samples.size(); }
  double dt() const { return 1.0 / sample_rate; }
  double time_at(std::size_t k) const { return t0 + static_cast<double>(k) / sample_rate; }
  double positive_leg(std::size_t k) const { return common_mode + 0.5 * samples[k]; }
  double negative_leg(std::size_t k) const { return common_mode - 0.5 * samples[k]; }

  // Throws InvalidArgument unless sample_rate > 0 and every sample is finite.
  void validate() const;
};

struct BitStream {
  std::vector<std::uint8_t> bits;  // each 0 or 1
  double bit_rate = 1.0;           // bit/s

  std::size_t size() const { return bits.size(); }
};

/// Maximal-length PRBS from a Fibonacci LFSR with the usual ITU/OIF
/// polynomials: x^7+x^6+1, x^9+x^5+1, x^15+x^14+1, x^23+x^18+1, x^31+x^28+1.
/// The seed is masked to `order` bits and must leave a nonzero state.
BitStream gen_prbs(int order, std::uint32_t seed, std::size_t n_bits, double bit_rate = 20e9);

/// Differential NRZ: bit 1 -> +swing/2, bit 0 -> -swing/2, linear edges of
/// `rise_time` centred on each bit boundary.
SampledWaveform nrz_waveform(const BitStream& bits, int samples_per_bit, double swing,
                             double common_mode, double rise_time);

/// samples[k] = (amplitude_diff/2) * sin(2*pi*freq*k/sample_rate).
SampledWaveform gen_sine(double freq, double amplitude_diff, double common_mode,
                         double sample_rate, std::size_t n_samples);

/// Writes `t_s,v_diff,v_cm`, one row per sample, 17 significant digits.
void write_waveform_csv(std::ostream& os, const SampledWaveform& wave);

}  // namespace afe
