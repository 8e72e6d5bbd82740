#pragma once

#include <complex>
#include <span>
#include <vector>

#include "afe/signal.hpp"

namespace afe {

/// Lossy backplane trace built from `n_segments` identical 1-inch sections.
///
/// Each section is a uniform RLGC line (per-inch values) followed by an
/// excess-loss factor with a skin term (dB per sqrt(Hz)) and a dielectric
/// term (dB per Hz). Source and load are terminated in sqrt(L/C) when both
/// are nonzero, otherwise 50 ohm.
struct ChannelSpec {
  int n_segments = 12;
  double r = 0.0;        // ohm/inch
  double l = 8.5e-9;     // H/inch
  double c = 3.4e-12;    // F/inch
  double g = 0.0;        // S/inch
  double skin_loss_coeff = 0.8e-5;        // dB/sqrt(Hz)/inch, scaled by calibration
  double dielectric_loss_coeff = 0.2e-10; // dB/Hz/inch, scaled by calibration

  void validate() const;
  double termination() const;
};

struct ChannelCalibration {
  ChannelSpec spec;
  double scale = 0.0;      // multiplier applied to both loss coefficients
  double achieved_db = 0;  // -20*log10|H(at_freq)|
};

/// Insertion gain 2*V_load/V_source of the terminated cascade.
std::complex<double> channel_response(const ChannelSpec& spec, double freq);
std::vector<std::complex<double>> channel_response(const ChannelSpec& spec,
                                                   std::span<const double> freqs);

inline double loss_db(std::complex<double> h) { return -20.0 * std::log10(std::abs(h)); }

/// Scales both excess-loss coefficients by one scalar (bisection) so the
/// loss at `at_freq` equals `target_loss_db` within 0.01 dB.
/// Throws CalibrationError if no scalar reaches the target.
ChannelCalibration calibrate_to_loss(const ChannelSpec& spec, double target_loss_db, double at_freq);

/// Frequency-domain filtering. The record is zero padded by the impulse
/// response support (40 dB decay) so the result is the linear, causal
/// convolution truncated to the input length; the line's propagation delay
/// is kept, so the first samples carry the start-up transient.
SampledWaveform apply_channel(const SampledWaveform& wave, const ChannelSpec& spec);

}  // namespace afe
