#include "afe/dtle.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "afe/error.hpp"

namespace afe {

void DtleParams::validate() const {
  if (!(gm > 0 && rs > 0 && cs > 0 && rd > 0 && c_load > 0))
    throw InvalidArgument("dtle gm, rs, cs, rd, c_load must be positive");
  if (!(gmb >= 0)) throw InvalidArgument("dtle gmb must be >= 0");
  if (!(track_duty > 0 && track_duty < 1)) throw InvalidArgument("dtle track_duty must be in (0, 1)");
  if (!(clk_freq > 0)) throw InvalidArgument("dtle clk_freq must be positive");
  if (!blockers_enabled && !(leakage_tau > 0))
    throw InvalidArgument("dtle leakage_tau must be positive without blockers");
}

PolesZero dtle_poles_zero(const DtleParams& p) {
  p.validate();
  const double rc = p.rs * p.cs;
  return {1.0 / rc, (1.0 + (p.gm + p.gmb) * p.rs / 2.0) / rc, 1.0 / (p.rd * p.c_load)};
}

DtleGains dtle_gains(const DtleParams& p) {
  p.validate();
  const double dc = (p.gm + p.gmb) * p.rd / (1.0 + (p.gm + p.gmb) * p.rs / 2.0);
  const double hf = p.gm * p.rd;
  return {dc, hf, hf / dc};
}

double rd_of_switch(const SwitchDevice& dev) {
  const double overdrive = std::abs(dev.vgs) - std::abs(dev.vth);
  if (!(overdrive > 0.0)) throw InvalidArgument("switch not in the linear region: |vgs| <= |vth|");
  if (!(dev.mu_cox_wl > 0.0)) throw InvalidArgument("mu_cox_wl must be positive");
  return 1.0 / (dev.mu_cox_wl * overdrive);
}

namespace {

struct Shape {
  double gain;  // DC gain
  double wz;    // effective zero
  double wp1;
  double wp2;
};

Shape shape_of(const DtleParams& p) {
  const auto pz = dtle_poles_zero(p);
  const auto g = dtle_gains(p);
  return {g.dc_gain, pz.omega_p1 / g.peaking, pz.omega_p1, pz.omega_p2};
}

}  // namespace

std::complex<double> dtle_frequency_response(const DtleParams& p, double freq,
                                             bool include_output_pole) {
  const Shape s = shape_of(p);
  const std::complex<double> jw{0.0, 2.0 * std::numbers::pi * freq};
  std::complex<double> h = s.gain * (1.0 + jw / s.wz) / (1.0 + jw / s.wp1);
  if (include_output_pole) h /= (1.0 + jw / s.wp2);
  return h;
}

bool dtle_in_hold(const DtleParams& p, double t) {
  const double period = 1.0 / p.clk_freq;
  double pos = std::fmod(t - p.clk_phase, period);
  if (pos < 0) pos += period;
  const double eps = 1e-9 * period;
  if (pos > period - eps) pos = 0.0;
  // Track covers (0, duty*T]; the instant a window opens still shows the held value.
  return !(pos > eps && pos <= p.track_duty * period + eps);
}

SampledWaveform dtle_process(const SampledWaveform& wave, const DtleParams& p) {
  p.validate();
  wave.validate();
  if (wave.sample_rate < 8.0 * p.clk_freq * (1.0 - 1e-12))
    throw InvalidArgument("dtle_process needs sample_rate >= 8 * clk_freq");

  const Shape s = shape_of(p);
  // States: x1 = lead-lag internal node, x2 = output.
  //   x1' = -wp1 x1 + u
  //   y1  = (wp1/wz)(u + (wz - wp1) x1)        (unity DC gain lead section)
  //   x2' = wp2 (gain y1 - x2)
  const double r = s.wp1 / s.wz;
  const std::array<std::array<double, 2>, 2> a{{{-s.wp1, 0.0},
                                                {s.wp2 * s.gain * r * (s.wz - s.wp1), -s.wp2}}};
  const std::array<double, 2> b{1.0, s.wp2 * s.gain * r};
  const double h = wave.dt();

  // Trapezoidal step: x+ = M (I + hA/2) x + M b h/2 (u + u+), M = (I - hA/2)^-1.
  const double m00 = 1.0 - h / 2 * a[0][0], m01 = -h / 2 * a[0][1];
  const double m10 = -h / 2 * a[1][0], m11 = 1.0 - h / 2 * a[1][1];
  const double det = m00 * m11 - m01 * m10;
  const std::array<std::array<double, 2>, 2> minv{{{m11 / det, -m01 / det}, {-m10 / det, m00 / det}}};
  const std::array<std::array<double, 2>, 2> ip{{{1.0 + h / 2 * a[0][0], h / 2 * a[0][1]},
                                                 {h / 2 * a[1][0], 1.0 + h / 2 * a[1][1]}}};
  std::array<std::array<double, 2>, 2> phi{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) phi[i][j] = minv[i][0] * ip[0][j] + minv[i][1] * ip[1][j];
  const std::array<double, 2> gam{h / 2 * (minv[0][0] * b[0] + minv[0][1] * b[1]),
                                  h / 2 * (minv[1][0] * b[0] + minv[1][1] * b[1])};
  const double droop = p.blockers_enabled ? 1.0 : std::exp(-h / p.leakage_tau);

  SampledWaveform out = wave;
  if (wave.samples.empty()) return out;
  const auto& u = wave.samples;
  double x1 = u[0] / s.wp1;
  double x2 = s.gain * u[0];
  out.samples[0] = x2;
  for (std::size_t n = 1; n < u.size(); ++n) {
    if (!dtle_in_hold(p, wave.time_at(n))) {
      const double uu = u[n - 1] + u[n];
      const double n1 = phi[0][0] * x1 + phi[0][1] * x2 + gam[0] * uu;
      const double n2 = phi[1][0] * x1 + phi[1][1] * x2 + gam[1] * uu;
      x1 = n1;
      x2 = n2;
    } else {
      x2 *= droop;
    }
    out.samples[n] = x2;
  }
  return out;
}

SampledWaveform pga(const SampledWaveform& wave, double gain, double common_mode) {
  SampledWaveform out = wave;
  for (double& v : out.samples) v *= gain;
  out.common_mode = common_mode;
  return out;
}

}  // namespace afe
