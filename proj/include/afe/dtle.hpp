#pragma once

#include <complex>

#include "afe/signal.hpp"

namespace afe {

/// Small-signal and clocking parameters of one discrete-time linear equalizer.
struct DtleParams {
  double gm = 10e-3;        // S, input pair
  double gmb = 1e-3;        // S, body transconductance
  double rs = 1818.18;      // ohm, degeneration resistor
  double cs = 109.4e-15;    // F, degeneration capacitor
  double rd = 360.0;        // ohm, clocked PMOS load (see rd_of_switch)
  double c_load = 14.7e-15; // F, output node capacitance
  double clk_freq = 5e9;    // Hz
  double clk_phase = 0.0;   // s, time of a track-window start
  double track_duty = 0.5;  // fraction of the period spent in track-and-equalize
  double leakage_tau = 1e-9;  // s, hold-mode droop; ignored with blockers
  bool blockers_enabled = true;

  void validate() const;
};

/// Linear-region PMOS switch used as the clocked load.
struct SwitchDevice {
  double mu_cox_wl = 1e-3;  // A/V^2
  double vgs = -1.2;        // V
  double vth = -0.4;        // V
};

struct PolesZero {
  double omega_z;   // rad/s
  double omega_p1;  // rad/s
  double omega_p2;  // rad/s
};

struct DtleGains {
  double dc_gain;
  double hifreq_gain;
  double peaking;  // hifreq_gain / dc_gain
};

/// omega_z = 1/(Rs Cs), omega_p1 = (1 + (gm+gmb) Rs/2)/(Rs Cs), omega_p2 = 1/(Rd C_L).
PolesZero dtle_poles_zero(const DtleParams& p);

/// dc = (gm+gmb) Rd / (1 + (gm+gmb) Rs/2), hifreq = gm Rd.
DtleGains dtle_gains(const DtleParams& p);

/// Rd = 1/(mu Cox W/L (|Vgs| - |Vth|)); throws unless |Vgs| > |Vth|.
double rd_of_switch(const SwitchDevice& dev);

/// One-zero, two-pole track-mode response
///   H(s) = dc * (1 + s/wz') / ((1 + s/wp1)(1 + s/wp2)),
/// with wz' = wp1/peaking so |H(0)| is the DC gain and the mid-band plateau
/// is the high-frequency gain. wz' == omega_z whenever gmb == 0.
/// `include_output_pole = false` drops the wp2 factor (the plateau asymptote).
std::complex<double> dtle_frequency_response(const DtleParams& p, double freq,
                                             bool include_output_pole = true);

/// Runs the equalizer clocked at clk_freq. Track windows start at
/// clk_phase + k/clk_freq and last track_duty of a period; the state is the
/// trapezoidal integration of H(s) during track and is frozen during hold
/// (blockers) or, without blockers, the output droops toward zero
/// differential with leakage_tau. Output is at the input sample rate.
SampledWaveform dtle_process(const SampledWaveform& wave, const DtleParams& p);

/// True when time t falls in a hold window of the equalizer clock.
bool dtle_in_hold(const DtleParams& p, double t);

/// Ideal programmable gain stage: v_diff *= gain, common mode forced.
SampledWaveform pga(const SampledWaveform& wave, double gain, double common_mode);

}  // namespace afe
