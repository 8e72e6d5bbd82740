#pragma once

#include <cstdint>
#include <vector>

namespace afe {

/// Behavioural parameters of the charge-steering comparator.
///
/// Phases per clock period ts: reset (ts/2), amplification (ts/4),
/// regeneration (ts/4). The amplification gain is
///   2 (Vcm - Vth - dV)/(Vcm - Vth + dV) * C_T/C_L,
/// and calibrated() picks C_L so that gain equals 2.5.
struct ComparatorParams {
  double vdd = 1.0;
  double c_tail = 30e-15;        // F
  double c_load = 2.0 * (0.35 / 0.45) * 30e-15 / 2.5;  // F, per output; gain 2.5
  double vcm = 0.75;             // V
  double vth = 0.35;             // V
  double delta_v = 0.05;         // V
  double k_const = 0.02;         // A/V^2 (uncalibrated)
  double gm_eff = 2.5e-3;        // S, regeneration pair
  double ts = 200e-12;           // s
  double offset_sigma = 14.4e-3; // V, input referred
  double v_min_frac = 0.40;      // V_min / V_DD
  double sensitivity = 1e-3;     // V, rated minimum resolvable input

  void validate() const;
  double v_min() const { return v_min_frac * vdd; }
  double regen_window() const { return ts / 4.0; }
  double tau() const { return c_load / gm_eff; }
};

/// Design-point amplification gain.
inline constexpr double kTargetAmpGain = 2.5;

/// Returns `p` with c_load solved so the amplification gain equals `gain`.
ComparatorParams calibrated(ComparatorParams p, double gain = kTargetAmpGain);

enum class Decision : int { minus = -1, metastable = 0, plus = 1 };

struct ComparatorDecision {
  Decision decision = Decision::metastable;
  double v_out_plus = 0.0;
  double v_out_minus = 0.0;
  double t_resolve = 0.0;  // s from the start of amplification; +inf if metastable
};

/// Tail-capacitor charging time (C_T/K)(Vcm-Vth-dV)/((Vcm-Vth) dV).
double delta_t(const ComparatorParams& p);

/// Differential output at the end of amplification (linear model, |vin| <= 100 mV).
double amp_output(const ComparatorParams& p, double vin_diff);
double amp_gain(const ComparatorParams& p);

struct RegenDelay {
  double t0;
  double t_latch;
  double t_total;
};

/// t0 = ts/4, t_latch = (C_L/gm_eff) ln((VDD/2)/dv_initial), clamped at 0.
RegenDelay regen_delay(const ComparatorParams& p, double dv_initial);

/// Three-phase evaluation. The decision is resolved when the regeneration
/// trajectory dv0 exp(t gm_eff/C_L) reaches the rail swing VDD - V_min inside
/// the regeneration window; t_resolve is t0 plus the time for the difference
/// to reach VDD/2. An exactly zero effective input is metastable.
ComparatorDecision evaluate(const ComparatorParams& p, double vin_diff, double offset);

/// Smallest |input| that still resolves inside the regeneration window.
double min_resolvable_input(const ComparatorParams& p);

struct TripSample {
  double offset;
  double trip_point;
};

struct McResult {
  double sigma_hat = 0.0;
  double mean = 0.0;
  double skewness = 0.0;
  std::vector<TripSample> trials;
};

/// Monte-Carlo offset run: trial i draws offset ~ N(0, offset_sigma) from
/// its own counter-based stream, then bisects evaluate's output polarity
/// for the trip point. Results do not depend on `threads`.
McResult mc_offset_run(const ComparatorParams& p, std::size_t n_trials, std::uint64_t seed,
                       unsigned threads = 1);

}  // namespace afe
