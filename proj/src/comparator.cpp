#include "afe/comparator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "afe/error.hpp"
#include "afe/parallel.hpp"
#include "afe/rng.hpp"

namespace afe {

void ComparatorParams::validate() const {
  if (!(v_min_frac > 0 && v_min_frac < 1)) throw InvalidArgument("v_min_frac must be in (0, 1)");
  if (!(c_tail > 0 && c_load > 0 && gm_eff > 0 && ts > 0))
    throw InvalidArgument("c_tail, c_load, gm_eff, ts must be positive");
  if (!(vdd > 0)) throw InvalidArgument("vdd must be positive");
  if (!(delta_v > 0)) throw InvalidArgument("delta_v must be positive");
  if (!(vcm > vth + delta_v)) throw InvalidArgument("comparator needs vcm > vth + delta_v");
  if (!(offset_sigma >= 0)) throw InvalidArgument("offset_sigma must be >= 0");
}

namespace {

double charge_ratio(const ComparatorParams& p) {
  const double ov = p.vcm - p.vth;
  return (ov - p.delta_v) / (ov + p.delta_v);
}

}  // namespace

ComparatorParams calibrated(ComparatorParams p, double gain) {
  if (!(gain > 0)) throw InvalidArgument("target gain must be positive");
  p.c_load = 1.0;  // placeholder so validate() accepts the rest
  p.validate();
  p.c_load = 2.0 * charge_ratio(p) * p.c_tail / gain;
  return p;
}

double delta_t(const ComparatorParams& p) {
  if (!(p.vcm > p.vth + p.delta_v)) throw InvalidArgument("delta_t needs vcm > vth + delta_v");
  if (!(p.k_const > 0)) throw InvalidArgument("k_const must be positive");
  const double ov = p.vcm - p.vth;
  return (p.c_tail / p.k_const) * (ov - p.delta_v) / (ov * p.delta_v);
}

double amp_gain(const ComparatorParams& p) { return 2.0 * charge_ratio(p) * p.c_tail / p.c_load; }

double amp_output(const ComparatorParams& p, double vin_diff) { return amp_gain(p) * vin_diff; }

RegenDelay regen_delay(const ComparatorParams& p, double dv_initial) {
  if (!(dv_initial > 0)) throw InvalidArgument("dv_initial must be positive");
  const double t0 = p.ts / 4.0;
  const double t_latch = std::max(0.0, p.tau() * std::log((p.vdd / 2.0) / dv_initial));
  return {t0, t_latch, t0 + t_latch};
}

ComparatorDecision evaluate(const ComparatorParams& p, double vin_diff, double offset) {
  const double eff = vin_diff + offset;
  const double swing = p.vdd - p.v_min();
  const double t0 = p.ts / 4.0;
  ComparatorDecision d;
  d.v_out_plus = d.v_out_minus = p.v_min();
  d.t_resolve = std::numeric_limits<double>::infinity();
  if (eff == 0.0) return d;

  const double dv0 = std::min(std::abs(amp_output(p, eff)), swing);
  const double t_rail = std::max(0.0, p.tau() * std::log(swing / dv0));
  const bool positive = eff > 0.0;
  if (t_rail <= p.regen_window()) {
    d.decision = positive ? Decision::plus : Decision::minus;
    (positive ? d.v_out_plus : d.v_out_minus) = p.vdd;
    d.t_resolve = t0 + std::max(0.0, p.tau() * std::log((p.vdd / 2.0) / dv0));
    return d;
  }
  // Unresolved: the leading output has only climbed part of the way.
  const double dv_end = dv0 * std::exp(p.regen_window() / p.tau());
  (positive ? d.v_out_plus : d.v_out_minus) = p.v_min() + dv_end;
  return d;
}

double min_resolvable_input(const ComparatorParams& p) {
  const double swing = p.vdd - p.v_min();
  return swing * std::exp(-p.regen_window() / p.tau()) / amp_gain(p);
}

namespace {

// +1 when the comparator output leans positive, including unresolved trajectories.
bool leans_positive(const ComparatorParams& p, double vin, double offset) {
  const auto d = evaluate(p, vin, offset);
  if (d.decision != Decision::metastable) return d.decision == Decision::plus;
  return d.v_out_plus > d.v_out_minus;
}

}  // namespace

McResult mc_offset_run(const ComparatorParams& p, std::size_t n_trials, std::uint64_t seed,
                       unsigned threads) {
  p.validate();
  if (n_trials < 100) throw InvalidArgument("mc_offset_run needs n_trials >= 100");

  McResult r;
  r.trials.resize(n_trials);
  const double range = 10.0 * p.offset_sigma + 1e-3;
  parallel_for(n_trials, threads, [&](std::size_t i) {
    auto eng = counter_engine(seed, i);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double offset = p.offset_sigma * normal(eng);
    double lo = -range - std::abs(offset);
    double hi = range + std::abs(offset);
    for (int it = 0; it < 64; ++it) {
      const double mid = 0.5 * (lo + hi);
      (leans_positive(p, mid, offset) ? hi : lo) = mid;
    }
    r.trials[i] = {offset, 0.5 * (lo + hi)};
  });

  double sum = 0.0;
  for (const auto& t : r.trials) sum += t.trip_point;
  r.mean = sum / static_cast<double>(n_trials);
  double m2 = 0.0, m3 = 0.0;
  for (const auto& t : r.trials) {
    const double d = t.trip_point - r.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  r.sigma_hat = std::sqrt(m2 / static_cast<double>(n_trials - 1));
  const double pop_var = m2 / static_cast<double>(n_trials);
  r.skewness = pop_var > 0 ? (m3 / static_cast<double>(n_trials)) / std::pow(pop_var, 1.5) : 0.0;
  return r;
}

}  // namespace afe
