#include <doctest.h>

#include <cmath>
#include <random>

#include "afe/comparator.hpp"
#include "afe/error.hpp"

using namespace afe;

TEST_CASE("tail charging time") {
  ComparatorParams p;
  p.c_tail = 30e-15;
  p.k_const = 1e-3;
  p.vcm = 0.75;
  p.vth = 0.35;
  p.delta_v = 0.05;
  CHECK(delta_t(p) == doctest::Approx(525e-12));
  auto q = p;
  q.c_tail *= 2;
  CHECK(delta_t(q) == doctest::Approx(2 * delta_t(p)));
  q = p;
  q.delta_v = 0.4 - 1e-9;
  CHECK(delta_t(q) < 1e-18);
  q.delta_v = 0.4;
  CHECK_THROWS_AS(delta_t(q), InvalidArgument);
}

TEST_CASE("amplification gain") {
  const ComparatorParams p = calibrated(ComparatorParams{});
  CHECK(amp_output(p, 0.0) == 0.0);
  CHECK(amp_gain(p) == doctest::Approx(2.5));
  CHECK(amp_output(p, 10e-3) == doctest::Approx(25e-3));
  CHECK(amp_gain(ComparatorParams{}) == doctest::Approx(2.5));
  CHECK(p.c_tail / p.c_load == doctest::Approx(1.607).epsilon(1e-3));

  ComparatorParams q;
  q.c_load = q.c_tail / 1.607;
  CHECK(amp_gain(q) == doctest::Approx(2.50).epsilon(1e-3));

  for (double v : {1e-3, -3e-3, 0.05, 0.1})
    for (double a : {2.0, 0.25, -4.0}) CHECK(amp_output(p, a * v) == a * amp_output(p, v));
}

TEST_CASE("regeneration delay") {
  ComparatorParams p;
  auto d = regen_delay(p, p.vdd / 2);
  CHECK(d.t_latch == 0.0);
  CHECK(d.t_total == p.ts / 4);
  CHECK(regen_delay(p, 0.8).t_latch == 0.0);

  p.c_load = 20e-15;
  p.gm_eff = 2e-3;
  p.vdd = 1.0;
  d = regen_delay(p, 25e-3);
  CHECK(d.t_latch == doctest::Approx(1e-11 * std::log(20.0)));
  CHECK(d.t_latch == doctest::Approx(29.96e-12).epsilon(1e-3));
  CHECK(regen_delay(p, 12.5e-3).t_latch - d.t_latch == doctest::Approx(1e-11 * std::log(2.0)));
  CHECK_THROWS_AS(regen_delay(p, 0.0), InvalidArgument);
}

TEST_CASE("evaluate") {
  const ComparatorParams p;
  auto d = evaluate(p, 50e-3, 0.0);
  CHECK(d.decision == Decision::plus);
  CHECK(d.v_out_plus == p.vdd);
  CHECK(d.v_out_minus == doctest::Approx(0.4 * p.vdd));

  d = evaluate(p, -50e-3, 0.0);
  CHECK(d.decision == Decision::minus);
  CHECK(d.v_out_minus == p.vdd);
  CHECK(d.v_out_plus == doctest::Approx(0.4 * p.vdd));

  d = evaluate(p, 0.0, 0.0);
  CHECK(d.decision == Decision::metastable);
  CHECK(std::isinf(d.t_resolve));

  d = evaluate(p, 1e-3, 0.0);
  CHECK(d.decision == Decision::plus);
  CHECK(d.t_resolve <= p.ts / 2);
  CHECK(min_resolvable_input(p) <= p.sensitivity);

  // Far below the sensitivity the trajectory does not reach the rails.
  d = evaluate(p, 1e-9, 0.0);
  CHECK(d.decision == Decision::metastable);
  CHECK(d.v_out_plus > d.v_out_minus);
  CHECK(d.v_out_plus < p.vdd);
}

TEST_CASE("antisymmetry and monotonicity") {
  const ComparatorParams p;
  std::mt19937_64 eng(11);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (int i = 0; i < 2000; ++i) {
    const double v = u(eng), off = 0.2 * u(eng);
    const auto a = evaluate(p, v, off).decision;
    const auto b = evaluate(p, -v, -off).decision;
    CHECK(static_cast<int>(a) == -static_cast<int>(b));
  }
  for (double off : {-0.02, 0.0, 0.013}) {
    int changes = 0;
    int prev = 0;
    for (int k = -1000; k <= 1000; ++k) {
      const int s = static_cast<int>(evaluate(p, k * 1e-4, off).decision);
      if (s == 0) continue;
      if (prev != 0 && s != prev) ++changes;
      prev = s;
    }
    CHECK(changes == 1);
  }
}

TEST_CASE("resolve time follows the closed form") {
  const ComparatorParams p;
  for (int i = 0; i < 20; ++i) {
    const double dv = 1e-3 * std::pow(400.0, i / 19.0);
    const double vin = dv / amp_gain(p);
    const auto d = evaluate(p, vin, 0.0);
    REQUIRE(d.decision == Decision::plus);
    CHECK(d.t_resolve == doctest::Approx(regen_delay(p, dv).t_total).epsilon(0.01));
  }
}

TEST_CASE("Monte-Carlo offsets") {
  ComparatorParams p;
  p.offset_sigma = 0.0;
  const auto zero = mc_offset_run(p, 200, 5);
  for (const auto& t : zero.trials) CHECK(std::abs(t.trip_point) < 1e-9);

  p.offset_sigma = 14.4e-3;
  const auto a = mc_offset_run(p, 2000, 42, 1);
  const auto b = mc_offset_run(p, 2000, 42, 3);
  REQUIRE(a.trials.size() == 2000);
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    CHECK(a.trials[i].offset == b.trials[i].offset);
    CHECK(a.trials[i].trip_point == b.trials[i].trip_point);
    CHECK(std::abs(a.trials[i].trip_point + a.trials[i].offset) < 1e-12);
  }
  CHECK(a.sigma_hat == b.sigma_hat);
  CHECK(a.sigma_hat == doctest::Approx(14.4e-3).epsilon(0.08));
  CHECK(mc_offset_run(p, 2000, 43).sigma_hat != a.sigma_hat);
  CHECK_THROWS_AS(mc_offset_run(p, 99, 1), InvalidArgument);
}
