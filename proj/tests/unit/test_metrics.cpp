#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "afe/channel.hpp"
#include "afe/error.hpp"
#include "afe/metrics.hpp"
#include "afe/signal.hpp"

using namespace afe;

namespace {

// Uniform mid-rise quantizer by direct threshold comparison.
int quantize(double v, const std::vector<double>& thresholds) {
  int c = 0;
  for (double t : thresholds) c += v > t ? 1 : 0;
  return c;
}

std::vector<double> ideal_thresholds(double fs_diff = 0.6, int bits = 4) {
  std::vector<double> t;
  const int levels = 1 << bits;
  for (int i = 1; i < levels; ++i) t.push_back(-fs_diff / 2 + i * fs_diff / levels);
  return t;
}

std::vector<int> quantized_sine(std::size_t n, std::size_t m, double peak, const std::vector<double>& th,
                                double phase = 0.123) {
  std::vector<int> codes(n);
  for (std::size_t k = 0; k < n; ++k)
    codes[k] = quantize(peak * std::sin(2 * M_PI * double(m) * double(k) / double(n) + phase), th);
  return codes;
}

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("Parseval") {
  std::mt19937_64 eng(1);
  std::normal_distribution<double> g(0.0, 0.3);
  for (std::size_t n : {1024u, 4096u, 1000u}) {
    std::vector<double> x(n);
    for (double& v : x) v = g(eng) + 0.05;
    const auto p = power_spectrum(x);
    const double time_power = std::inner_product(x.begin(), x.end(), x.begin(), 0.0) / double(n);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(time_power).epsilon(1e-6));
  }
}

TEST_CASE("coherent bins") {
  const std::size_t m = coherent_bin(9.84e9, 20e9, 4096);
  CHECK(m % 2 == 1);
  CHECK(std::gcd(m, std::size_t{4096}) == 1);
  CHECK(std::abs(double(m) * 20e9 / 4096 - 9.84e9) <= 2 * 20e9 / 4096);
  CHECK(coherent_bin(2.0e9, 20e9, 1000) % 5 != 0);
}

TEST_CASE("ideal 4-bit quantizer SNDR") {
  const std::size_t n = 4096;
  const std::size_t m = coherent_bin(9.84e9, 20e9, n);
  const auto codes = quantized_sine(n, m, 0.3, ideal_thresholds());
  const auto r = spectral_metrics(codes, 20e9, double(m) * 20e9 / n, n);
  CHECK(r.sndr_db == doctest::Approx(25.84).epsilon(0.3 / 25.84));
  CHECK(r.enob == doctest::Approx(4.0).epsilon(0.05 / 4.0));
  CHECK(r.signal_bin == m);
  CHECK(r.power_dbc[m] == doctest::Approx(0.0));
  CHECK(r.sfdr_db > r.sndr_db);

  const auto bh = spectral_metrics(codes, 20e9, double(m) * 20e9 / n, n, 0.6, 4, Window::blackman_harris7);
  CHECK(bh.sndr_db == doctest::Approx(r.sndr_db).epsilon(1.0 / 25.0));
}

TEST_CASE("ENOB identity") {
  CHECK(enob_from_sndr(23.86) == doctest::Approx(3.67).epsilon(0.01 / 3.67));
  CHECK(enob_from_sndr(6.02 * 4 + 1.76) == doctest::Approx(4.0));
  MetricsReport rep;
  rep.sndr_db = 23.86;
  rep.enob = enob_from_sndr(23.86);
  CHECK_NOTHROW(rep.check());
  rep.enob += 1e-9;
  CHECK_THROWS(rep.check());
}

TEST_CASE("constructed spur sets SFDR") {
  const std::size_t n = 4096;
  const double fs = 20e9;
  const std::size_t m = 1001, spur_bin = 1503;
  const double a = 0.3, b = a * std::pow(10.0, -33.58 / 20.0);
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k)
    x[k] = a * std::sin(2 * M_PI * double(m * k) / n) + b * std::cos(2 * M_PI * double(spur_bin * k) / n);
  const auto r = spectral_metrics_volts(x, fs, double(m) * fs / n, n);
  CHECK(r.sfdr_db == doctest::Approx(33.58).epsilon(0.1 / 33.58));
  CHECK(r.sndr_db == doctest::Approx(33.58).epsilon(0.1 / 33.58));
  CHECK(r.power_dbc[spur_bin] == doctest::Approx(-33.58).epsilon(1e-6));
}

TEST_CASE("non-coherent input needs the window") {
  const std::size_t n = 4096;
  const double fs = 20e9, fin = 4.84e9;
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = 0.3 * std::sin(2 * M_PI * fin * double(k) / fs);
  CHECK_THROWS_AS(spectral_metrics_volts(x, fs, fin, n), InvalidArgument);
  CHECK_THROWS_AS(spectral_metrics_volts(x, fs, 2.0 * fs / n, n), InvalidArgument);  // even bin
  const auto r = spectral_metrics_volts(x, fs, fin, n, Window::blackman_harris7);
  CHECK(r.sndr_db > 100.0);
}

TEST_CASE("sine-histogram DNL/INL") {
  const std::size_t n = 1 << 17;
  const std::size_t m = coherent_bin(0.0987 * 20e9, 20e9, n);
  auto th = ideal_thresholds();
  const double peak = 0.3 * 1.02;
  const auto ideal = dnl_inl(quantized_sine(n, m, peak, th), 4);
  REQUIRE(ideal.dnl.size() == 15);
  REQUIRE(ideal.inl.size() == 16);
  CHECK(max_abs(ideal.dnl) < 0.05);
  CHECK(max_abs(ideal.inl) < 0.05);
  CHECK(std::accumulate(ideal.dnl.begin(), ideal.dnl.end(), 0.0) == doctest::Approx(0.0).epsilon(0.01));

  // Transition 8 (threshold index 7) moves up half an LSB: code 7 widens,
  // code 8 narrows.
  auto shifted = th;
  shifted[7] += 0.5 * 0.0375;
  const auto s = dnl_inl(quantized_sine(n, m, peak, shifted), 4);
  CHECK(s.dnl[7] == doctest::Approx(0.5).epsilon(0.1));
  CHECK(s.dnl[8] == doctest::Approx(-0.5).epsilon(0.1));
  CHECK(s.inl[8] == doctest::Approx(0.5).epsilon(0.1));
  CHECK(std::abs(std::accumulate(s.dnl.begin(), s.dnl.end(), 0.0)) < 0.01);

  std::mt19937_64 eng(5);
  std::normal_distribution<double> g(0.0, 14.4e-3);
  auto offset = th;
  for (double& t : offset) t += g(eng);
  std::sort(offset.begin(), offset.end());
  const auto o = dnl_inl(quantized_sine(n, m, peak, offset), 4);
  CHECK(max_abs(o.inl) > max_abs(ideal.inl));

  CHECK_THROWS_AS(dnl_inl(std::vector<int>{}, 4), InvalidArgument);
  CHECK_THROWS_AS(dnl_inl(quantized_sine(n, m, 0.2, th), 4), InvalidArgument);  // rails missing
  CHECK_THROWS_AS(dnl_inl(quantized_sine(1000, 7, peak, th), 4), InvalidArgument);
}

TEST_CASE("power ledger") {
  PowerLedger l;
  l.adc["ladder"] = 200e-6;
  l.adc["comparators"] = 60 * 189e-6;
  l.adc["clock_buffers"] = 4 * 1e-3;
  CHECK(60 * 189e-6 == doctest::Approx(11.34e-3).epsilon(1e-12));
  const auto r = power_fom(l, 20e9, 3.67, 20e9);
  CHECK(r.power_total == doctest::Approx(15.54e-3).epsilon(1e-12));
  CHECK(round_sig(r.power_total, 3) == doctest::Approx(15.5e-3).epsilon(1e-12));

  PowerLedger p155;
  p155.adc["adc"] = 15.5e-3;
  CHECK(power_fom(p155, 20e9, 3.67, 20e9).fomw == doctest::Approx(60.8e-15).epsilon(0.005));
  p155.front_end["dtle"] = 4 * 0.57e-3;
  const auto e = power_fom(p155, 20e9, 3.67, 20e9);
  CHECK(e.power_total == doctest::Approx(15.5e-3));
  CHECK(e.energy_per_bit == doctest::Approx(0.889e-12).epsilon(0.005));
  CHECK((15.5e-3 + 4 * 0.57e-3) == doctest::Approx(17.78e-3).epsilon(1e-12));

  p155.adc["bad"] = -1;
  CHECK_THROWS_AS(power_fom(p155, 20e9, 3.67, 20e9), InvalidArgument);
}

TEST_CASE("eye diagram") {
  const auto bits = gen_prbs(7, 0x7F, 400);
  const auto w = nrz_waveform(bits, 16, 1.0, 0.6, 10e-12);
  const double ui = 50e-12;
  const auto plain = eye_diagram(w, ui, 0.5 * ui);
  CHECK(plain.vertical_opening == doctest::Approx(1.0).epsilon(0.02));
  CHECK(plain.vertical_opening <= 1.0 + 1e-12);
  EyeOptions opt;
  opt.reference = &bits;
  const auto ref = eye_diagram(w, ui, 0.5 * ui, opt);
  CHECK(ref.vertical_opening == doctest::Approx(1.0).epsilon(0.02));
  CHECK(ref.latency_ui == 0);
  CHECK(ref.horizontal_opening > 0.7);
  unsigned total = 0;
  for (const auto& row : ref.matrix) total += std::accumulate(row.begin(), row.end(), 0u);
  CHECK(total == w.size());

  // A delayed copy is found at its latency.
  SampledWaveform d = w;
  std::rotate(d.samples.rbegin(), d.samples.rbegin() + 5 * 16, d.samples.rend());
  const auto delayed = eye_diagram(d, ui, 0.5 * ui, opt);
  CHECK(delayed.latency_ui == 5);

  const auto rx = apply_channel(w, calibrate_to_loss(ChannelSpec{}, 12.0, 2.5e9).spec);
  opt.skip_ui = 100;
  const auto closed = best_eye(rx, ui, opt);
  CHECK(closed.vertical_opening < 10e-3);

  CHECK_THROWS_AS(eye_diagram(nrz_waveform(gen_prbs(7, 1, 50), 16, 1, 0, 0), ui, 0.5 * ui), InvalidArgument);
}
