#include <doctest.h>

#include <cmath>
#include <complex>

#include "afe/channel.hpp"
#include "afe/error.hpp"
#include "afe/signal.hpp"

using namespace afe;

namespace {

ChannelSpec calibrated_at(double target_db, double freq) {
  return calibrate_to_loss(ChannelSpec{}, target_db, freq).spec;
}

// Amplitude of the tone at `freq` over samples [from, to), by direct
// projection (integer number of cycles assumed).
double tone_amplitude(const SampledWaveform& w, double freq, std::size_t from, std::size_t to) {
  std::complex<double> acc{0.0};
  for (std::size_t k = from; k < to; ++k) {
    const double ph = 2.0 * M_PI * freq * static_cast<double>(k) / w.sample_rate;
    acc += w.samples[k] * std::complex<double>(std::cos(ph), -std::sin(ph));
  }
  return 2.0 * std::abs(acc) / static_cast<double>(to - from);
}

}  // namespace

TEST_CASE("lossless line is unity gain") {
  ChannelSpec s;
  s.skin_loss_coeff = 0;
  s.dielectric_loss_coeff = 0;
  for (double f : {0.0, 1e6, 1e9, 5e9, 20e9}) CHECK(std::abs(loss_db(channel_response(s, f))) < 0.5);
  CHECK(std::abs(channel_response(s, 0.0)) == doctest::Approx(1.0));
}

TEST_CASE("calibration to 12 dB at 10 GHz") {
  const auto cal = calibrate_to_loss(ChannelSpec{}, 12.0, 10e9);
  CHECK(std::abs(cal.achieved_db - 12.0) <= 0.01);
  CHECK(loss_db(channel_response(cal.spec, 10e9)) == doctest::Approx(12.0).epsilon(0.1 / 12));
  CHECK(cal.scale > 0);
  CHECK(cal.spec.skin_loss_coeff / cal.spec.dielectric_loss_coeff ==
        doctest::Approx(ChannelSpec{}.skin_loss_coeff / ChannelSpec{}.dielectric_loss_coeff));
  CHECK(std::abs(loss_db(channel_response(cal.spec, 0.0))) < 0.5);
}

TEST_CASE("calibrated responses are monotone up to 10 GHz") {
  for (double at : {10e9, 2.5e9}) {
    const auto spec = calibrated_at(12.0, at);
    double prev = std::abs(channel_response(spec, 0.0));
    for (int i = 1; i <= 10000; ++i) {
      const double mag = std::abs(channel_response(spec, i * 1e6));
      CHECK_MESSAGE(mag <= prev * (1 + 1e-12), "f = " << i << " MHz");
      prev = mag;
    }
  }
}

TEST_CASE("other calibration targets") {
  const auto spec = calibrated_at(18.0, 5e9);
  CHECK(std::abs(loss_db(channel_response(spec, 5e9)) - 18.0) <= 0.01);

  ChannelSpec lossless;
  lossless.skin_loss_coeff = 0;
  lossless.dielectric_loss_coeff = 0;
  const auto tiny = calibrate_to_loss(lossless, 0.0001, 10e9);
  CHECK(tiny.scale == 0.0);

  CHECK_THROWS_AS(calibrate_to_loss(lossless, 12.0, 10e9), CalibrationError);
  ChannelSpec resistive;
  resistive.r = 50.0;
  CHECK_THROWS_AS(calibrate_to_loss(resistive, 3.0, 10e9), CalibrationError);
  CHECK_THROWS_AS(calibrate_to_loss(ChannelSpec{}, 0.0, 10e9), InvalidArgument);
}

TEST_CASE("apply_channel identity and errors") {
  ChannelSpec wire{1, 0, 0, 0, 0, 0, 0};
  const auto x = nrz_waveform(gen_prbs(7, 3, 200), 16, 1.0, 0.6, 10e-12);
  const auto y = apply_channel(x, wire);
  REQUIRE(y.size() == x.size());
  double err = 0;
  for (std::size_t k = 0; k < x.size(); ++k) err += std::pow(y.samples[k] - x.samples[k], 2);
  CHECK(std::sqrt(err / x.size()) < 1e-9);
  CHECK_THROWS_AS(apply_channel(SampledWaveform{{}, 1e9, 0, 0}, wire), InvalidArgument);
}

TEST_CASE("10 GHz tone through the 12 dB channel") {
  const auto spec = calibrated_at(12.0, 10e9);
  const double fs = 320e9;
  const std::size_t n = 1 << 14;
  const auto x = gen_sine(10e9, 1.0, 0.6, fs, n);
  const auto y = apply_channel(x, spec);
  const double a = tone_amplitude(y, 10e9, n / 2, n);
  CHECK(a / 0.5 == doctest::Approx(std::pow(10.0, -12.0 / 20.0)).epsilon(0.01));
}

TEST_CASE("linearity and shift invariance") {
  const auto spec = calibrated_at(12.0, 10e9);
  const auto x = nrz_waveform(gen_prbs(7, 0x5A, 300), 16, 1.0, 0.6, 0.0);
  const auto y = apply_channel(x, spec);

  auto x3 = x;
  for (double& v : x3.samples) v *= 3.0;
  const auto y3 = apply_channel(x3, spec);
  double peak = 0;
  for (double v : y.samples) peak = std::max(peak, std::abs(v));
  for (std::size_t k = 0; k < y.size(); ++k) CHECK(std::abs(y3.samples[k] - 3.0 * y.samples[k]) <= 1e-9 * 3.0 * peak);

  const std::size_t shift = 37;
  auto xs = x;
  std::fill(xs.samples.begin(), xs.samples.end(), 0.0);
  std::copy(x.samples.begin(), x.samples.end() - shift, xs.samples.begin() + shift);
  const auto ys = apply_channel(xs, spec);
  double worst = 0;
  for (std::size_t k = shift; k < y.size(); ++k) worst = std::max(worst, std::abs(ys.samples[k] - y.samples[k - shift]));
  // The zero-phase dielectric term has a slowly decaying two-sided tail, so
  // the records differ by the far precursor of the dropped end samples.
  CHECK(worst <= 1e-3 * peak);
}
