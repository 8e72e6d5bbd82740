#include "afe/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "afe/error.hpp"
#include "afe/fft.hpp"

namespace afe {

namespace {

using cd = std::complex<double>;

struct Abcd {
  cd a{1.0}, b{0.0}, c{0.0}, d{1.0};

  Abcd operator*(const Abcd& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
};

Abcd power(Abcd m, int n) {
  Abcd result;
  while (n > 0) {
    if (n & 1) result = result * m;
    m = m * m;
    n >>= 1;
  }
  return result;
}

Abcd segment_abcd(const ChannelSpec& s, double freq) {
  const double w = 2.0 * std::numbers::pi * freq;
  const cd z{s.r, w * s.l};  // series impedance per inch
  const cd y{s.g, w * s.c};  // shunt admittance per inch
  if (std::abs(y) == 0.0) return {1.0, z, 0.0, 1.0};
  if (std::abs(z) == 0.0) return {1.0, 0.0, y, 1.0};
  const cd gamma = std::sqrt(z * y);
  const cd zc = std::sqrt(z / y);
  const cd ch = std::cosh(gamma);
  const cd sh = std::sinh(gamma);
  return {ch, zc * sh, sh / zc, ch};
}

// Excess loss of one section. The skin term carries the sqrt(j*f) phase
// that makes it causal; the dielectric term is applied as pure attenuation.
cd excess_loss(const ChannelSpec& s, double freq) {
  constexpr double kNeperPerDb = std::numbers::ln10 / 20.0;
  const double skin = s.skin_loss_coeff * std::sqrt(freq) * kNeperPerDb;
  const double diel = s.dielectric_loss_coeff * freq * kNeperPerDb;
  return std::exp(cd{-(skin + diel), -skin});
}

}  // namespace

void ChannelSpec::validate() const {
  if (n_segments < 1) throw InvalidArgument("channel n_segments must be >= 1");
  for (double v : {r, l, c, g, skin_loss_coeff, dielectric_loss_coeff})
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidArgument("channel parameters must be finite and >= 0");
}

double ChannelSpec::termination() const {
  return (l > 0.0 && c > 0.0) ? std::sqrt(l / c) : 50.0;
}

std::complex<double> channel_response(const ChannelSpec& spec, double freq) {
  spec.validate();
  if (!(freq >= 0.0)) throw InvalidArgument("channel_response frequency must be >= 0");
  const Abcd m = power(segment_abcd(spec, freq), spec.n_segments);
  const double zt = spec.termination();
  const cd h = 2.0 * zt / (m.a * zt + m.b + m.c * zt * zt + m.d * zt);
  return h * std::pow(excess_loss(spec, freq), spec.n_segments);
}

std::vector<std::complex<double>> channel_response(const ChannelSpec& spec,
                                                   std::span<const double> freqs) {
  std::vector<cd> out;
  out.reserve(freqs.size());
  for (double f : freqs) out.push_back(channel_response(spec, f));
  return out;
}

ChannelCalibration calibrate_to_loss(const ChannelSpec& spec, double target_loss_db,
                                     double at_freq) {
  if (!(target_loss_db > 0.0)) throw InvalidArgument("target_loss_db must be positive");
  if (!(at_freq > 0.0)) throw InvalidArgument("calibration frequency must be positive");
  constexpr double kTolDb = 0.01;
  constexpr int kSteps = 60;

  auto scaled = [&](double s) {
    ChannelSpec out = spec;
    out.skin_loss_coeff *= s;
    out.dielectric_loss_coeff *= s;
    return out;
  };
  auto loss_at = [&](double s) { return loss_db(channel_response(scaled(s), at_freq)); };

  const double base = loss_at(0.0);
  if (std::abs(base - target_loss_db) <= kTolDb) return {scaled(0.0), 0.0, base};
  if (base > target_loss_db)
    throw CalibrationError("channel loss without excess terms already exceeds the target");
  if (spec.skin_loss_coeff == 0.0 && spec.dielectric_loss_coeff == 0.0)
    throw CalibrationError("channel has no loss coefficients to scale");

  double lo = 0.0;
  double hi = 1.0;
  int grow = 0;
  while (loss_at(hi) < target_loss_db) {
    lo = hi;
    hi *= 2.0;
    if (++grow > kSteps) throw CalibrationError("channel loss target unreachable");
  }
  for (int i = 0; i < kSteps; ++i) {
    const double mid = 0.5 * (lo + hi);
    (loss_at(mid) < target_loss_db ? lo : hi) = mid;
  }
  const double s = 0.5 * (lo + hi);
  const double achieved = loss_at(s);
  if (std::abs(achieved - target_loss_db) > kTolDb)
    throw CalibrationError("channel calibration did not converge to the loss target");
  return {scaled(s), s, achieved};
}

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<cd> response_on_grid(const ChannelSpec& spec, std::size_t n, double fs) {
  std::vector<cd> h(n / 2 + 1);
  for (std::size_t k = 0; k < h.size(); ++k)
    h[k] = channel_response(spec, static_cast<double>(k) * fs / static_cast<double>(n));
  return h;
}

// Length of the impulse response until it stays 40 dB below its peak.
std::size_t impulse_support(const ChannelSpec& spec, double fs, std::size_t n_hint) {
  const std::size_t n = std::max<std::size_t>(next_pow2(4 * n_hint), 1024);
  const auto h = irfft(response_on_grid(spec, n, fs), n);
  double peak = 0.0;
  for (double v : h) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 1;
  const double floor = peak * 1e-2;
  std::size_t last = 0;
  // Ignore the tail half: anything there is wrapped-around precursor.
  for (std::size_t k = 0; k < n / 2; ++k)
    if (std::abs(h[k]) > floor) last = k;
  return last + 1;
}

}  // namespace

SampledWaveform apply_channel(const SampledWaveform& wave, const ChannelSpec& spec) {
  spec.validate();
  if (wave.samples.empty()) throw InvalidArgument("apply_channel: empty waveform");
  wave.validate();

  const std::size_t n = wave.size();
  const std::size_t pad = impulse_support(spec, wave.sample_rate, n);
  const std::size_t nfft = next_pow2(n + pad);

  std::vector<double> x(nfft, 0.0);
  std::copy(wave.samples.begin(), wave.samples.end(), x.begin());
  auto spectrum = rfft(x);
  const auto h = response_on_grid(spec, nfft, wave.sample_rate);
  for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] *= h[k];
  // The Nyquist bin of a real record must stay real.
  if (nfft % 2 == 0) spectrum.back() = spectrum.back().real();
  auto y = irfft(spectrum, nfft);

  SampledWaveform out = wave;
  std::copy_n(y.begin(), n, out.samples.begin());
  return out;
}

}  // namespace afe
