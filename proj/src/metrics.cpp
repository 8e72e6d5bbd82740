#include "afe/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "afe/error.hpp"
#include "afe/fft.hpp"

namespace afe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Rails {
  double lowest_one = kInf;
  double highest_zero = -kInf;

  void add(double v, bool one) {
    if (one) lowest_one = std::min(lowest_one, v);
    else highest_zero = std::max(highest_zero, v);
  }
  double opening() const {
    if (!std::isfinite(lowest_one) || !std::isfinite(highest_zero)) return 0.0;
    return std::max(0.0, lowest_one - highest_zero);
  }
};

struct Folded {
  long ui_index;  // UI whose centre is nearest
  double frac;    // position relative to that centre, in UI, [-0.5, 0.5)
};

Folded fold(double rel, double ui) {
  const double x = rel / ui;
  const double idx = std::floor(x + 0.5);
  return {static_cast<long>(idx), x - idx};
}

int align_latency(const SampledWaveform& w, double ui, double phase, const EyeOptions& opt) {
  // Centre samples only; correlation against +/-1 symbols.
  std::vector<std::pair<long, double>> centres;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const auto f = fold(static_cast<double>(k) / w.sample_rate - phase, ui);
    if (f.ui_index < static_cast<long>(opt.skip_ui)) continue;
    if (std::abs(f.frac) <= opt.aperture / 2 + 1e-9) centres.emplace_back(f.ui_index, w.samples[k]);
  }
  const auto& bits = opt.reference->bits;
  const long nref = static_cast<long>(bits.size());
  int best = 0;
  double best_corr = -kInf;
  for (int d = 0; d <= opt.max_latency_ui; ++d) {
    double corr = 0.0;
    for (const auto& [u, v] : centres) {
      const long j = u - d;
      if (j < 0 || j >= nref) continue;
      corr += bits[static_cast<std::size_t>(j)] ? v : -v;
    }
    if (corr > best_corr) {
      best_corr = corr;
      best = d;
    }
  }
  return best;
}

}  // namespace

EyeResult eye_diagram(const SampledWaveform& wave, double ui, double phase_offset,
                      const EyeOptions& opt) {
  wave.validate();
  if (!(ui > 0)) throw InvalidArgument("eye_diagram: ui must be positive");
  const double n_ui = static_cast<double>(wave.size()) / (wave.sample_rate * ui);
  if (n_ui < 100.0 - 1e-9) throw InvalidArgument("eye_diagram: record shorter than 100 UI");
  if (opt.time_bins < 2 || opt.voltage_bins < 1) throw InvalidArgument("eye_diagram: bad bin counts");

  EyeResult r;
  r.phase_offset = phase_offset;
  const auto [mn, mx] = std::minmax_element(wave.samples.begin(), wave.samples.end());
  const double span = std::max(*mx - *mn, 1e-12);
  r.v_lo = *mn - 1e-6 * span;
  r.v_hi = *mx + 1e-6 * span;
  r.matrix.assign(opt.voltage_bins, std::vector<unsigned>(opt.time_bins, 0u));

  if (opt.reference) r.latency_ui = align_latency(wave, ui, phase_offset, opt);
  const auto label = [&](long u, double v, double threshold) -> std::optional<bool> {
    if (!opt.reference) return v > threshold;
    const long j = u - r.latency_ui;
    if (j < 0 || j >= static_cast<long>(opt.reference->size())) return std::nullopt;
    return opt.reference->bits[static_cast<std::size_t>(j)] != 0;
  };

  // Per-phase columns across one UI for the horizontal opening.
  const std::size_t cols = std::max<std::size_t>(opt.time_bins / 2, 1);
  std::vector<double> col_sum(cols, 0.0);
  std::vector<std::size_t> col_n(cols, 0);
  double centre_sum = 0.0;
  std::size_t centre_n = 0;
  for (std::size_t k = 0; k < wave.size(); ++k) {
    const double rel = static_cast<double>(k) / wave.sample_rate - phase_offset;
    const auto f = fold(rel, ui);
    double pos2 = std::fmod(rel / ui + 1.0, 2.0);
    if (pos2 < 0) pos2 += 2.0;
    const auto tc = std::min(opt.time_bins - 1, static_cast<std::size_t>(pos2 / 2.0 * static_cast<double>(opt.time_bins)));
    const auto vr = std::min(opt.voltage_bins - 1,
                             static_cast<std::size_t>((wave.samples[k] - r.v_lo) / (r.v_hi - r.v_lo) *
                                                      static_cast<double>(opt.voltage_bins)));
    ++r.matrix[vr][tc];
    if (f.ui_index < static_cast<long>(opt.skip_ui)) continue;
    const auto c = std::min(cols - 1, static_cast<std::size_t>((f.frac + 0.5) * static_cast<double>(cols)));
    col_sum[c] += wave.samples[k];
    ++col_n[c];
    if (std::abs(f.frac) <= opt.aperture / 2 + 1e-9) {
      centre_sum += wave.samples[k];
      ++centre_n;
    }
  }

  const double centre_threshold = centre_n ? centre_sum / static_cast<double>(centre_n) : 0.0;
  Rails centre;
  std::vector<Rails> col_rails(cols);
  for (std::size_t k = 0; k < wave.size(); ++k) {
    const double rel = static_cast<double>(k) / wave.sample_rate - phase_offset;
    const auto f = fold(rel, ui);
    if (f.ui_index < static_cast<long>(opt.skip_ui)) continue;
    const double v = wave.samples[k];
    const auto c = std::min(cols - 1, static_cast<std::size_t>((f.frac + 0.5) * static_cast<double>(cols)));
    const double col_threshold = col_n[c] ? col_sum[c] / static_cast<double>(col_n[c]) : 0.0;
    if (const auto one = label(f.ui_index, v, col_threshold)) col_rails[c].add(v, *one);
    if (std::abs(f.frac) <= opt.aperture / 2 + 1e-9)
      if (const auto one = label(f.ui_index, v, centre_threshold)) centre.add(v, *one);
  }
  r.vertical_opening = centre.opening();
  std::size_t open_cols = 0, used_cols = 0;
  for (std::size_t c = 0; c < cols; ++c) {
    if (!col_n[c]) continue;
    ++used_cols;
    if (col_rails[c].opening() > 0.0) ++open_cols;
  }
  r.horizontal_opening = used_cols ? static_cast<double>(open_cols) / static_cast<double>(used_cols) : 0.0;
  return r;
}

EyeResult best_eye(const SampledWaveform& wave, double ui, const EyeOptions& opt) {
  const auto steps = std::max<long>(1, std::lround(ui * wave.sample_rate));
  EyeResult best;
  bool have = false;
  for (long s = 0; s < steps; ++s) {
    const double phase = static_cast<double>(s) / wave.sample_rate + 0.5 * ui;
    auto r = eye_diagram(wave, ui, phase, opt);
    if (!have || r.vertical_opening > best.vertical_opening) {
      best = std::move(r);
      have = true;
    }
  }
  return best;
}

std::vector<double> power_spectrum(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  const auto spec = rfft(x);
  std::vector<double> p(spec.size());
  const double norm = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const bool single = (k == 0) || (n % 2 == 0 && k == n / 2);
    p[k] = std::norm(spec[k]) * norm * (single ? 1.0 : 2.0);
  }
  return p;
}

std::size_t coherent_bin(double fin, double fs, std::size_t n_fft) {
  if (!(fs > 0) || n_fft < 4) throw InvalidArgument("coherent_bin: bad fs or n_fft");
  const long half = static_cast<long>(n_fft / 2);
  const long target = std::lround(fin * static_cast<double>(n_fft) / fs);
  for (long d = 0; d < half; ++d) {
    for (long m : {target - d, target + d}) {
      if (m <= 0 || m >= half || m % 2 == 0) continue;
      if (std::gcd(static_cast<std::size_t>(m), n_fft) == 1) return static_cast<std::size_t>(m);
    }
  }
  throw InvalidArgument("coherent_bin: no odd co-prime bin available");
}

double coherent_frequency(double fin, double fs, std::size_t n_fft) {
  return static_cast<double>(coherent_bin(fin, fs, n_fft)) * fs / static_cast<double>(n_fft);
}

namespace {

constexpr std::array<double, 7> kBh7{0.27105140069342, 0.43329793923448, 0.21812299954311,
                                     0.06592544638803, 0.01081174209837, 0.00077658482522,
                                     0.00001388721735};
constexpr std::size_t kBh7Lobe = 7;

double sum_range(const std::vector<double>& p, std::size_t lo, std::size_t hi) {
  double s = 0.0;
  for (std::size_t k = lo; k <= hi && k < p.size(); ++k) s += p[k];
  return s;
}

}  // namespace

SpectralResult spectral_metrics_volts(std::span<const double> v, double fs, double fin,
                                      std::size_t n_fft, Window window) {
  if (n_fft < 16 || v.size() < n_fft) throw InvalidArgument("spectral_metrics: record shorter than n_fft");
  if (!(fs > 0) || !(fin > 0) || fin >= fs / 2) throw InvalidArgument("spectral_metrics: need 0 < fin < fs/2");
  std::vector<double> x(v.begin(), v.begin() + static_cast<long>(n_fft));
  const double exact_bin = fin * static_cast<double>(n_fft) / fs;

  SpectralResult r;
  std::vector<double> p;
  double signal = 0.0, noise = 0.0, spur = 0.0;
  if (window == Window::rectangular) {
    const long m = std::lround(exact_bin);
    const bool coherent = std::abs(exact_bin - static_cast<double>(m)) <= 1e-6 * std::max(1.0, exact_bin) &&
                          m % 2 == 1 && std::gcd(static_cast<std::size_t>(m), n_fft) == 1;
    if (!coherent)
      throw InvalidArgument(
          "spectral_metrics: fin is not coherent (need fin = m*fs/n_fft, m odd and co-prime to n_fft); "
          "use Window::blackman_harris7 for arbitrary fin");
    p = power_spectrum(x);
    const auto sb = static_cast<std::size_t>(m);
    r.signal_bin = sb;
    signal = p[sb];
    for (std::size_t k = 1; k < p.size(); ++k) {
      if (k == sb) continue;
      noise += p[k];
      if (k + 1 != sb && k != sb + 1) spur = std::max(spur, p[k]);
    }
  } else {
    const double nn = static_cast<double>(n_fft);
    for (std::size_t i = 0; i < n_fft; ++i) {
      double w = 0.0;
      for (std::size_t k = 0; k < kBh7.size(); ++k)
        w += ((k % 2) ? -1.0 : 1.0) * kBh7[k] * std::cos(2.0 * std::numbers::pi * static_cast<double>(k * i) / nn);
      x[i] *= w;
    }
    p = power_spectrum(x);
    auto guess = static_cast<std::size_t>(std::lround(exact_bin));
    std::size_t sb = guess;
    for (std::size_t k = guess > kBh7Lobe ? guess - kBh7Lobe : 1; k <= guess + kBh7Lobe && k < p.size(); ++k)
      if (p[k] > p[sb]) sb = k;
    r.signal_bin = sb;
    const std::size_t slo = sb > kBh7Lobe ? sb - kBh7Lobe : 0;
    const std::size_t shi = sb + kBh7Lobe;
    signal = sum_range(p, slo, shi);
    std::vector<double> rest = p;
    for (std::size_t k = 0; k <= kBh7Lobe && k < rest.size(); ++k) rest[k] = 0.0;
    for (std::size_t k = slo; k <= shi && k < rest.size(); ++k) rest[k] = 0.0;
    noise = std::accumulate(rest.begin(), rest.end(), 0.0);
    const auto peak = static_cast<std::size_t>(std::max_element(rest.begin(), rest.end()) - rest.begin());
    spur = sum_range(rest, peak > kBh7Lobe ? peak - kBh7Lobe : 0, peak + kBh7Lobe);
  }
  r.fin_used = fin;
  r.sndr_db = 10.0 * std::log10(signal / noise);
  r.sfdr_db = spur > 0 ? 10.0 * std::log10(signal / spur) : kInf;
  r.enob = enob_from_sndr(r.sndr_db);
  r.freq_hz.resize(p.size());
  r.power_dbc.resize(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    r.freq_hz[k] = static_cast<double>(k) * fs / static_cast<double>(n_fft);
    r.power_dbc[k] = p[k] > 0 ? 10.0 * std::log10(p[k] / signal) : -400.0;
  }
  return r;
}

SpectralResult spectral_metrics(std::span<const int> codes, double fs, double fin, std::size_t n_fft,
                                double full_scale, int n_bits, Window window) {
  const double lsb = full_scale / static_cast<double>(1 << n_bits);
  const double mid = (static_cast<double>(1 << n_bits) - 1.0) / 2.0;
  std::vector<double> v(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) v[i] = (static_cast<double>(codes[i]) - mid) * lsb;
  return spectral_metrics_volts(v, fs, fin, n_fft, window);
}

Linearity dnl_inl(std::span<const int> codes, int n_bits) {
  if (codes.empty()) throw InvalidArgument("dnl_inl: empty code record");
  if (n_bits < 2 || n_bits > 16) throw InvalidArgument("dnl_inl: n_bits must be in [2, 16]");
  const std::size_t levels = std::size_t{1} << n_bits;
  if (codes.size() < levels * 1000) throw InvalidArgument("dnl_inl: need at least 2^n_bits * 1000 samples");
  std::vector<std::size_t> hist(levels, 0);
  for (int c : codes) {
    if (c < 0 || static_cast<std::size_t>(c) >= levels) throw InvalidArgument("dnl_inl: code out of range");
    ++hist[static_cast<std::size_t>(c)];
  }
  if (hist.front() == 0 || hist.back() == 0)
    throw InvalidArgument("dnl_inl: rail codes missing; overdrive the sine past both rails");

  const double total = static_cast<double>(codes.size());
  Linearity r;
  r.transitions.resize(levels - 1);
  std::size_t below = 0;
  for (std::size_t k = 1; k < levels; ++k) {
    below += hist[k - 1];
    r.transitions[k - 1] = -std::cos(std::numbers::pi * static_cast<double>(below) / total);
  }
  const auto& t = r.transitions;  // t[k-1] = T_k
  const double lsb = (t.back() - t.front()) / static_cast<double>(levels - 2);
  r.dnl.assign(levels - 1, 0.0);
  for (std::size_t k = 1; k + 1 < levels; ++k) r.dnl[k] = (t[k] - t[k - 1]) / lsb - 1.0;
  r.inl.assign(levels, 0.0);
  for (std::size_t k = 1; k < levels; ++k)
    r.inl[k] = (t[k - 1] - t.front()) / lsb - static_cast<double>(k - 1);
  return r;
}

PowerFom power_fom(const PowerLedger& ledger, double fs, double enob, double bit_rate) {
  if (!(fs > 0) || !(bit_rate > 0)) throw InvalidArgument("power_fom: fs and bit_rate must be positive");
  PowerFom r;
  double front = 0.0;
  for (const auto& [name, w] : ledger.adc) {
    if (!(w >= 0)) throw InvalidArgument("power_fom: negative ledger entry '" + name + "'");
    r.power_total += w;
  }
  for (const auto& [name, w] : ledger.front_end) {
    if (!(w >= 0)) throw InvalidArgument("power_fom: negative ledger entry '" + name + "'");
    front += w;
  }
  r.fomw = r.power_total / (fs * std::pow(2.0, enob));
  r.energy_per_bit = (r.power_total + front) / bit_rate;
  return r;
}

double round_sig(double v, int digits) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  const double scale = std::pow(10.0, digits - 1 - static_cast<int>(std::floor(std::log10(std::abs(v)))));
  return std::round(v * scale) / scale;
}

void MetricsReport::check() const {
  if (std::abs(enob - enob_from_sndr(sndr_db)) >= 1e-12)
    throw std::logic_error("metrics report: ENOB inconsistent with SNDR");
}

}  // namespace afe
