#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "afe/signal.hpp"

namespace afe {

struct EyeResult {
  // matrix[row][col]: col spans two UI, row spans [v_lo, v_hi].
  std::vector<std::vector<unsigned>> matrix;
  double v_lo = 0.0;
  double v_hi = 0.0;
  double vertical_opening = 0.0;    // V, at UI centre
  double horizontal_opening = 0.0;  // fraction of UI with a positive opening
  double phase_offset = 0.0;        // s, UI centre used
  int latency_ui = 0;               // alignment to the reference pattern, if any
};

struct EyeOptions {
  std::size_t time_bins = 64;     // over two UI
  std::size_t voltage_bins = 128;
  double aperture = 0.10;         // fraction of UI around the centre
  const BitStream* reference = nullptr;  // classifies rails by transmitted bit
  std::size_t skip_ui = 0;        // leading UIs excluded (start-up transient)
  int max_latency_ui = 256;
};

/// Folds the record modulo 2 UI. `phase_offset` is the time (from t0) of a
/// UI centre. Rails are split by the transmitted bit when a reference is
/// given, otherwise at the mean of the aperture samples. The vertical
/// opening is min(1-rail) - max(0-rail) in the centre aperture, 0 if they
/// overlap. Requires at least 100 UI.
EyeResult eye_diagram(const SampledWaveform& wave, double ui, double phase_offset,
                      const EyeOptions& opt = {});

/// eye_diagram at the phase (stepped by one sample) with the widest opening.
EyeResult best_eye(const SampledWaveform& wave, double ui, const EyeOptions& opt = {});

enum class Window { rectangular, blackman_harris7 };

struct SpectralResult {
  double sndr_db = 0.0;
  double sfdr_db = 0.0;
  double enob = 0.0;
  double fin_used = 0.0;  // Hz
  std::size_t signal_bin = 0;
  std::vector<double> freq_hz;    // one-sided
  std::vector<double> power_dbc;  // relative to the signal
};

/// One-sided power spectrum normalised so sum(P) == mean(x^2).
std::vector<double> power_spectrum(std::span<const double> x);

/// Coherent-sampling helpers: nearest odd bin co-prime to n_fft.
std::size_t coherent_bin(double fin, double fs, std::size_t n_fft);
double coherent_frequency(double fin, double fs, std::size_t n_fft);

/// SNDR/SFDR/ENOB of a voltage record (first n_fft samples). Rectangular
/// window requires fin = m fs/n_fft with m odd and co-prime to n_fft.
SpectralResult spectral_metrics_volts(std::span<const double> v, double fs, double fin,
                                      std::size_t n_fft, Window window = Window::rectangular);

/// Codes recentred to volts, (code - (2^n - 1)/2) * FS/2^n, then as above.
SpectralResult spectral_metrics(std::span<const int> codes, double fs, double fin,
                                std::size_t n_fft, double full_scale = 0.6, int n_bits = 4,
                                Window window = Window::rectangular);

inline double enob_from_sndr(double sndr_db) { return (sndr_db - 1.76) / 6.02; }

struct Linearity {
  std::vector<double> dnl;  // per code 0 .. 2^n-2 (code 0 is open-ended, reported 0)
  std::vector<double> inl;  // per code 0 .. 2^n-1 at its lower transition (code 0 reported 0)
  std::vector<double> transitions;  // normalised transition levels T_1 .. T_{2^n-1}
};

/// Sine-histogram code-density test. Transition levels are
/// T_k = -cos(pi * C_k / S) with C_k the count of codes below k; the LSB is
/// the endpoint fit (T_{2^n-1} - T_1)/(2^n - 2), so the outer transitions
/// carry zero INL. Needs >= 2^n * 1000 samples hitting both rail codes.
Linearity dnl_inl(std::span<const int> codes, int n_bits = 4);

struct PowerLedger {
  std::map<std::string, double> adc;        // W
  std::map<std::string, double> front_end;  // W, counted only in energy per bit
};

struct PowerFom {
  double power_total = 0.0;     // W, ADC entries
  double fomw = 0.0;            // J per conversion step
  double energy_per_bit = 0.0;  // J/bit
};

/// fomw = P/(fs 2^enob); energy_per_bit = (P + front end)/bit_rate.
PowerFom power_fom(const PowerLedger& ledger, double fs, double enob, double bit_rate);

/// Rounds to `digits` significant figures, for report tables.
double round_sig(double v, int digits);

struct MetricsReport {
  double sndr_db = 0.0;
  double sfdr_db = 0.0;
  double enob = 0.0;
  std::vector<double> dnl;
  std::vector<double> inl;
  double fomw = 0.0;
  double power_total = 0.0;
  double energy_per_bit = 0.0;

  /// Throws if enob and sndr disagree by more than 1e-12.
  void check() const;
};

}  // namespace afe
