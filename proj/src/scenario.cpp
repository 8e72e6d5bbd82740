#include "afe/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "afe/artifacts.hpp"
#include "afe/channel.hpp"
#include "afe/comparator.hpp"
#include "afe/dtle.hpp"
#include "afe/error.hpp"
#include "afe/parallel.hpp"
#include "afe/rng.hpp"

namespace afe {

std::optional<Command> parse_command(const std::string& name) {
  if (name == "link-sim") return Command::link_sim;
  if (name == "adc-char") return Command::adc_char;
  if (name == "comparator-mc") return Command::comparator_mc;
  if (name == "dtle-bode") return Command::dtle_bode;
  if (name == "channel-sweep") return Command::channel_sweep;
  return std::nullopt;
}

std::string to_string(Command c) {
  switch (c) {
    case Command::link_sim: return "link-sim";
    case Command::adc_char: return "adc-char";
    case Command::comparator_mc: return "comparator-mc";
    case Command::dtle_bode: return "dtle-bode";
    case Command::channel_sweep: return "channel-sweep";
  }
  return "?";
}

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Report {
  std::string text;
  std::vector<std::pair<std::string, std::string>> rows;

  void line(const std::string& s) { text += s + "\n"; }
  void value(const std::string& key, double v, const std::string& unit = "") {
    text += key + ": " + g6(v) + (unit.empty() ? "" : " " + unit) + "\n";
    rows.emplace_back(key, g17(v));
  }
  std::string csv() const {
    std::string s = "metric,value\n";
    for (const auto& [k, v] : rows) s += k + "," + v + "\n";
    return s;
  }
};

ChannelCalibration resolve_channel(const ScenarioConfig& cfg) {
  if (cfg.channel.calibrate)
    return calibrate_to_loss(cfg.channel.spec, cfg.channel.target_loss_db, cfg.channel.at_freq);
  ChannelCalibration c{cfg.channel.spec, 1.0, loss_db(channel_response(cfg.channel.spec, cfg.channel.at_freq))};
  return c;
}

double adc_frame(const ScenarioConfig& cfg) { return 2.0 / cfg.adc.input_clk; }

std::size_t active_count(RateMode m) {
  return m == RateMode::full ? 4 : (m == RateMode::half ? 2 : 1);
}

std::string wave_csv(const SampledWaveform& w) {
  std::ostringstream os;
  write_waveform_csv(os, w);
  return os.str();
}

}  // namespace

AdcConfig make_adc_config(const ScenarioConfig& cfg) {
  AdcConfig a;
  a.ladder = build_ladder(cfg.adc.full_scale, cfg.adc.n_bits);
  a.ladder.shared = cfg.adc.shared_ladder;
  a.comparator = cfg.effective_comparator();
  a.schedule = gen_clock_phases(cfg.adc.input_clk);
  if (cfg.adc.use_offsets)
    a.offsets = draw_offsets(a.ladder.tap_count(), a.comparator.offset_sigma,
                             substream_seed(cfg.run.seed, "comparator_offsets"));
  a.bubble_policy = cfg.adc.bubble_policy;
  a.rate_mode = cfg.adc.rate_mode;
  a.ideal_comparators = cfg.adc.ideal_comparators;
  a.kickback_v = cfg.adc.kickback_v;
  a.kickback_seed = substream_seed(cfg.run.seed, "kickback");
  return a;
}

LinkSimResult link_sim(const ScenarioConfig& cfg, unsigned threads) {
  LinkSimResult r;
  const auto& src = cfg.source;
  const DtleParams base = cfg.effective_dtle();
  const double ui = 1.0 / src.bit_rate;
  const double period = 1.0 / base.clk_freq;
  const double spacing = period / 4.0;
  if (std::abs(spacing - ui) > 1e-6 * ui)
    throw ConfigError("link-sim: four equalizer channels at dtle.clk_freq must cover source.bit_rate");
  if (std::abs(adc_frame(cfg) - period) > 1e-6 * period)
    throw ConfigError("link-sim: clocks.input_clk/2 must equal dtle.clk_freq");

  const BitStream bits = gen_prbs(src.prbs_order, src.prbs_seed, src.n_bits, src.bit_rate);
  const SampledWaveform tx = nrz_waveform(bits, src.samples_per_bit, src.swing, src.common_mode, src.rise_time);
  r.channel = resolve_channel(cfg);
  r.rx = apply_channel(tx, r.channel.spec);

  EyeOptions eye_opt;
  eye_opt.aperture = cfg.metrics.eye_aperture;
  eye_opt.reference = &bits;
  eye_opt.skip_ui = cfg.metrics.eye_skip_ui;
  r.rx_eye = best_eye(r.rx, ui, eye_opt);

  const double fs = r.rx.sample_rate;
  const double hold_start = base.track_duty * period;
  const std::size_t n = r.rx.size();

  // Four equalizers staggered by one UI; their end-of-track values are
  // recombined into one held record (a step per UI).
  struct Candidate {
    std::array<SampledWaveform, 4> out;
    SampledWaveform held;
    EyeResult eye;
  };
  auto index_of = [&](double t) {
    return static_cast<std::size_t>(std::clamp(std::llround((t - r.rx.t0) * fs), 0LL,
                                               static_cast<long long>(n - 1)));
  };
  auto recombine = [&](const std::array<SampledWaveform, 4>& out, double phi) {
    SampledWaveform h = out[0];
    const double first = r.rx.t0 + phi + hold_start;
    for (std::size_t k = 0; k < n; ++k) {
      const double rel = (r.rx.time_at(k) - first) / spacing;
      const long long j = std::max(0LL, static_cast<long long>(std::floor(rel + 1e-9)));
      const double s = first + static_cast<double>(j) * spacing;
      h.samples[k] = out[static_cast<std::size_t>(j % 4)].samples[index_of(s)];
    }
    return h;
  };
  auto run_phase = [&](double phi) {
    Candidate c;
    for (int ch = 0; ch < 4; ++ch) {
      DtleParams p = base;
      p.clk_phase = phi + ch * spacing;
      c.out[static_cast<std::size_t>(ch)] = dtle_process(r.rx, p);
    }
    c.held = recombine(c.out, phi);
    c.eye = eye_diagram(c.held, ui, phi + hold_start + 0.5 * spacing, eye_opt);
    return c;
  };

  // Sampling-phase search standing in for clock recovery.
  const auto n_phase = static_cast<std::size_t>(std::max(1L, std::lround(ui * fs)));
  std::vector<double> openings(n_phase);
  parallel_for(n_phase, threads, [&](std::size_t i) {
    openings[i] = run_phase(static_cast<double>(i) / fs).eye.vertical_opening;
  });
  const auto best = static_cast<std::size_t>(std::max_element(openings.begin(), openings.end()) - openings.begin());
  r.dtle_phase = static_cast<double>(best) / fs;
  Candidate c = run_phase(r.dtle_phase);
  r.dtle_eye = c.eye;

  // Gain stage: largest held sample after start-up maps to fill * FS/2.
  const auto skip = std::min(n, cfg.metrics.eye_skip_ui * static_cast<std::size_t>(src.samples_per_bit));
  double peak = 0.0;
  for (std::size_t k = skip; k < n; ++k) peak = std::max(peak, std::abs(c.held.samples[k]));
  r.pga_gain = cfg.pga.gain > 0 ? cfg.pga.gain
                                : (peak > 0 ? cfg.pga.fill * 0.5 * cfg.adc.full_scale / peak : 1.0);
  std::array<SampledWaveform, 4> amplified;
  for (std::size_t ch = 0; ch < 4; ++ch) amplified[ch] = pga(c.out[ch], r.pga_gain, cfg.pga.common_mode);
  r.held = pga(c.held, r.pga_gain, cfg.pga.common_mode);
  r.pga_eye = eye_diagram(r.held, ui, r.dtle_phase + hold_start + 0.5 * spacing, eye_opt);

  AdcConfig acfg = make_adc_config(cfg);
  acfg.time_origin = r.dtle_phase + hold_start;
  r.adc = adc_convert(std::span<const SampledWaveform>(amplified), acfg, threads);

  // Bit decisions against the transmitted pattern at the best latency.
  const int half = 1 << (cfg.adc.n_bits - 1);
  std::size_t best_err = SIZE_MAX, best_cmp = 0;
  for (int lat = 0; lat <= eye_opt.max_latency_ui; ++lat) {
    std::size_t err = 0, cmp = 0;
    for (const auto& s : r.adc.samples) {
      const auto u = static_cast<long long>(std::floor((s.t - r.rx.t0) / ui + 1e-9));
      if (u < static_cast<long long>(cfg.metrics.eye_skip_ui) || u - lat < 0) continue;
      const auto b = static_cast<std::size_t>(u - lat);
      if (b >= bits.size()) continue;
      ++cmp;
      err += static_cast<std::size_t>((s.code >= half) != (bits.bits[b] != 0));
    }
    if (cmp && err < best_err) {
      best_err = err;
      best_cmp = cmp;
      r.adc_latency_ui = lat;
    }
  }
  r.bits_compared = best_cmp;
  r.bit_errors = best_cmp ? best_err : 0;
  return r;
}

namespace {

SampledWaveform tone_wave(double fin, double amplitude, double fs_wave, std::size_t n, double cm) {
  return gen_sine(fin, amplitude, cm, fs_wave, n);
}

std::vector<int> convert_codes(const SampledWaveform& w, AdcConfig acfg, std::size_t n_codes,
                               unsigned threads, std::size_t* metastable) {
  acfg.n_frames = n_codes / active_count(acfg.rate_mode);
  const AdcResult res = adc_convert(w, acfg, threads);
  if (metastable) *metastable += res.metastable_count;
  std::vector<int> codes;
  codes.reserve(res.samples.size());
  for (const auto& s : res.samples) codes.push_back(s.code);
  codes.resize(n_codes);
  return codes;
}

AdcConfig ideal_of(AdcConfig a) {
  a.ideal_comparators = true;
  a.offsets.clear();
  a.kickback_v = 0.0;
  return a;
}

}  // namespace

AdcCharResult adc_char(const ScenarioConfig& cfg, unsigned threads) {
  AdcCharResult r;
  const AdcConfig acfg = make_adc_config(cfg);
  const AdcConfig ideal = ideal_of(acfg);
  const std::size_t ch = active_count(cfg.adc.rate_mode);
  const double frame = adc_frame(cfg);
  r.fs = static_cast<double>(ch) / frame;
  const std::size_t n_fft = cfg.metrics.n_fft;
  if (n_fft % ch) throw ConfigError("metrics.n_fft must be a multiple of the active channel count");
  const double cm = cfg.pga.common_mode;

  // Input record sampled 4x faster than the aggregate rate; every ADC
  // instant then lands on a stored sample.
  const double fs_wave = 4.0 * 4.0 / frame;
  const auto wave_len = [&](std::size_t codes) {
    return static_cast<std::size_t>(std::llround(static_cast<double>(codes / ch) * frame * fs_wave)) + 8;
  };
  auto tone = [&](double fin, std::size_t* meta) {
    ToneResult t;
    t.fin_requested = fin;
    const double f = coherent_frequency(fin, r.fs, n_fft);
    const auto w = tone_wave(f, cfg.metrics.tone_amplitude, fs_wave, wave_len(n_fft), cm);
    t.codes = convert_codes(w, acfg, n_fft, threads, meta);
    t.measured = spectral_metrics(t.codes, r.fs, f, n_fft, cfg.adc.full_scale, cfg.adc.n_bits);
    const auto ic = convert_codes(w, ideal, n_fft, threads, nullptr);
    t.ideal = spectral_metrics(ic, r.fs, f, n_fft, cfg.adc.full_scale, cfg.adc.n_bits);
    return t;
  };

  for (double fin : cfg.metrics.test_freqs) {
    if (!(fin > 0 && fin < 0.5 * r.fs)) continue;
    r.tones.push_back(tone(fin, &r.metastable));
  }
  if (r.tones.empty()) throw ConfigError("metrics.test_freqs: no tone below the converter's Nyquist rate");

  const std::size_t pts = cfg.metrics.sweep_points;
  r.sweep_fin.resize(pts);
  r.sweep_enob.resize(pts);
  for (std::size_t k = 0; k < pts; ++k) {
    const double fin = 0.5 * r.fs * static_cast<double>(k + 1) / static_cast<double>(pts + 1);
    const ToneResult t = tone(fin, nullptr);
    r.sweep_fin[k] = t.measured.fin_used;
    r.sweep_enob[k] = t.measured.enob;
  }

  // Sine-histogram linearity: slightly overdriven tone, co-prime bin.
  const std::size_t nd = cfg.metrics.dnl_samples;
  const double fd = coherent_frequency(0.0987 * r.fs, r.fs, nd);
  const auto wd = tone_wave(fd, cfg.metrics.dnl_overdrive * cfg.adc.full_scale, fs_wave, wave_len(nd), cm);
  r.linearity = dnl_inl(convert_codes(wd, acfg, nd, threads, &r.metastable), cfg.adc.n_bits);
  r.ideal_linearity = dnl_inl(convert_codes(wd, ideal, nd, threads, nullptr), cfg.adc.n_bits);

  const auto& pw = cfg.power;
  r.ledger.adc["ladder"] = pw.ladder_w;
  r.ledger.adc["comparators"] = pw.comparator_w * static_cast<double>(pw.comparator_count);
  r.ledger.adc["clock_buffers"] = pw.clock_buffer_w * static_cast<double>(pw.clock_buffer_count);
  r.ledger.front_end["dtle"] = pw.dtle_w * static_cast<double>(pw.dtle_count);
  const ToneResult& top = r.tones.back();
  r.fom = power_fom(r.ledger, r.fs, top.measured.enob, pw.bit_rate);
  r.fom_reference = power_fom(r.ledger, r.fs, 3.67, pw.bit_rate);

  r.report.sndr_db = top.measured.sndr_db;
  r.report.sfdr_db = top.measured.sfdr_db;
  r.report.enob = top.measured.enob;
  r.report.dnl = r.linearity.dnl;
  r.report.inl = r.linearity.inl;
  r.report.fomw = r.fom.fomw;
  r.report.power_total = r.fom.power_total;
  r.report.energy_per_bit = r.fom.energy_per_bit;
  r.report.check();
  return r;
}

namespace {

using Checks = std::vector<std::string>;

void expect(Checks& fails, Report& rep, bool ok, const std::string& what) {
  rep.line(std::string("check ") + (ok ? "PASS" : "FAIL") + ": " + what);
  if (!ok) fails.push_back(what);
}

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void eye_artifacts(ArtifactWriter& out, const std::string& stem, const EyeResult& e, const std::string& title) {
  const double x_span = 2.0;
  out.write(stem + ".svg", svg_heatmap(e.matrix, x_span, e.v_lo, e.v_hi,
                                       {title, "time (UI)", "differential voltage (V)"}));
}

void do_link_sim(const ScenarioConfig& cfg, const RunOptions& opt, ArtifactWriter& out, Report& rep, Checks& fails) {
  const LinkSimResult r = link_sim(cfg, opt.threads);
  rep.line("link-sim: PRBS" + std::to_string(cfg.source.prbs_order) + " at " + g6(cfg.source.bit_rate) + " b/s");
  rep.value("channel_scale", r.channel.scale);
  rep.value("channel_loss_db_at_cal_freq", r.channel.achieved_db, "dB");
  rep.value("channel_loss_db_at_10ghz", loss_db(channel_response(r.channel.spec, 10e9)), "dB");
  rep.value("rx_eye_opening_v", r.rx_eye.vertical_opening, "V");
  rep.value("dtle_eye_opening_v", r.dtle_eye.vertical_opening, "V");
  rep.value("dtle_horizontal_opening_ui", r.dtle_eye.horizontal_opening);
  rep.value("dtle_phase_s", r.dtle_phase, "s");
  rep.value("pga_gain", r.pga_gain);
  rep.value("pga_eye_opening_v", r.pga_eye.vertical_opening, "V");
  rep.value("adc_bits_compared", static_cast<double>(r.bits_compared));
  rep.value("adc_bit_errors", static_cast<double>(r.bit_errors));
  rep.value("adc_latency_ui", r.adc_latency_ui);
  rep.value("adc_metastable_decisions", static_cast<double>(r.adc.metastable_count));

  out.write("rx_waveform.csv", wave_csv(r.rx));
  out.write("held_waveform.csv", wave_csv(r.held));
  std::ostringstream adc;
  write_adc_csv(adc, r.adc);
  out.write("adc_output.csv", adc.str());
  eye_artifacts(out, "eye_rx", r.rx_eye, "Received eye");
  eye_artifacts(out, "eye_dtle", r.dtle_eye, "Equalized eye (held samples)");
  eye_artifacts(out, "eye_pga", r.pga_eye, "Equalized eye after gain stage");

  if (opt.check) {
    expect(fails, rep, r.rx_eye.vertical_opening < 10e-3, "received eye opening < 10 mV");
    expect(fails, rep, r.dtle_eye.vertical_opening >= 80e-3, "equalized eye opening >= 80 mV");
    expect(fails, rep, r.pga_eye.vertical_opening >= 80e-3, "eye opening after gain stage >= 80 mV");
  }
}

void do_adc_char(const ScenarioConfig& cfg, const RunOptions& opt, ArtifactWriter& out, Report& rep, Checks& fails) {
  const AdcCharResult r = adc_char(cfg, opt.threads);
  rep.line("adc-char: " + to_string(cfg.adc.rate_mode) + " rate, " + (cfg.adc.ideal_comparators ? "ideal" : "behavioural") +
           " comparators, offsets " + (cfg.adc.use_offsets ? "on" : "off"));
  rep.value("output_rate_sps", r.fs, "S/s");
  for (std::size_t i = 0; i < r.tones.size(); ++i) {
    const auto& t = r.tones[i];
    const std::string p = "tone" + std::to_string(i) + "_";
    rep.value(p + "fin_requested_hz", t.fin_requested, "Hz");
    rep.value(p + "fin_coherent_hz", t.measured.fin_used, "Hz");
    rep.value(p + "sndr_db", t.measured.sndr_db, "dB");
    rep.value(p + "sfdr_db", t.measured.sfdr_db, "dB");
    rep.value(p + "enob", t.measured.enob, "bits");
    rep.value(p + "ideal_enob", t.ideal.enob, "bits");

    std::string s = "f_hz,power_dbc\n";
    for (std::size_t k = 0; k < t.measured.freq_hz.size(); ++k)
      s += g17(t.measured.freq_hz[k]) + "," + g17(t.measured.power_dbc[k]) + "\n";
    out.write("spectrum_" + std::to_string(i) + ".csv", s);
    out.write("spectrum_" + std::to_string(i) + ".svg",
              svg_plot({{"", t.measured.freq_hz, t.measured.power_dbc, true}},
                       {"Output spectrum, fin = " + g6(t.measured.fin_used * 1e-9) + " GHz", "frequency (Hz)",
                        "power (dBc)", false, -120.0}));
    std::string c = "index,code\n";
    for (std::size_t k = 0; k < t.codes.size(); ++k) c += std::to_string(k) + "," + std::to_string(t.codes[k]) + "\n";
    out.write("codes_" + std::to_string(i) + ".csv", c);
  }
  std::string sw = "fin_hz,enob\n";
  for (std::size_t k = 0; k < r.sweep_fin.size(); ++k) sw += g17(r.sweep_fin[k]) + "," + g17(r.sweep_enob[k]) + "\n";
  out.write("enob_vs_fin.csv", sw);
  out.write("enob_vs_fin.svg", svg_plot({{"ENOB", r.sweep_fin, r.sweep_enob}},
                                        {"ENOB versus input frequency", "input frequency (Hz)", "ENOB (bits)"}));

  std::string lin = "code,dnl_lsb,inl_lsb\n";
  std::vector<double> code_axis;
  for (std::size_t k = 0; k < r.linearity.inl.size(); ++k) {
    code_axis.push_back(static_cast<double>(k));
    lin += std::to_string(k) + "," + (k < r.linearity.dnl.size() ? g17(r.linearity.dnl[k]) : std::string()) + "," +
           g17(r.linearity.inl[k]) + "\n";
  }
  out.write("dnl_inl.csv", lin);
  std::vector<double> dnl_axis(code_axis.begin(), code_axis.begin() + static_cast<long>(r.linearity.dnl.size()));
  out.write("dnl.svg", svg_plot({{"", dnl_axis, r.linearity.dnl, true}}, {"DNL", "code", "DNL (LSB)"}));
  out.write("inl.svg", svg_plot({{"", code_axis, r.linearity.inl, true}}, {"INL", "code", "INL (LSB)"}));
  rep.value("max_abs_dnl_lsb", max_abs(r.linearity.dnl), "LSB");
  rep.value("max_abs_inl_lsb", max_abs(r.linearity.inl), "LSB");
  rep.value("ideal_max_abs_inl_lsb", max_abs(r.ideal_linearity.inl), "LSB");
  rep.value("metastable_decisions", static_cast<double>(r.metastable));

  for (const auto& [k, v] : r.ledger.adc) rep.value("power_" + k + "_w", v, "W");
  for (const auto& [k, v] : r.ledger.front_end) rep.value("power_frontend_" + k + "_w", v, "W");
  rep.value("power_adc_total_w", r.fom.power_total, "W");
  rep.value("power_adc_total_rounded_w", round_sig(r.fom.power_total, 3), "W");
  rep.value("fomw_j_per_step", r.fom.fomw, "J/conv-step");
  rep.value("fomw_at_enob_3p67_j_per_step", r.fom_reference.fomw, "J/conv-step");
  rep.value("energy_per_bit_j", r.fom.energy_per_bit, "J/bit");

  if (opt.check) {
    const auto& top = r.tones.back();
    const bool ideal_setup = cfg.adc.ideal_comparators && !cfg.adc.use_offsets;
    if (ideal_setup) {
      expect(fails, rep, std::abs(top.measured.sndr_db - 25.84) <= 0.3, "ideal SNDR within 25.84 +/- 0.3 dB");
      expect(fails, rep, std::abs(top.measured.enob - 4.0) <= 0.05, "ideal ENOB within 4.0 +/- 0.05");
    } else {
      expect(fails, rep, top.measured.enob <= top.ideal.enob - 0.15, "ENOB at least 0.15 bit below ideal");
      expect(fails, rep, top.measured.enob >= 3.3, "ENOB >= 3.3 bits");
    }
  }
}

void do_comparator_mc(const ScenarioConfig& cfg, const RunOptions& opt, ArtifactWriter& out, Report& rep,
                      Checks& fails) {
  const ComparatorParams p = cfg.effective_comparator();
  const McResult r = mc_offset_run(p, cfg.run.mc_trials, substream_seed(cfg.run.seed, "mc_trials"), opt.threads);
  std::string s = "trial,offset_v,trip_point_v\n";
  for (std::size_t i = 0; i < r.trials.size(); ++i)
    s += std::to_string(i) + "," + g17(r.trials[i].offset) + "," + g17(r.trials[i].trip_point) + "\n";
  out.write("mc.csv", s);

  const double lo = -4.5 * std::max(p.offset_sigma, 1e-6), hi = -lo;
  const std::size_t nb = 61;
  std::vector<double> centres(nb), counts(nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) centres[b] = lo + (static_cast<double>(b) + 0.5) * (hi - lo) / nb;
  for (const auto& t : r.trials) {
    const double f = (t.trip_point - lo) / (hi - lo);
    if (f >= 0 && f < 1) counts[static_cast<std::size_t>(f * nb)] += 1;
  }
  out.write("mc_histogram.svg", svg_plot({{"", centres, counts, true}},
                                         {"Comparator trip points", "trip point (V)", "trials"}));

  rep.line("comparator-mc: " + std::to_string(cfg.run.mc_trials) + " trials");
  rep.value("offset_sigma_v", p.offset_sigma, "V");
  rep.value("sigma_hat_v", r.sigma_hat, "V");
  rep.value("mean_v", r.mean, "V");
  rep.value("skewness", r.skewness);
  rep.value("amp_gain", amp_gain(p));
  rep.value("delta_t_s", delta_t(p), "s");
  rep.value("min_resolvable_input_v", min_resolvable_input(p), "V");
  if (opt.check) {
    expect(fails, rep, std::abs(r.sigma_hat - p.offset_sigma) <= 0.05 * p.offset_sigma, "sigma_hat within 5%");
    expect(fails, rep, std::abs(r.skewness) < 0.1, "|skewness| < 0.1");
  }
}

void do_dtle_bode(const ScenarioConfig& cfg, const RunOptions& opt, ArtifactWriter& out, Report& rep, Checks& fails) {
  const DtleParams p = cfg.effective_dtle();
  const auto& d = cfg.dtle;
  std::vector<double> f(d.bode_points), mag(d.bode_points), ph(d.bode_points);
  const double l0 = std::log10(d.bode_f_min), l1 = std::log10(d.bode_f_max);
  std::string s = "f_hz,mag_db,phase_deg\n";
  for (std::size_t i = 0; i < d.bode_points; ++i) {
    f[i] = std::pow(10.0, l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(d.bode_points - 1));
    const auto h = dtle_frequency_response(p, f[i]);
    mag[i] = 20.0 * std::log10(std::abs(h));
    ph[i] = std::arg(h) * 180.0 / kPi;
    s += g17(f[i]) + "," + g17(mag[i]) + "," + g17(ph[i]) + "\n";
  }
  out.write("dtle_bode.csv", s);
  out.write("dtle_bode.svg", svg_plot({{"magnitude", f, mag}}, {"Equalizer response", "frequency (Hz)", "gain (dB)", true}));

  const auto pz = dtle_poles_zero(p);
  const auto g = dtle_gains(p);
  rep.line("dtle-bode");
  rep.value("rd_ohm", p.rd, "ohm");
  rep.value("omega_z_rad_s", pz.omega_z, "rad/s");
  rep.value("omega_p1_rad_s", pz.omega_p1, "rad/s");
  rep.value("omega_p2_rad_s", pz.omega_p2, "rad/s");
  rep.value("dc_gain", g.dc_gain);
  rep.value("hifreq_gain", g.hifreq_gain);
  rep.value("peaking", g.peaking);
  rep.value("peaking_db", 20.0 * std::log10(g.peaking), "dB");
  const double nyq = 0.5 * cfg.source.bit_rate;
  rep.value("gain_at_nyquist_db", 20.0 * std::log10(std::abs(dtle_frequency_response(p, nyq))), "dB");
  rep.value("boost_at_nyquist_db",
            20.0 * std::log10(std::abs(dtle_frequency_response(p, nyq)) / g.dc_gain), "dB");
  if (opt.check) {
    const double plateau = std::abs(dtle_frequency_response(p, 1e6 * pz.omega_p1, false)) / g.dc_gain;
    expect(fails, rep, std::abs(plateau / g.peaking - 1.0) < 1e-6, "plateau/DC equals peaking within 1e-6");
  }
}

void do_channel_sweep(const ScenarioConfig& cfg, const RunOptions& opt, ArtifactWriter& out, Report& rep,
                      Checks& fails) {
  const ChannelCalibration cal = resolve_channel(cfg);
  const auto n = static_cast<std::size_t>(std::floor(cfg.channel.sweep_max / cfg.channel.sweep_step + 1e-9)) + 1;
  std::vector<double> f(n), loss(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = static_cast<double>(i) * cfg.channel.sweep_step;
  const auto h = channel_response(cal.spec, f);
  std::string s = "f_hz,loss_db,phase_deg\n";
  bool monotone = true;
  for (std::size_t i = 0; i < n; ++i) {
    loss[i] = loss_db(h[i]);
    s += g17(f[i]) + "," + g17(loss[i]) + "," + g17(std::arg(h[i]) * 180.0 / kPi) + "\n";
    if (i && f[i] <= 10e9 && loss[i] < loss[i - 1] - 1e-12) monotone = false;
  }
  out.write("channel_sweep.csv", s);
  out.write("channel_sweep.svg", svg_plot({{"loss", f, loss}}, {"Channel insertion loss", "frequency (Hz)", "loss (dB)"}));
  rep.line("channel-sweep");
  rep.value("scale", cal.scale);
  rep.value("skin_loss_coeff", cal.spec.skin_loss_coeff, "dB/sqrt(Hz)/inch");
  rep.value("dielectric_loss_coeff", cal.spec.dielectric_loss_coeff, "dB/Hz/inch");
  rep.value("loss_db_at_cal_freq", cal.achieved_db, "dB");
  rep.value("loss_db_at_2p5ghz", loss_db(channel_response(cal.spec, 2.5e9)), "dB");
  rep.value("loss_db_at_5ghz", loss_db(channel_response(cal.spec, 5e9)), "dB");
  rep.value("loss_db_at_10ghz", loss_db(channel_response(cal.spec, 10e9)), "dB");
  if (opt.check) {
    expect(fails, rep, !cfg.channel.calibrate || std::abs(cal.achieved_db - cfg.channel.target_loss_db) <= 0.01,
           "calibrated loss within 0.01 dB of target");
    expect(fails, rep, monotone, "loss non-decreasing up to 10 GHz");
  }
}

}  // namespace

RunOutcome run_scenario(const ScenarioConfig& cfg, Command cmd, const RunOptions& opt) {
  RunOutcome outcome;
  Report rep;
  Checks fails;
  try {
    cfg.validate();
    ArtifactWriter out(opt.out_dir);
    switch (cmd) {
      case Command::link_sim: do_link_sim(cfg, opt, out, rep, fails); break;
      case Command::adc_char: do_adc_char(cfg, opt, out, rep, fails); break;
      case Command::comparator_mc: do_comparator_mc(cfg, opt, out, rep, fails); break;
      case Command::dtle_bode: do_dtle_bode(cfg, opt, out, rep, fails); break;
      case Command::channel_sweep: do_channel_sweep(cfg, opt, out, rep, fails); break;
    }
    out.write("report.txt", rep.text);
    out.write("metrics.csv", rep.csv());
    out.write("config.ini", cfg.canonical_text());
    out.write_manifest(to_string(cmd), cfg.run.seed, sha256_hex(cfg.canonical_text()));
    outcome.summary = rep.text;
    outcome.check_failures = fails;
    outcome.exit_code = fails.empty() ? exit_code::ok : exit_code::check_failure;
  } catch (const ConfigError& e) {
    outcome.summary = std::string("config error: ") + e.what() + "\n";
    outcome.exit_code = exit_code::config_error;
  } catch (const CalibrationError& e) {
    outcome.summary = std::string("calibration failure: ") + e.what() + "\n";
    outcome.exit_code = exit_code::calibration_failure;
  }
  return outcome;
}

}  // namespace afe
