#include "afe/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "afe/error.hpp"
#include "afe/signal.hpp"

namespace afe {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

IniDocument IniDocument::parse(const std::string& text, const std::string& source_name) {
  IniDocument doc;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source_name + ":" + std::to_string(lineno);
    const auto comment = line.find_first_of("#;");
    const std::string body = trim(comment == std::string::npos ? line : line.substr(0, comment));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']' || body.size() < 3) throw ConfigError(where + ": malformed section header");
      section = lower(trim(body.substr(1, body.size() - 2)));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    if (section.empty()) throw ConfigError(where + ": key outside of any [section]");
    const std::string key = lower(trim(body.substr(0, eq)));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (doc.sections_[section].count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    doc.set(section, key, trim(body.substr(eq + 1)), where);
  }
  return doc;
}

void IniDocument::set(const std::string& section, const std::string& key, const std::string& value,
                      const std::string& origin) {
  sections_[lower(section)][lower(key)] = {value, origin};
}

namespace {

// Shortest text that reads back to the same double.
std::string fmt_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (...) {
    throw std::invalid_argument("expected a number");
  }
  if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument("expected a number");
  return v;
}

template <class Int>
Int parse_int(const std::string& s) {
  Int v{};
  int base = 10;
  std::string_view sv = s;
  if (sv.size() > 2 && sv[0] == '0' && (sv[1] == 'x' || sv[1] == 'X')) {
    base = 16;
    sv.remove_prefix(2);
  }
  const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v, base);
  if (ec != std::errc() || ptr != sv.data() + sv.size()) throw std::invalid_argument("expected an integer");
  return v;
}

bool parse_bool(const std::string& s) {
  const auto v = lower(s);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected true/false");
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item)));
  if (out.empty()) throw std::invalid_argument("expected a comma-separated list of numbers");
  return out;
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(ScenarioConfig&, const std::string&)> parse;
  std::function<std::string(const ScenarioConfig&)> print;
};

template <class Get>
Field real(std::string sec, std::string key, Get get) {
  return {std::move(sec), std::move(key),
          [get](ScenarioConfig& c, const std::string& v) { get(c) = parse_double(v); },
          [get](const ScenarioConfig& c) { return fmt_double(get(const_cast<ScenarioConfig&>(c))); }};
}

template <class Get>
Field integer(std::string sec, std::string key, Get get) {
  using T = std::remove_reference_t<decltype(get(std::declval<ScenarioConfig&>()))>;
  return {std::move(sec), std::move(key),
          [get](ScenarioConfig& c, const std::string& v) { get(c) = parse_int<T>(v); },
          [get](const ScenarioConfig& c) { return std::to_string(get(const_cast<ScenarioConfig&>(c))); }};
}

template <class Get>
Field flag(std::string sec, std::string key, Get get) {
  return {std::move(sec), std::move(key),
          [get](ScenarioConfig& c, const std::string& v) { get(c) = parse_bool(v); },
          [get](const ScenarioConfig& c) { return std::string(get(const_cast<ScenarioConfig&>(c)) ? "true" : "false"); }};
}

const std::vector<Field>& fields() {
  using C = ScenarioConfig;
  static const std::vector<Field> table = {
      integer("source", "prbs_order", [](C& c) -> auto& { return c.source.prbs_order; }),
      integer("source", "prbs_seed", [](C& c) -> auto& { return c.source.prbs_seed; }),
      integer("source", "n_bits", [](C& c) -> auto& { return c.source.n_bits; }),
      real("source", "bit_rate", [](C& c) -> auto& { return c.source.bit_rate; }),
      integer("source", "samples_per_bit", [](C& c) -> auto& { return c.source.samples_per_bit; }),
      real("source", "swing", [](C& c) -> auto& { return c.source.swing; }),
      real("source", "common_mode", [](C& c) -> auto& { return c.source.common_mode; }),
      real("source", "rise_time", [](C& c) -> auto& { return c.source.rise_time; }),

      integer("channel", "n_segments", [](C& c) -> auto& { return c.channel.spec.n_segments; }),
      real("channel", "r", [](C& c) -> auto& { return c.channel.spec.r; }),
      real("channel", "l", [](C& c) -> auto& { return c.channel.spec.l; }),
      real("channel", "c", [](C& c) -> auto& { return c.channel.spec.c; }),
      real("channel", "g", [](C& c) -> auto& { return c.channel.spec.g; }),
      real("channel", "skin_loss_coeff", [](C& c) -> auto& { return c.channel.spec.skin_loss_coeff; }),
      real("channel", "dielectric_loss_coeff", [](C& c) -> auto& { return c.channel.spec.dielectric_loss_coeff; }),
      flag("channel", "calibrate", [](C& c) -> auto& { return c.channel.calibrate; }),
      real("channel", "target_loss_db", [](C& c) -> auto& { return c.channel.target_loss_db; }),
      real("channel", "at_freq", [](C& c) -> auto& { return c.channel.at_freq; }),
      real("channel", "sweep_max", [](C& c) -> auto& { return c.channel.sweep_max; }),
      real("channel", "sweep_step", [](C& c) -> auto& { return c.channel.sweep_step; }),

      real("dtle", "gm", [](C& c) -> auto& { return c.dtle.params.gm; }),
      real("dtle", "gmb", [](C& c) -> auto& { return c.dtle.params.gmb; }),
      real("dtle", "rs", [](C& c) -> auto& { return c.dtle.params.rs; }),
      real("dtle", "cs", [](C& c) -> auto& { return c.dtle.params.cs; }),
      real("dtle", "rd", [](C& c) -> auto& { return c.dtle.params.rd; }),
      real("dtle", "c_load", [](C& c) -> auto& { return c.dtle.params.c_load; }),
      real("dtle", "clk_freq", [](C& c) -> auto& { return c.dtle.params.clk_freq; }),
      real("dtle", "clk_phase", [](C& c) -> auto& { return c.dtle.params.clk_phase; }),
      real("dtle", "track_duty", [](C& c) -> auto& { return c.dtle.params.track_duty; }),
      real("dtle", "leakage_tau", [](C& c) -> auto& { return c.dtle.params.leakage_tau; }),
      flag("dtle", "blockers_enabled", [](C& c) -> auto& { return c.dtle.params.blockers_enabled; }),
      flag("dtle", "rd_from_switch", [](C& c) -> auto& { return c.dtle.rd_from_switch; }),
      real("dtle", "switch_mu_cox_wl", [](C& c) -> auto& { return c.dtle.device.mu_cox_wl; }),
      real("dtle", "switch_vgs", [](C& c) -> auto& { return c.dtle.device.vgs; }),
      real("dtle", "switch_vth", [](C& c) -> auto& { return c.dtle.device.vth; }),
      real("dtle", "bode_f_min", [](C& c) -> auto& { return c.dtle.bode_f_min; }),
      real("dtle", "bode_f_max", [](C& c) -> auto& { return c.dtle.bode_f_max; }),
      integer("dtle", "bode_points", [](C& c) -> auto& { return c.dtle.bode_points; }),

      real("pga", "gain", [](C& c) -> auto& { return c.pga.gain; }),
      real("pga", "common_mode", [](C& c) -> auto& { return c.pga.common_mode; }),
      real("pga", "fill", [](C& c) -> auto& { return c.pga.fill; }),

      real("comparator", "vdd", [](C& c) -> auto& { return c.comparator.vdd; }),
      real("comparator", "c_tail", [](C& c) -> auto& { return c.comparator.c_tail; }),
      real("comparator", "c_load", [](C& c) -> auto& { return c.comparator.c_load; }),
      real("comparator", "vcm", [](C& c) -> auto& { return c.comparator.vcm; }),
      real("comparator", "vth", [](C& c) -> auto& { return c.comparator.vth; }),
      real("comparator", "delta_v", [](C& c) -> auto& { return c.comparator.delta_v; }),
      real("comparator", "k_const", [](C& c) -> auto& { return c.comparator.k_const; }),
      real("comparator", "gm_eff", [](C& c) -> auto& { return c.comparator.gm_eff; }),
      real("comparator", "ts", [](C& c) -> auto& { return c.comparator.ts; }),
      real("comparator", "offset_sigma", [](C& c) -> auto& { return c.comparator.offset_sigma; }),
      real("comparator", "v_min_frac", [](C& c) -> auto& { return c.comparator.v_min_frac; }),
      real("comparator", "sensitivity", [](C& c) -> auto& { return c.comparator.sensitivity; }),
      flag("comparator", "calibrate_gain", [](C& c) -> auto& { return c.calibrate_comparator; }),

      real("adc", "full_scale", [](C& c) -> auto& { return c.adc.full_scale; }),
      integer("adc", "n_bits", [](C& c) -> auto& { return c.adc.n_bits; }),
      flag("adc", "shared_ladder", [](C& c) -> auto& { return c.adc.shared_ladder; }),
      {"adc", "bubble_policy",
       [](C& c, const std::string& v) {
         const auto s = lower(v);
         if (s == "majority") c.adc.bubble_policy = BubblePolicy::majority;
         else if (s == "first-zero" || s == "first_zero") c.adc.bubble_policy = BubblePolicy::first_zero;
         else throw std::invalid_argument("expected majority or first-zero");
       },
       [](const C& c) { return to_string(c.adc.bubble_policy); }},
      {"adc", "rate_mode",
       [](C& c, const std::string& v) {
         const auto s = lower(v);
         if (s == "full") c.adc.rate_mode = RateMode::full;
         else if (s == "half") c.adc.rate_mode = RateMode::half;
         else if (s == "quarter") c.adc.rate_mode = RateMode::quarter;
         else throw std::invalid_argument("expected full, half or quarter");
       },
       [](const C& c) { return to_string(c.adc.rate_mode); }},
      flag("adc", "ideal_comparators", [](C& c) -> auto& { return c.adc.ideal_comparators; }),
      flag("adc", "use_offsets", [](C& c) -> auto& { return c.adc.use_offsets; }),
      real("adc", "kickback_v", [](C& c) -> auto& { return c.adc.kickback_v; }),
      real("clocks", "input_clk", [](C& c) -> auto& { return c.adc.input_clk; }),

      integer("metrics", "n_fft", [](C& c) -> auto& { return c.metrics.n_fft; }),
      {"metrics", "test_freqs",
       [](C& c, const std::string& v) { c.metrics.test_freqs = parse_list(v); },
       [](const C& c) {
         std::string s;
         for (double f : c.metrics.test_freqs) s += (s.empty() ? "" : ", ") + fmt_double(f);
         return s;
       }},
      real("metrics", "tone_amplitude", [](C& c) -> auto& { return c.metrics.tone_amplitude; }),
      integer("metrics", "sweep_points", [](C& c) -> auto& { return c.metrics.sweep_points; }),
      integer("metrics", "dnl_samples", [](C& c) -> auto& { return c.metrics.dnl_samples; }),
      real("metrics", "dnl_overdrive", [](C& c) -> auto& { return c.metrics.dnl_overdrive; }),
      real("metrics", "eye_aperture", [](C& c) -> auto& { return c.metrics.eye_aperture; }),
      integer("metrics", "eye_skip_ui", [](C& c) -> auto& { return c.metrics.eye_skip_ui; }),

      real("power", "ladder_w", [](C& c) -> auto& { return c.power.ladder_w; }),
      real("power", "comparator_w", [](C& c) -> auto& { return c.power.comparator_w; }),
      integer("power", "comparator_count", [](C& c) -> auto& { return c.power.comparator_count; }),
      real("power", "clock_buffer_w", [](C& c) -> auto& { return c.power.clock_buffer_w; }),
      integer("power", "clock_buffer_count", [](C& c) -> auto& { return c.power.clock_buffer_count; }),
      real("power", "dtle_w", [](C& c) -> auto& { return c.power.dtle_w; }),
      integer("power", "dtle_count", [](C& c) -> auto& { return c.power.dtle_count; }),
      real("power", "bit_rate", [](C& c) -> auto& { return c.power.bit_rate; }),

      integer("run", "seed", [](C& c) -> auto& { return c.run.seed; }),
      integer("run", "mc_trials", [](C& c) -> auto& { return c.run.mc_trials; }),
      {"run", "out_dir", [](C& c, const std::string& v) { c.run.out_dir = v; },
       [](const C& c) { return c.run.out_dir; }},
  };
  return table;
}

}  // namespace

void ScenarioConfig::apply(const IniDocument& doc) {
  for (const auto& [section, entries] : doc.sections()) {
    for (const auto& [key, entry] : entries) {
      const Field* f = nullptr;
      bool section_known = false;
      for (const auto& cand : fields()) {
        if (cand.section != section) continue;
        section_known = true;
        if (cand.key == key) f = &cand;
      }
      if (!section_known) throw ConfigError(entry.origin + ": unknown section [" + section + "]");
      if (!f) throw ConfigError(entry.origin + ": unknown key '" + key + "' in [" + section + "]");
      try {
        f->parse(*this, entry.value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(entry.origin + ": invalid value '" + entry.value + "' for " + section + "." +
                          key + ": " + e.what());
      }
    }
  }
  validate();
}

void ScenarioConfig::validate() const {
  try {
    gen_prbs(source.prbs_order, source.prbs_seed, 0, source.bit_rate);
    channel.spec.validate();
    effective_dtle().validate();
    if (!adc.ideal_comparators) effective_comparator().validate();
    build_ladder(adc.full_scale, adc.n_bits);
    gen_clock_phases(adc.input_clk);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid configuration: ") + what);
  };
  require(source.samples_per_bit >= 4, "source.samples_per_bit must be >= 4");
  require(source.bit_rate > 0, "source.bit_rate must be positive");
  require(source.rise_time >= 0 && source.rise_time < 1.0 / source.bit_rate, "source.rise_time must be < 1 UI");
  require(channel.target_loss_db > 0 && channel.at_freq > 0, "channel calibration target must be positive");
  require(channel.sweep_step > 0 && channel.sweep_max > 0, "channel sweep range must be positive");
  require(dtle.bode_points >= 2 && dtle.bode_f_min > 0 && dtle.bode_f_max > dtle.bode_f_min, "bad dtle bode range");
  require(pga.fill > 0 && pga.fill <= 1, "pga.fill must be in (0, 1]");
  require(metrics.n_fft >= 64 && (metrics.n_fft & (metrics.n_fft - 1)) == 0, "metrics.n_fft must be a power of two >= 64");
  require(!metrics.test_freqs.empty(), "metrics.test_freqs is empty");
  require(metrics.sweep_points >= 2, "metrics.sweep_points must be >= 2");
  require(metrics.eye_aperture > 0 && metrics.eye_aperture <= 1, "metrics.eye_aperture must be in (0, 1]");
  require(adc.kickback_v >= 0, "adc.kickback_v must be >= 0");
  require(run.mc_trials >= 100, "run.mc_trials must be >= 100");
}

std::string ScenarioConfig::canonical_text() const {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      section = f.section;
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
    }
    if (f.section == "run" && f.key == "out_dir") continue;  // location does not change results
    out += f.key + " = " + f.print(*this) + "\n";
  }
  return out;
}

ComparatorParams ScenarioConfig::effective_comparator() const {
  return calibrate_comparator ? calibrated(comparator) : comparator;
}

DtleParams ScenarioConfig::effective_dtle() const {
  DtleParams p = dtle.params;
  if (dtle.rd_from_switch) p.rd = rd_of_switch(dtle.device);
  return p;
}

ScenarioConfig scenario_from_text(const std::string& text, const std::string& source_name,
                                  const std::vector<std::string>& overrides) {
  IniDocument doc = IniDocument::parse(text, source_name);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw ConfigError("--set " + o + ": expected section.key=value");
    doc.set(trim(o.substr(0, dot)), trim(o.substr(dot + 1, eq - dot - 1)), trim(o.substr(eq + 1)),
            "--set " + o);
  }
  ScenarioConfig cfg;
  cfg.apply(doc);
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
  std::string text;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return scenario_from_text(text, path.empty() ? "<defaults>" : path, overrides);
}

}  // namespace afe
