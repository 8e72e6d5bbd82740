#include "afe/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "json.hpp"
#include <openssl/evp.h>

#include "afe/error.hpp"

namespace afe {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path out_dir) : dir_(std::move(out_dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir_.string() + ": " + ec.message());
}

void ArtifactWriter::write(const std::string& name, const std::string& content) {
  const auto path = dir_ / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
  records_.push_back({name, sha256_hex(content), content.size()});
}

void ArtifactWriter::write_manifest(const std::string& command, std::uint64_t seed,
                                    const std::string& config_sha256) const {
  nlohmann::ordered_json j;
  j["tool"] = "afe_sim";
  j["version"] = AFE_VERSION;
  j["command"] = command;
  j["seed"] = seed;
  j["config_sha256"] = config_sha256;
  auto files = nlohmann::ordered_json::array();
  for (const auto& r : records_) files.push_back({{"path", r.path}, {"sha256", r.sha256}, {"bytes", r.bytes}});
  j["files"] = files;
  std::ofstream out(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write manifest.json");
}

namespace {

constexpr double kW = 720, kH = 440, kL = 80, kR = 20, kT = 40, kB = 60;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

const char* kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string header(const PlotOptions& opt) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kW) + "\" height=\"" +
                  num(kH) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kW / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
       escape(opt.title) + "</text>\n";
  s += "<text x=\"" + num(kL + (kW - kL - kR) / 2) + "\" y=\"" + num(kH - 15) +
       "\" text-anchor=\"middle\">" + escape(opt.x_label) + "</text>\n";
  s += "<text transform=\"translate(18," + num(kT + (kH - kT - kB) / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">" + escape(opt.y_label) + "</text>\n";
  s += "<rect x=\"" + num(kL) + "\" y=\"" + num(kT) + "\" width=\"" + num(kW - kL - kR) + "\" height=\"" +
       num(kH - kT - kB) + "\" fill=\"none\" stroke=\"black\"/>\n";
  return s;
}

void axis_ticks(std::string& s, double x0, double x1, double y0, double y1, bool log_x) {
  for (int i = 0; i <= 4; ++i) {
    const double fx = i / 4.0;
    const double px = kL + fx * (kW - kL - kR);
    const double xv = log_x ? std::pow(10.0, x0 + fx * (x1 - x0)) : x0 + fx * (x1 - x0);
    s += "<text x=\"" + num(px) + "\" y=\"" + num(kH - kB + 16) + "\" text-anchor=\"middle\">" + label(xv) +
         "</text>\n";
    const double py = kH - kB - fx * (kH - kT - kB);
    s += "<text x=\"" + num(kL - 6) + "\" y=\"" + num(py + 4) + "\" text-anchor=\"end\">" +
         label(y0 + fx * (y1 - y0)) + "</text>\n";
  }
}

}  // namespace

std::string svg_plot(const std::vector<PlotSeries>& series, const PlotOptions& opt) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto tx = [&](double x) { return opt.log_x ? std::log10(std::max(x, 1e-300)) : x; };
  auto ty = [&](double y) { return std::max(y, opt.y_floor); };
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
    if (s.stems) y0 = std::min(y0, 0.0 > opt.y_floor ? y0 : opt.y_floor);
  }
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) { y0 -= 0.5; y1 += 0.5; }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return kL + (tx(x) - x0) / (x1 - x0) * (kW - kL - kR); };
  auto py = [&](double y) { return kH - kB - (ty(y) - y0) / (y1 - y0) * (kH - kT - kB); };

  std::string s = header(opt);
  axis_ticks(s, x0, x1, y0, y1, opt.log_x);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& ser = series[k];
    const char* colour = kColours[k % 6];
    if (ser.stems) {
      const double base = py(std::max(y0, opt.y_floor));
      for (std::size_t i = 0; i < ser.x.size(); ++i)
        s += "<line x1=\"" + num(px(ser.x[i])) + "\" y1=\"" + num(base) + "\" x2=\"" + num(px(ser.x[i])) +
             "\" y2=\"" + num(py(ser.y[i])) + "\" stroke=\"" + colour + "\"/>\n";
    } else {
      s += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" points=\"";
      for (std::size_t i = 0; i < ser.x.size(); ++i) s += num(px(ser.x[i])) + "," + num(py(ser.y[i])) + " ";
      s += "\"/>\n";
    }
    if (!ser.name.empty())
      s += "<text x=\"" + num(kW - kR - 8) + "\" y=\"" + num(kT + 16 + 14 * k) + "\" text-anchor=\"end\" fill=\"" +
           colour + "\">" + escape(ser.name) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string svg_heatmap(const std::vector<std::vector<unsigned>>& matrix, double x_span, double v_lo,
                        double v_hi, const PlotOptions& opt) {
  std::string s = header(opt);
  axis_ticks(s, 0.0, x_span, v_lo, v_hi, false);
  if (matrix.empty() || matrix.front().empty()) return s + "</svg>\n";
  unsigned peak = 1;
  for (const auto& row : matrix)
    for (unsigned c : row) peak = std::max(peak, c);
  const double cw = (kW - kL - kR) / static_cast<double>(matrix.front().size());
  const double ch = (kH - kT - kB) / static_cast<double>(matrix.size());
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    for (std::size_t c = 0; c < matrix[r].size(); ++c) {
      if (!matrix[r][c]) continue;
      const double a = std::sqrt(static_cast<double>(matrix[r][c]) / peak);
      const int shade = static_cast<int>(std::lround(230 * (1.0 - a)));
      char fill[16];
      std::snprintf(fill, sizeof fill, "#%02x%02xff", shade, shade);
      s += "<rect x=\"" + num(kL + c * cw) + "\" y=\"" + num(kH - kB - (r + 1) * ch) + "\" width=\"" + num(cw) +
           "\" height=\"" + num(ch) + "\" fill=\"" + fill + "\"/>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

}  // namespace afe
