#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace afe {

std::string sha256_hex(std::string_view data);

struct ArtifactRecord {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::size_t bytes = 0;
};

/// Writes run artifacts under one directory and keeps their hashes for the
/// manifest. Files are written in binary mode so content is byte-exact.
class ArtifactWriter {
public:
  explicit ArtifactWriter(std::filesystem::path out_dir);

  void write(const std::string& name, const std::string& content);
  const std::vector<ArtifactRecord>& records() const { return records_; }
  const std::filesystem::path& dir() const { return dir_; }

  /// manifest.json: tool, version, command, seed, config hash, files.
  void write_manifest(const std::string& command, std::uint64_t seed,
                      const std::string& config_sha256) const;

private:
  std::filesystem::path dir_;
  std::vector<ArtifactRecord> records_;
};

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool stems = false;  // vertical lines from the baseline instead of a polyline
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  double y_floor = -1e300;  // values below are clipped
};

std::string svg_plot(const std::vector<PlotSeries>& series, const PlotOptions& opt);

/// Density map: matrix[row][col], row 0 at v_lo.
std::string svg_heatmap(const std::vector<std::vector<unsigned>>& matrix, double x_span,
                        double v_lo, double v_hi, const PlotOptions& opt);

}  // namespace afe
