#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bohmkit {

/// Embedded in every SVG as a <metadata> block.
struct PlotMeta {
  std::string title;
  std::string config_hash;
  std::uint64_t seed = 0;
};

struct LineSeries {
  std::string label;                 // empty: not listed in the legend
  std::vector<double> x, y;
  std::string color = "#1f4e9c";
  bool dashed = false;
  double width = 1.5;
  bool markers = false;              // dots instead of a polyline
};

/// Cell values on a regular lattice, v[iy * nx + ix], drawn as a grey-blue
/// colormap under the lines.
struct Raster {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  std::size_t nx = 0, ny = 0;
  std::vector<double> v;
};

/// Minimal deterministic SVG line plot: fixed canvas, linear axes with
/// ticks, optional raster underlay, legend. Equal inputs give equal bytes.
class SvgPlot {
 public:
  SvgPlot(PlotMeta meta, std::string x_label, std::string y_label);

  void add_line(LineSeries s);
  /// Unlabelled thin paths, e.g. a trajectory bundle.
  void add_paths(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y,
                 const std::string& color = "#333333", double width = 0.6);
  void set_raster(Raster r);
  /// Fixes the axis ranges instead of fitting the data.
  void set_limits(double x0, double x1, double y0, double y1);

  std::size_t path_count() const { return lines_.size(); }
  /// Throws InvalidArgument when there is nothing to draw.
  std::string render() const;
  void write(const std::filesystem::path& path) const;

 private:
  PlotMeta meta_;
  std::string xl_, yl_;
  std::vector<LineSeries> lines_;
  Raster raster_{};
  bool has_limits_ = false;
  double lim_[4]{};
};

/// Counts of samples in `bins` equal bins over [lo, hi], returned as a
/// density (normalized to unit area over all samples) at the bin centres.
LineSeries histogram_series(const std::vector<double>& samples, double lo, double hi, std::size_t bins,
                            std::string label, std::string color);

}  // namespace bohmkit
