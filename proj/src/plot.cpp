#include "bohmkit/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bohmkit/error.hpp"

namespace bohmkit {

namespace {

constexpr double kW = 720.0, kH = 480.0;
constexpr double kLeft = 80.0, kRight = 170.0, kTop = 40.0, kBottom = 60.0;

std::string num(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s(buf);
  return s == "-0.00" ? "0.00" : s;
}

std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// 1, 2 or 5 times a power of ten, giving about n intervals
double nice_step(double span, int n) {
  const double raw = span / n;
  const double p = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * p >= raw) return m * p;
  return 10.0 * p;
}

std::string shade(double f) {
  f = std::clamp(f, 0.0, 1.0);
  const int r = int(std::lround(255 - 215 * f)), g = int(std::lround(255 - 170 * f)), b = int(std::lround(255 - 80 * f));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

SvgPlot::SvgPlot(PlotMeta meta, std::string x_label, std::string y_label)
    : meta_(std::move(meta)), xl_(std::move(x_label)), yl_(std::move(y_label)) {}

void SvgPlot::add_line(LineSeries s) {
  detail::require(s.x.size() == s.y.size(), "series x and y differ in length");
  lines_.push_back(std::move(s));
}

void SvgPlot::add_paths(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y,
                        const std::string& color, double width) {
  detail::require(x.size() == y.size(), "path x and y differ in count");
  for (std::size_t i = 0; i < x.size(); ++i) {
    LineSeries s;
    s.x = x[i];
    s.y = y[i];
    s.color = color;
    s.width = width;
    add_line(std::move(s));
  }
}

void SvgPlot::set_raster(Raster r) {
  detail::require(r.v.size() == r.nx * r.ny, "raster size mismatch");
  raster_ = std::move(r);
}

void SvgPlot::set_limits(double x0, double x1, double y0, double y1) {
  detail::require(x1 > x0 && y1 > y0, "empty plot limits");
  has_limits_ = true;
  lim_[0] = x0, lim_[1] = x1, lim_[2] = y0, lim_[3] = y1;
}

std::string SvgPlot::render() const {
  const bool any = std::any_of(lines_.begin(), lines_.end(), [](const LineSeries& s) { return !s.x.empty(); });
  if (!any && raster_.v.empty()) throw InvalidArgument("plot has no series to draw");
  double x0, x1, y0, y1;
  if (has_limits_) {
    x0 = lim_[0], x1 = lim_[1], y0 = lim_[2], y1 = lim_[3];
  } else {
    x0 = y0 = 1e300;
    x1 = y1 = -1e300;
    for (const auto& s : lines_)
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        x0 = std::min(x0, s.x[i]), x1 = std::max(x1, s.x[i]);
        y0 = std::min(y0, s.y[i]), y1 = std::max(y1, s.y[i]);
      }
    if (!raster_.v.empty()) {
      x0 = std::min(x0, raster_.x0), x1 = std::max(x1, raster_.x1);
      y0 = std::min(y0, raster_.y0), y1 = std::max(y1, raster_.y1);
    }
    if (x1 <= x0) x0 -= 0.5, x1 += 0.5;
    if (y1 <= y0) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.04 * (y1 - y0);
    y0 -= pad, y1 += pad;
  }
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto X = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto Y = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 "
    << kW << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<metadata>{\"config_hash\":\"" << escape(meta_.config_hash) << "\",\"seed\":" << meta_.seed
    << ",\"title\":\"" << escape(meta_.title) << "\"}</metadata>\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<clipPath id=\"plot\"><rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
    << "\" height=\"" << num(ph) << "\"/></clipPath>\n";

  if (!raster_.v.empty()) {
    const double top = *std::max_element(raster_.v.begin(), raster_.v.end());
    const double cw = (raster_.x1 - raster_.x0) / double(raster_.nx), ch = (raster_.y1 - raster_.y0) / double(raster_.ny);
    o << "<g clip-path=\"url(#plot)\" shape-rendering=\"crispEdges\">\n";
    for (std::size_t iy = 0; iy < raster_.ny; ++iy)
      for (std::size_t ix = 0; ix < raster_.nx; ++ix) {
        const double f = top > 0.0 ? std::sqrt(std::max(0.0, raster_.v[iy * raster_.nx + ix] / top)) : 0.0;
        if (f < 0.02) continue;
        const double xa = raster_.x0 + cw * double(ix), ya = raster_.y0 + ch * double(iy + 1);
        o << "<rect x=\"" << num(X(xa)) << "\" y=\"" << num(Y(ya)) << "\" width=\"" << num(X(xa + cw) - X(xa) + 0.3)
          << "\" height=\"" << num(Y(ya - ch) - Y(ya) + 0.3) << "\" fill=\"" << shade(f) << "\"/>\n";
      }
    o << "</g>\n";
  }

  // axes and ticks
  o << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  const double sx = nice_step(x1 - x0, 6), sy = nice_step(y1 - y0, 5);
  for (double t = std::ceil(x0 / sx) * sx; t <= x1 + 1e-9 * sx; t += sx) {
    o << "<line x1=\"" << num(X(t)) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(X(t)) << "\" y2=\""
      << num(kTop + ph + 5) << "\" stroke=\"black\"/>";
    o << "<text x=\"" << num(X(t)) << "\" y=\"" << num(kTop + ph + 19) << "\" text-anchor=\"middle\">"
      << tick_label(t) << "</text>\n";
  }
  for (double t = std::ceil(y0 / sy) * sy; t <= y1 + 1e-9 * sy; t += sy) {
    o << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(Y(t)) << "\" x2=\"" << num(kLeft) << "\" y2=\""
      << num(Y(t)) << "\" stroke=\"black\"/>";
    o << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(Y(t) + 4) << "\" text-anchor=\"end\">" << tick_label(t)
      << "</text>\n";
  }
  o << "<text x=\"" << num(kLeft + 0.5 * pw) << "\" y=\"" << num(kH - 15) << "\" text-anchor=\"middle\">"
    << escape(xl_) << "</text>\n";
  o << "<text transform=\"translate(20," << num(kTop + 0.5 * ph) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(yl_) << "</text>\n";
  o << "<text x=\"" << num(kLeft + 0.5 * pw) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(meta_.title) << "</text>\n";

  o << "<g clip-path=\"url(#plot)\" fill=\"none\">\n";
  for (const auto& s : lines_) {
    if (s.x.empty()) continue;
    if (s.markers) {
      o << "<g fill=\"" << s.color << "\">";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
          o << "<circle cx=\"" << num(X(s.x[i])) << "\" cy=\"" << num(Y(s.y[i])) << "\" r=\"2\"/>";
      o << "</g>\n";
      continue;
    }
    o << "<polyline stroke=\"" << s.color << "\" stroke-width=\"" << num(s.width) << "\"";
    if (s.dashed) o << " stroke-dasharray=\"6,4\"";
    o << " points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      o << (first ? "" : " ") << num(X(s.x[i])) << ',' << num(Y(s.y[i]));
      first = false;
    }
    o << "\"/>\n";
  }
  o << "</g>\n";

  // legend
  double ly = kTop + 10;
  for (const auto& s : lines_) {
    if (s.label.empty()) continue;
    const double lx = kW - kRight + 12;
    if (s.markers)
      o << "<circle cx=\"" << num(lx + 12) << "\" cy=\"" << num(ly) << "\" r=\"3\" fill=\"" << s.color << "\"/>";
    else
      o << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 24) << "\" y2=\"" << num(ly)
        << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
        << "/>";
    o << "<text x=\"" << num(lx + 30) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.label) << "</text>\n";
    ly += 18;
  }
  o << "</svg>\n";
  return o.str();
}

void SvgPlot::write(const std::filesystem::path& path) const {
  const std::string s = render();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << s;
}

LineSeries histogram_series(const std::vector<double>& samples, double lo, double hi, std::size_t bins,
                            std::string label, std::string color) {
  detail::require(hi > lo && bins >= 1, "histogram needs hi > lo and at least one bin");
  std::vector<double> count(bins, 0.0);
  const double w = (hi - lo) / double(bins);
  for (double s : samples) {
    if (!(s >= lo && s < hi)) continue;
    count[std::min(bins - 1, std::size_t((s - lo) / w))] += 1.0;
  }
  LineSeries out;
  out.label = std::move(label);
  out.color = std::move(color);
  const double norm = samples.empty() ? 0.0 : 1.0 / (double(samples.size()) * w);
  for (std::size_t b = 0; b < bins; ++b) {
    // flat-topped steps
    out.x.push_back(lo + w * double(b));
    out.y.push_back(count[b] * norm);
    out.x.push_back(lo + w * double(b + 1));
    out.y.push_back(count[b] * norm);
  }
  return out;
}

}  // namespace bohmkit
