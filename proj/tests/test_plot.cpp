#include <doctest.h>

#include <string>

#include "bohmkit/error.hpp"
#include "bohmkit/plot.hpp"

using namespace bohmkit;

namespace {

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

LineSeries diagonal() {
  LineSeries s;
  s.label = "diag";
  s.x = {0.0, 1.0};
  s.y = {0.0, 1.0};
  return s;
}

}  // namespace

TEST_CASE("empty plot refuses to render") {
  SvgPlot p({"t", "abc", 1}, "x", "y");
  CHECK_THROWS_AS(p.render(), InvalidArgument);
  p.add_line(LineSeries{});
  CHECK_THROWS_AS(p.render(), InvalidArgument);
}

TEST_CASE("metadata, determinism and path count") {
  auto make = [] {
    SvgPlot p({"title <1>", "00ff00ff00ff00ff", 42}, "x", "y");
    p.add_line(diagonal());
    p.add_paths({{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}, {{0.1, 0.2}, {0.3, 0.4}, {0.5, 0.6}});
    return p;
  };
  const SvgPlot a = make();
  CHECK(a.path_count() == 4);
  const std::string s = a.render();
  CHECK(s == make().render());
  CHECK(s.find("<metadata>{\"config_hash\":\"00ff00ff00ff00ff\",\"seed\":42,\"title\":\"title &lt;1&gt;\"}</metadata>") !=
        std::string::npos);
  CHECK(count(s, "<polyline") == 4);
  // only labelled series reach the legend
  CHECK(count(s, ">diag</text>") == 1);
}

TEST_CASE("fixed limits map data to the plot box corners") {
  SvgPlot p({"", "", 0}, "x", "y");
  p.add_line(diagonal());
  p.set_limits(0.0, 1.0, 0.0, 1.0);
  // plot box: x in [80, 550], y in [40, 420] on the 720 x 480 canvas
  CHECK(p.render().find("points=\"80.00,420.00 550.00,40.00\"") != std::string::npos);
  CHECK_THROWS_AS(p.set_limits(1.0, 0.0, 0.0, 1.0), InvalidArgument);
}

TEST_CASE("series validation") {
  SvgPlot p({"", "", 0}, "x", "y");
  LineSeries bad;
  bad.x = {1.0, 2.0};
  bad.y = {1.0};
  CHECK_THROWS_AS(p.add_line(bad), InvalidArgument);
  Raster r;
  r.nx = 2, r.ny = 2;
  r.v = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(p.set_raster(r), InvalidArgument);
  r.v.push_back(4.0);
  p.set_raster(r);
  // a raster alone is drawable
  CHECK(count(p.render(), "<rect x=") >= 4);
}

TEST_CASE("histogram series is a unit-area density") {
  const std::vector<double> s{0.1, 0.2, 0.25, 0.7, 0.9, 0.95, 0.99, 0.5};
  const LineSeries h = histogram_series(s, 0.0, 1.0, 4, "h", "#000000");
  REQUIRE(h.x.size() == 8);
  double area = 0.0;
  for (std::size_t i = 0; i < h.x.size(); i += 2) area += h.y[i] * (h.x[i + 1] - h.x[i]);
  CHECK(area == doctest::Approx(1.0));
  CHECK(h.y[0] == doctest::Approx(2.0 / (8.0 * 0.25)));  // 0.1 and 0.2; 0.25 opens the next bin
  CHECK(h.y[2] == doctest::Approx(1.0 / (8.0 * 0.25)));
  CHECK(h.y[6] == doctest::Approx(3.0 / (8.0 * 0.25)));
  // out-of-range samples still count in the normalization
  const LineSeries o = histogram_series({0.5, 2.0}, 0.0, 1.0, 1, "", "#000000");
  CHECK(o.y[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(histogram_series(s, 1.0, 0.0, 4, "", ""), InvalidArgument);
}
