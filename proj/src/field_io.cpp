#include "bohmkit/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "bohmkit/error.hpp"

namespace bohmkit {

namespace {

void put_le(std::ostream& os, double d) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(d);
  unsigned char buf[8];
  for (int b = 0; b < 8; ++b) buf[b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xffu);
  os.write(reinterpret_cast<const char*>(buf), 8);
}

double get_le(const unsigned char* buf) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= std::uint64_t(buf[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

std::filesystem::path with_ext(const std::filesystem::path& base, const char* ext) {
  return std::filesystem::path(base.string() + ext);
}

}  // namespace

void write_field_dump(const WaveFunction& wf, const std::filesystem::path& base, UnitSystem units) {
  const Grid& g = wf.grid();
  nlohmann::json h;
  h["dims"] = g.dims();
  h["points"] = nlohmann::json::array();
  h["spacing"] = nlohmann::json::array();
  h["origin"] = nlohmann::json::array();
  for (int a = 0; a < g.dims(); ++a) {
    h["points"].push_back(g.points(a));
    h["spacing"].push_back(g.spacing(a));
    h["origin"].push_back(g.origin(a));
  }
  h["time"] = wf.time();
  h["units"] = std::string(to_string(units));
  h["boundary"] = std::string(to_string(g.boundary()));
  h["hbar"] = wf.hbar();
  h["mass"] = {wf.mass(0), wf.mass(1)};
  if (g.boundary() == Boundary::absorbing)
    h["cap"] = {{"width_cells", g.cap().width_cells}, {"strength", g.cap().strength}};

  std::ofstream js(with_ext(base, ".json"));
  if (!js) throw Error("cannot write " + with_ext(base, ".json").string());
  js << h.dump(1) << '\n';

  std::ofstream bin(with_ext(base, ".bin"), std::ios::binary);
  if (!bin) throw Error("cannot write " + with_ext(base, ".bin").string());
  for (auto z : wf.values()) {
    put_le(bin, z.real());
    put_le(bin, z.imag());
  }
}

WaveFunction read_field_dump(const std::filesystem::path& base) {
  std::ifstream js(with_ext(base, ".json"));
  if (!js) throw Error("cannot read " + with_ext(base, ".json").string());
  const auto h = nlohmann::json::parse(js);
  GridSpec spec;
  const int dims = h.at("dims").get<int>();
  for (int a = 0; a < dims; ++a) {
    const auto n = h.at("points").at(a).get<std::size_t>();
    const double dx = h.at("spacing").at(a).get<double>();
    const double lo = h.at("origin").at(a).get<double>();
    spec.axes.push_back(AxisSpec{lo, lo + dx * double(n - 1), n});
  }
  spec.boundary = parse_boundary(h.value("boundary", std::string("periodic")));
  if (h.contains("cap")) {
    spec.cap.width_cells = h["cap"].at("width_cells").get<std::size_t>();
    spec.cap.strength = h["cap"].at("strength").get<double>();
  }
  Grid g = make_grid(spec);
  Constants c;
  c.hbar = h.value("hbar", 1.0);
  if (h.contains("mass")) c.mass = {h["mass"].at(0).get<double>(), h["mass"].at(1).get<double>()};

  std::ifstream bin(with_ext(base, ".bin"), std::ios::binary);
  if (!bin) throw Error("cannot read " + with_ext(base, ".bin").string());
  std::vector<cplx> v(g.size());
  unsigned char buf[16];
  for (auto& z : v) {
    if (!bin.read(reinterpret_cast<char*>(buf), 16)) throw Error("field dump truncated");
    z = cplx(get_le(buf), get_le(buf + 8));
  }
  return WaveFunction(g, std::move(v), h.at("time").get<double>(), c);
}

}  // namespace bohmkit
