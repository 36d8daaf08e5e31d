#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "bohmkit/error.hpp"
#include "bohmkit/field_io.hpp"
#include "bohmkit/scenario.hpp"

using namespace bohmkit;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::string config_error(const json& doc) {
  try {
    parse_scenario_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

// a small free-packet run that finishes in well under a second
json tiny_free() {
  json d = scenario_defaults("free_packet");
  d["integrator"]["t_end"] = 2.0;
  d["ensemble"]["M"] = 50;
  d["outputs"]["checkpoint_every"] = 0.5;
  return d;
}

fs::path fresh(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("every scenario's defaults are a valid config") {
  const auto ids = scenario_ids();
  CHECK(ids.size() == 7);
  for (const auto& id : ids) {
    const json d = scenario_defaults(id);
    CHECK(d["schema_version"] == kScenarioSchemaVersion);
    const ScenarioConfig c = parse_scenario_config(d);
    CHECK(c.scenario == id);
    CHECK(c.document() == d);
    CHECK(c.hash().size() == 16);
  }
}

TEST_CASE("unknown scenario id lists the valid ones") {
  const std::string msg = config_error({{"schema_version", 1}, {"scenario", "tripple_slit"}});
  CHECK(msg.find("tripple_slit") != std::string::npos);
  for (const auto& id : scenario_ids()) CHECK(msg.find(id) != std::string::npos);
  CHECK(config_error({{"schema_version", 1}}).find("double_slit") != std::string::npos);
}

TEST_CASE("schema problems are reported together") {
  json d = scenario_defaults("barrier_tunneling");
  d["schema_version"] = 2;
  d["grid"]["pionts"] = 10;
  d["grid"]["points"] = 4096.5;
  d["initial_state"]["k0"] = "fast";
  d["integrator"]["method"] = true;
  const std::string msg = config_error(d);
  CHECK(msg.find("schema_version") != std::string::npos);
  CHECK(msg.find("/grid/pionts: unknown key") != std::string::npos);
  CHECK(msg.find("/grid/points: expected a non-negative integer") != std::string::npos);
  CHECK(msg.find("/initial_state/k0: expected a number") != std::string::npos);
  CHECK(msg.find("/integrator/method: expected a string") != std::string::npos);

  json e = scenario_defaults("barrier_tunneling");
  e.erase("schema_version");
  CHECK(config_error(e).find("missing schema_version") != std::string::npos);

  json f = scenario_defaults("barrier_tunneling");
  f["integrator"]["method"] = "leapfrog";
  f["grid"]["hi"] = -300.0;
  f["units"] = "furlongs";
  const std::string m2 = config_error(f);
  CHECK(m2.find("split_operator or crank_nicolson") != std::string::npos);
  CHECK(m2.find("/grid/lo must be below /grid/hi") != std::string::npos);
  CHECK(m2.find("/units") != std::string::npos);

  json g = scenario_defaults("free_packet");
  g["integrator"]["t_end"] = 20.005;
  CHECK(config_error(g).find("whole number of steps") != std::string::npos);
}

TEST_CASE("partial configs merge onto the defaults") {
  const ScenarioConfig c = parse_scenario_config(
      {{"schema_version", 1}, {"scenario", "double_slit"}, {"description", "narrow"}, {"initial_state", {{"sigma_y", 0.5}}}});
  CHECK(c.at("/initial_state/sigma_y").get<double>() == 0.5);
  CHECK(c.at("/initial_state/separation").get<double>() == 12.0);
  // the description is not part of the hash
  json plain = scenario_defaults("double_slit");
  plain["initial_state"]["sigma_y"] = 0.5;
  CHECK(parse_scenario_config(plain).hash() == c.hash());
  CHECK(parse_scenario_config(scenario_defaults("double_slit")).hash() != c.hash());
}

TEST_CASE("values convert to internal units by kind") {
  // independent unit sizes from CODATA: E = hbar^2 / (m_e nm^2), t = hbar / E
  const double E = codata::hbar_c_eV_nm * codata::hbar_c_eV_nm / codata::electron_mass_eV;
  const double T = codata::hbar_eV_fs / E;
  CHECK(E == doctest::Approx(0.0762).epsilon(1e-3));
  CHECK(T == doctest::Approx(8.638).epsilon(1e-3));

  const ScenarioConfig w = parse_scenario_config(scenario_defaults("infinite_well_momentum"));
  CHECK(w.units == UnitSystem::ev_nm_fs);
  CHECK(w.internal("/integrator/t_release") == doctest::Approx(1000.0 / T).epsilon(1e-9));
  CHECK(w.internal("/grid/L") == 100.0);

  const ScenarioConfig c = parse_scenario_config(scenario_defaults("two_electron_conditional"));
  CHECK(c.internal("/potential/F") == doctest::Approx(1e-6 / E).epsilon(1e-9));
  CHECK(c.internal("/initial_state/particle_1/energy") == doctest::Approx(0.06 / E).epsilon(1e-9));
  CHECK(c.internal("/initial_state/particle_2/center") == -50.0);

  json h = scenario_defaults("harmonic_coherent");
  h["units"] = "ev_nm_fs";
  h["potential"]["omega"] = 0.1;  // 1/fs
  CHECK(parse_scenario_config(h).internal("/potential/omega") == doctest::Approx(0.1 * T).epsilon(1e-9));
  CHECK(parse_scenario_config(h).internal("/integrator/periods") == 2.0);
}

TEST_CASE("overrides are applied and re-validated") {
  const ScenarioConfig c = parse_scenario_config(tiny_free());
  RunOverrides o;
  o.seed = 7;
  const ScenarioConfig s = apply_overrides(c, o);
  CHECK(s.seed() == 7);
  CHECK(s.hash() != c.hash());
  o.checkpoint_every = -1.0;
  CHECK_THROWS_AS(apply_overrides(c, o), ConfigError);
}

TEST_CASE("free packet bundle is complete and byte-reproducible") {
  const ScenarioConfig c = parse_scenario_config(tiny_free());
  const auto a = fresh("bohmkit_scenario_a"), b = fresh("bohmkit_scenario_b");
  const ScenarioReport ra = run_scenario(c, a);
  run_scenario(c, b);
  CHECK(ra.passed());
  CHECK(ra.config_hash == c.hash());
  for (const char* f : {"config.json", "report.json", "width.csv", "trajectories.csv", "width.svg", "trajectories.svg"}) {
    CHECK(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const json rep = json::parse(slurp(a / "report.json"));
  CHECK(rep["passed"] == true);
  CHECK(rep["config_hash"] == c.hash());
  CHECK(rep["checks"].size() == ra.checks.size());

  const std::string svg = slurp(a / "trajectories.svg");
  CHECK(svg.find("\"config_hash\":\"" + c.hash() + "\",\"seed\":1") != std::string::npos);
  CHECK(count(svg, "<polyline") == 50);  // every member, below the plotting cap

  // a new seed changes the ensemble but not the field
  RunOverrides o;
  o.seed = 2;
  const auto d = fresh("bohmkit_scenario_c");
  run_scenario(apply_overrides(c, o), d);
  CHECK(slurp(d / "width.csv") == slurp(a / "width.csv"));
  CHECK(slurp(d / "trajectories.csv") != slurp(a / "trajectories.csv"));
}

TEST_CASE("output switches: trajectory limit, tables, plots, fields") {
  json d = tiny_free();
  d["outputs"]["trajectory_limit"] = 10;
  d["outputs"]["plots"] = false;
  d["outputs"]["fields"] = true;
  const auto dir = fresh("bohmkit_scenario_d");
  const ScenarioReport r = run_scenario(parse_scenario_config(d), dir);
  // 5 records (t = 0, 0.5, ..., 2) of 10 members plus the header
  const std::string csv = slurp(dir / "trajectories.csv");
  CHECK(count(csv, "\n") == 1 + 5 * 10);
  CHECK_FALSE(fs::exists(dir / "width.svg"));
  const WaveFunction f = read_field_dump(dir / "final_field");
  CHECK(f.size() == 1024);
  CHECK(f.time() == doctest::Approx(2.0));
  CHECK(std::find(r.files.begin(), r.files.end(), "final_field.bin") != r.files.end());

  d["outputs"]["tables"] = false;
  const auto dir2 = fresh("bohmkit_scenario_e");
  run_scenario(parse_scenario_config(d), dir2);
  CHECK_FALSE(fs::exists(dir2 / "width.csv"));
  CHECK(fs::exists(dir2 / "report.json"));
}

TEST_CASE("module preconditions surface as config errors") {
  json d = scenario_defaults("infinite_well_momentum");
  d["integrator"]["t_flight"] = 200.0;
  d["ensemble"]["M"] = 20;
  d["grid"]["free_points"] = 4096;
  const auto dir = fresh("bohmkit_scenario_f");
  try {
    run_scenario(parse_scenario_config(d), dir);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("infinite_well_momentum") != std::string::npos);
    CHECK(std::string(e.what()).find("flight time too short") != std::string::npos);
  }
}

TEST_CASE("asymmetric slits skip the non-mixing check with a warning") {
  json d = scenario_defaults("double_slit");
  d["grid"]["points_x"] = 128;
  d["grid"]["points_y"] = 128;
  d["initial_state"]["sigma_y"] = 1.2;
  d["integrator"]["t_end"] = 1.0;
  d["ensemble"]["M"] = 200;
  d["initial_state"]["lower_amplitude"] = 0.5;
  d["outputs"]["plots"] = false;
  d["outputs"]["tables"] = false;
  const auto dir = fresh("bohmkit_scenario_g");
  const ScenarioReport r = run_scenario(parse_scenario_config(d), dir);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("asymmetric") != std::string::npos);
  for (const auto& c : r.checks) CHECK(c.name != "non_mixing_fraction");
  CHECK(r.metrics["symmetric"] == false);
}
