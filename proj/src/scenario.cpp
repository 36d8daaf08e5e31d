#include "bohmkit/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "bohmkit/conditional.hpp"
#include "bohmkit/error.hpp"
#include "bohmkit/experiments.hpp"
#include "bohmkit/field_io.hpp"
#include "bohmkit/plot.hpp"
#include "bohmkit/propagators.hpp"
#include "bohmkit/sap.hpp"

namespace bohmkit {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

class Output;
using CheckFn = void (*)(const ScenarioConfig&, std::vector<std::string>&);
using RunFn = void (*)(const ScenarioConfig&, Output&, ScenarioReport&);

struct Definition {
  std::string id;
  UnitSystem units;
  json defaults;  // every section; doubles as the schema
  std::map<std::string, Quantity> kinds;
  CheckFn check;
  RunFn run;
};

const std::vector<Definition>& registry();

const Definition* find_definition(const std::string& id) {
  for (const auto& d : registry())
    if (d.id == id) return &d;
  return nullptr;
}

std::string joined_ids() {
  std::string s;
  for (const auto& d : registry()) s += (s.empty() ? "" : ", ") + d.id;
  return s;
}

json outputs(double checkpoint_every) {
  return {{"checkpoint_every", checkpoint_every},
          {"plots", true},
          {"tables", true},
          {"fields", false},
          {"trajectory_limit", std::uint64_t(200)}};
}

json ensemble(std::uint64_t M) { return {{"M", M}, {"seed", std::uint64_t(1)}}; }

// --- schema -----------------------------------------------------------------

void check_types(const json& def, const json& user, const std::string& ptr, std::vector<std::string>& errs) {
  if (def.is_object()) {
    if (!user.is_object()) {
      errs.push_back(ptr + ": expected an object");
      return;
    }
    for (const auto& [k, v] : user.items()) {
      if (!def.contains(k)) {
        errs.push_back(ptr + "/" + k + ": unknown key");
        continue;
      }
      check_types(def.at(k), v, ptr + "/" + k, errs);
    }
    return;
  }
  if (def.is_boolean()) {
    if (!user.is_boolean()) errs.push_back(ptr + ": expected true or false");
  } else if (def.is_string()) {
    if (!user.is_string()) errs.push_back(ptr + ": expected a string");
  } else if (def.is_number_unsigned()) {
    if (!user.is_number_integer() || (!user.is_number_unsigned() && user.get<long long>() < 0))
      errs.push_back(ptr + ": expected a non-negative integer");
  } else if (def.is_number_integer()) {
    if (!user.is_number_integer()) errs.push_back(ptr + ": expected an integer");
  } else if (def.is_number()) {
    if (!user.is_number()) errs.push_back(ptr + ": expected a number");
  } else if (def.is_array()) {
    const bool ok = user.is_array() && !user.empty() &&
                    std::all_of(user.begin(), user.end(), [](const json& e) { return e.is_number(); });
    if (!ok) errs.push_back(ptr + ": expected a non-empty array of numbers");
  }
}

double num(const ScenarioConfig& c, const std::string& ptr) { return c.at(ptr).get<double>(); }

void positive(const ScenarioConfig& c, std::vector<std::string>& errs, std::initializer_list<const char*> ptrs) {
  for (const char* p : ptrs)
    if (!(num(c, p) > 0.0)) errs.push_back(std::string(p) + ": must be positive");
}

void at_least(const ScenarioConfig& c, std::vector<std::string>& errs, const char* ptr, double lo) {
  if (num(c, ptr) < lo) errs.push_back(std::string(ptr) + ": must be at least " + json(lo).dump());
}

void ordered(const ScenarioConfig& c, std::vector<std::string>& errs, const char* lo, const char* hi) {
  if (!(num(c, lo) < num(c, hi))) errs.push_back(std::string(lo) + " must be below " + hi);
}

// t_end must be a whole number of steps
void whole_steps(const ScenarioConfig& c, std::vector<std::string>& errs, const char* t, const char* dt) {
  const double n = num(c, t) / num(c, dt);
  if (!(num(c, dt) > 0.0) || !std::isfinite(n)) return;
  if (std::abs(n - std::round(n)) > 1e-6 * std::max(1.0, n))
    errs.push_back(std::string(t) + ": must be a whole number of steps " + dt);
}

void common_checks(const ScenarioConfig& c, std::vector<std::string>& errs) {
  if (num(c, "/outputs/checkpoint_every") < 0.0) errs.push_back("/outputs/checkpoint_every: must not be negative");
  at_least(c, errs, "/ensemble/M", 1);
}

std::size_t steps(double t_end, double dt) { return std::size_t(std::llround(t_end / dt)); }

// --- report helpers ------------------------------------------------------------

void below(ScenarioReport& r, std::string name, double v, double limit) {
  r.checks.push_back({std::move(name), v < limit, v, limit, "<"});
}
void above(ScenarioReport& r, std::string name, double v, double limit) {
  r.checks.push_back({std::move(name), v > limit, v, limit, ">"});
}

/// Largest backwards step between 1D members adjacent in starting order,
/// over every record. Members that exited are left out.
double ordering_violation(const TrajectoryEnsemble& e) {
  if (e.times.empty() || e.spatial_dims != 1 || e.particles != 1) return 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t a = 0; a < e.size(); ++a)
    if (!e.exited(a)) idx.push_back(a);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return e.position_history[0][a][0] < e.position_history[0][b][0];
  });
  double worst = 0.0;
  for (const auto& row : e.position_history)
    for (std::size_t i = 1; i < idx.size(); ++i) worst = std::max(worst, row[idx[i - 1]][0] - row[idx[i]][0]);
  return worst;
}

void ordering_check(ScenarioReport& r, const TrajectoryEnsemble& e, const std::string& suffix = "") {
  const double v = ordering_violation(e);
  r.checks.push_back({"ordering_preserved" + suffix, v <= 0.0, v, 0.0, "<="});
}

TrajectoryEnsemble first_members(const TrajectoryEnsemble& e, std::size_t limit) {
  if (e.size() <= limit) return e;
  TrajectoryEnsemble t = e;
  auto cut = [&](auto& v) { v.resize(limit); };
  cut(t.position), cut(t.velocity), cut(t.flags), cut(t.exit_time);
  for (auto& row : t.position_history) cut(row);
  for (auto& row : t.velocity_history) cut(row);
  for (auto& row : t.flags_history) cut(row);
  return t;
}

class Output {
 public:
  Output(const ScenarioConfig& cfg, fs::path dir, ScenarioReport& rep)
      : units(cfg.units), dir_(std::move(dir)), rep_(rep), hash_(cfg.hash()), seed_(cfg.seed()) {
    plots = cfg.at("/outputs/plots").get<bool>();
    tables = cfg.at("/outputs/tables").get<bool>();
    fields = cfg.at("/outputs/fields").get<bool>();
    limit = cfg.at("/outputs/trajectory_limit").get<std::size_t>();
  }

  fs::path file(const std::string& name) {
    rep_.files.push_back(name);
    return dir_ / name;
  }

  PlotMeta meta(std::string title) const { return {std::move(title), hash_, seed_}; }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& cols) {
    std::ofstream os(file(name));
    if (!os) throw Error("cannot write " + (dir_ / name).string());
    for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
    os << '\n';
    const std::size_t rows = cols.empty() ? 0 : cols.front().size();
    char buf[64];
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.12g", cols[j][i]);
        os << (j ? "," : "") << buf;
      }
      os << '\n';
    }
  }

  void trajectories(const TrajectoryEnsemble& e, const std::string& stem) {
    if (!tables || limit == 0) return;
    const TrajectoryEnsemble t = first_members(e, limit);
    if (e.spatial_dims == 2)
      write_trajectories_ndjson(t, file(stem + ".ndjson"), units);
    else
      write_trajectories_csv(t, file(stem + ".csv"), units);
  }

  void plot(const SvgPlot& p, const std::string& name) {
    if (plots) p.write(file(name));
  }

  void field(const WaveFunction& wf, const std::string& stem) {
    if (!fields) return;
    write_field_dump(wf, dir_ / stem, units.system());
    rep_.files.push_back(stem + ".json");
    rep_.files.push_back(stem + ".bin");
  }

  PhysicalUnits units;
  bool plots = true, tables = true, fields = false;
  std::size_t limit = 200;

 private:
  fs::path dir_;
  ScenarioReport& rep_;
  std::string hash_;
  std::uint64_t seed_;
};

std::string time_label(const PhysicalUnits& u) {
  switch (u.system()) {
    case UnitSystem::ev_nm_fs: return "t [fs]";
    case UnitSystem::atomic: return "t [a.u.]";
    default: return "t";
  }
}

std::string length_label(const PhysicalUnits& u, const std::string& name = "x") {
  switch (u.system()) {
    case UnitSystem::ev_nm_fs: return name + " [nm]";
    case UnitSystem::atomic: return name + " [bohr]";
    default: return name;
  }
}

std::vector<double> in_time(const std::vector<double>& t, const PhysicalUnits& u) {
  std::vector<double> out(t.size());
  std::transform(t.begin(), t.end(), out.begin(), [&](double v) { return u.time_from_internal(v); });
  return out;
}

/// Bundle of 1D paths x(t), `count` members spread over the starting order.
SvgPlot path_plot(const Output& o, const TrajectoryEnsemble& e, const std::string& title, std::size_t count,
                  std::size_t component = 0) {
  SvgPlot p(o.meta(title), time_label(o.units), length_label(o.units));
  std::vector<std::size_t> idx(e.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (!e.times.empty())
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return e.position_history[0][a][component] < e.position_history[0][b][component];
    });
  const std::vector<double> t = in_time(e.times, o.units);
  count = std::min(count, idx.size());
  std::vector<std::vector<double>> xs, ys;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t a = idx[count > 1 ? i * (idx.size() - 1) / (count - 1) : 0];
    std::vector<double> y;
    for (const auto& row : e.position_history) y.push_back(row[a][component]);
    xs.push_back(t);
    ys.push_back(std::move(y));
  }
  p.add_paths(xs, ys);
  return p;
}

std::size_t plotted_paths(const Output& o) { return std::min<std::size_t>(std::max<std::size_t>(o.limit, 1), 60); }

// --- free packet -------------------------------------------------------------

void check_free(const ScenarioConfig& c, std::vector<std::string>& e) {
  ordered(c, e, "/grid/lo", "/grid/hi");
  at_least(c, e, "/grid/points", 8);
  positive(c, e, {"/initial_state/sigma", "/integrator/dt", "/integrator/t_end"});
  whole_steps(c, e, "/integrator/t_end", "/integrator/dt");
}

void run_free(const ScenarioConfig& c, Output& o, ScenarioReport& r) {
  FreePacketParams p;
  p.lo = c.internal("/grid/lo");
  p.hi = c.internal("/grid/hi");
  p.points = c.at("/grid/points").get<std::size_t>();
  p.center = c.internal("/initial_state/center");
  p.sigma = c.internal("/initial_state/sigma");
  p.k0 = c.internal("/initial_state/k0");
  p.dt = c.internal("/integrator/dt");
  p.steps = steps(c.internal("/integrator/t_end"), p.dt);
  p.M = c.at("/ensemble/M").get<std::size_t>();
  p.seed = c.seed();
  p.record_interval = c.internal("/outputs/checkpoint_every");
  const auto res = run_free_packet(p);

  below(r, "norm_drift", res.max_norm_drift, 1e-9);
  below(r, "width_relative_error", res.max_width_error, 1e-6);
  below(r, "continuity_residual", res.continuity_max, 1e-6);
  ordering_check(r, res.ensemble);
  r.metrics = {{"max_width_error", res.max_width_error},
               {"max_path_error", res.max_path_error},
               {"max_norm_drift", res.max_norm_drift},
               {"continuity_max", res.continuity_max},
               {"final_width", res.width.empty() ? 0.0 : res.width.back()}};

  const auto t = in_time(res.t, o.units);
  if (o.tables) o.csv("width.csv", {"t", "width", "width_exact"}, {t, res.width, res.width_exact});
  o.trajectories(res.ensemble, "trajectories");
  if (o.plots) {
    SvgPlot w(o.meta("packet width"), time_label(o.units), length_label(o.units, "sigma"));
    w.add_line({"exact", t, res.width_exact, "#c03020", false, 1.5, false});
    w.add_line({"grid", t, res.width, "#1f4e9c", false, 1.5, true});
    o.plot(w, "width.svg");
    o.plot(path_plot(o, res.ensemble, "free packet trajectories", plotted_paths(o)), "trajectories.svg");
  }
  o.field(res.final_state, "final_field");
}

// --- harmonic coherent state ---------------------------------------------------

void check_harmonic(const ScenarioConfig& c, std::vector<std::string>& e) {
  ordered(c, e, "/grid/lo", "/grid/hi");
  at_least(c, e, "/grid/points", 8);
  positive(c, e, {"/potential/omega", "/integrator/dt", "/integrator/periods"});
}

void run_harmonic(const ScenarioConfig& c, Output& o, ScenarioReport& r) {
  HarmonicParams p;
  p.lo = c.internal("/grid/lo");
  p.hi = c.internal("/grid/hi");
  p.points = c.at("/grid/points").get<std::size_t>();
  p.omega = c.internal("/potential/omega");
  p.displacement = c.internal("/initial_state/displacement");
  p.dt = c.internal("/integrator/dt");
  p.periods = num(c, "/integrator/periods");
  p.M = c.at("/ensemble/M").get<std::size_t>();
  p.seed = c.seed();
  p.record_interval = c.internal("/outputs/checkpoint_every");
  const auto res = run_harmonic_coherent(p);

  const double scale = std::max(1.0, std::abs(p.displacement));
  below(r, "centroid_error", res.max_centroid_error / scale, 1e-4);
  below(r, "width_change", res.max_width_change, 1e-5);
  below(r, "rigid_motion_error", res.max_rigid_error / scale, 1e-4);
  below(r, "energy_drift", res.energy_drift, 1e-5);
  ordering_check(r, res.ensemble);
  r.metrics = {{"max_centroid_error", res.max_centroid_error},
               {"max_width_change", res.max_width_change},
               {"max_rigid_error", res.max_rigid_error},
               {"energy_drift", res.energy_drift}};

  const auto t = in_time(res.t, o.units);
  if (o.tables) o.csv("centroid.csv", {"t", "mean_x", "width"}, {t, res.mean_x, res.width});
  o.trajectories(res.ensemble, "trajectories");
  if (o.plots) {
    auto pp = path_plot(o, res.ensemble, "coherent state trajectories", plotted_paths(o));
    pp.add_line({"<x>", t, res.mean_x, "#c03020", true, 2.0, false});
    o.plot(pp, "trajectories.svg");
  }
}

// --- Eckart barrier ----------------------------------------------------------------

void check_barrier(const ScenarioConfig& c, std::vector<std::string>& e) {
  ordered(c, e, "/grid/lo", "/grid/hi");
  at_least(c, e, "/grid/points", 8);
  positive(c, e, {"/potential/a", "/initial_state/sigma", "/initial_state/k0", "/integrator/dt",
                  "/integrator/t_end"});
  const std::string m = c.at("/integrator/method").get<std::string>();
  if (m != "split_operator" && m != "crank_nicolson")
    e.push_back("/integrator/method: expected split_operator or crank_nicolson");
}

void run_barrier_scenario(const ScenarioConfig& c, Output& o, ScenarioReport& r) {
  BarrierParams p;
  p.barrier = {c.internal("/potential/V0"), c.internal("/potential/a"), c.internal("/potential/center")};
  p.lo = c.internal("/grid/lo");
  p.hi = c.internal("/grid/hi");
  p.points = c.at("/grid/points").get<std::size_t>();
  p.boundary = c.at("/integrator/method").get<std::string>() == "split_operator" ? Boundary::periodic : Boundary::box;
  p.x0 = c.internal("/initial_state/center");
  p.sigma = c.internal("/initial_state/sigma");
  p.k0 = c.internal("/initial_state/k0");
  p.dt = c.internal("/integrator/dt");
  p.t_end = c.internal("/integrator/t_end");
  p.record_interval = c.internal("/outputs/checkpoint_every");
  p.M = c.at("/ensemble/M").get<std::size_t>();
  p.seed = c.seed();
  const auto res = run_barrier(p);

  below(r, "grid_vs_exact_transmission", std::abs(res.transmission_grid - res.transmission_exact), 5e-3);
  below(r, "trajectory_vs_grid_transmission", std::abs(res.transmission_trajectories - res.transmission_grid),
        3.0 * res.trajectory_stderr + 1.0 / double(p.M));
  ordering_check(r, res.ensemble);
  if (res.residual_near_barrier > 1e-3)
    r.warnings.push_back("density near the barrier at t_end is " + json(res.residual_near_barrier).dump() +
                         "; transmission not settled");
  r.metrics = {{"transmission_grid", res.transmission_grid},
               {"transmission_exact", res.transmission_exact},
               {"transmission_trajectories", res.transmission_trajectories},
               {"trajectory_stderr", res.trajectory_stderr},
               {"residual_near_barrier", res.residual_near_barrier}};

  o.trajectories(res.ensemble, "trajectories");
  if (o.tables) {
    std::vector<double> alpha, x0, xf, through;
    for (std::size_t a = 0; a < res.ensemble.size(); ++a) {
      alpha.push_back(double(a));
      x0.push_back(res.ensemble.position_history.front()[a][0]);
      xf.push_back(res.ensemble.position[a][0]);
      through.push_back(res.ensemble.position[a][0] > p.barrier.center ? 1.0 : 0.0);
    }
    o.csv("endpoints.csv", {"alpha", "x0", "x_final", "transmitted"}, {alpha, x0, xf, through});
  }
  if (o.plots) {
    auto pp = path_plot(o, res.ensemble, "Eckart barrier trajectories", plotted_paths(o));
    const auto t = in_time(res.ensemble.times, o.units);
    if (!t.empty())
      pp.add_line({"barrier", {t.front(), t.back()}, {p.barrier.center, p.barrier.center}, "#c03020", true, 1.5, false});
    o.plot(pp, "trajectories.svg");
  }
}

// --- double slit ---------------------------------------------------------------------

void check_slit(const ScenarioConfig& c, std::vector<std::string>& e) {
  ordered(c, e, "/grid/x_lo", "/grid/x_hi");
  at_least(c, e, "/grid/points_x", 8);
  at_least(c, e, "/grid/points_y", 8);
  positive(c, e, {"/grid/y_half_width", "/initial_state/sigma_x", "/initial_state/sigma_y",
                  "/initial_state/separation", "/integrator/dt", "/integrator/t_end", "/initial_state/lower_amplitude"});
  const auto s = c.at("/initial_state/slits").get<std::uint64_t>();
  if (s != 1 && s != 2) e.push_back("/initial_state/slits: expected 1 or 2");
  at_least(c, e, "/analysis/sample_refine", 1);
}

// block average of a 2D density down to about `target` cells per axis
Raster density_raster(const WaveFunction& wf, std::size_t target) {
  const Grid& g = wf.grid();
  const auto rho = wf.density();
  const std::size_t nx = g.points(0), ny = g.points(1);
  const std::size_t bx = (nx + target - 1) / target, by = (ny + target - 1) / target;
  Raster r;
  r.nx = nx / bx, r.ny = ny / by;
  r.x0 = g.origin(0), r.x1 = g.origin(0) + g.spacing(0) * double(r.nx * bx);
  r.y0 = g.origin(1), r.y1 = g.origin(1) + g.spacing(1) * double(r.ny * by);
  r.v.assign(r.nx * r.ny, 0.0);
  for (std::size_t i = 0; i < r.nx * bx; ++i)
    for (std::size_t j = 0; j < r.ny * by; ++j) r.v[(j / by) * r.nx + i / bx] += rho[g.index(i, j)];
  return r;
}

void run_slit(const ScenarioConfig& c, Output& o, ScenarioReport& r) {
  DoubleSlitParams p;
  p.x_lo = c.internal("/grid/x_lo");
  p.x_hi = c.internal("/grid/x_hi");
  p.points_x = c.at("/grid/points_x").get<std::size_t>();
  p.y_half_width = c.internal("/grid/y_half_width");
  p.points_y = c.at("/grid/points_y").get<std::size_t>();
  p.x0 = c.internal("/initial_state/x0");
  p.sigma_x = c.internal("/initial_state/sigma_x");
  p.kx = c.internal("/initial_state/kx");
  p.separation = c.internal("/initial_state/separation");
  p.sigma_y = c.internal("/initial_state/sigma_y");
  p.single_slit = c.at("/initial_state/slits").get<std::uint64_t>() == 1;
  p.lower_amplitude = num(c, "/initial_state/lower_amplitude");
  p.sample_refine = c.at("/analysis/sample_refine").get<std::size_t>();
  p.dt = c.internal("/integrator/dt");
  p.t_end = c.internal("/integrator/t_end");
  p.record_interval = c.internal("/outputs/checkpoint_every");
  p.M = c.at("/ensemble/M").get<std::size_t>();
  p.seed = c.seed();
  const auto res = run_double_slit(p);

  above(r, "chi2_p_value", res.chi2_p_value, 0.01);
  if (p.single_slit) {
    below(r, "single_slit_visibility", res.visibility, 0.05);
  } else {
    above(r, "fringe_visibility", res.visibility, 0.5);
    if (res.symmetric)
      r.checks.push_back({"non_mixing_fraction", res.non_mixing_fraction == 0.0, res.non_mixing_fraction, 0.0, "=="});
    else
      r.warnings.push_back("lower_amplitude differs from 1: the slits are asymmetric and the non-mixing check is skipped");
  }
  r.metrics = {{"non_mixing_fraction", res.non_mixing_fraction},
               {"chi2_p_value", res.chi2_p_value},
               {"chi2_statistic", res.chi2_statistic},
               {"chi2_bins", res.chi2_bins},
               {"visibility", res.visibility},
               {"symmetric", res.symmetric},
               {"exited", res.ensemble.size() - res.ensemble.active()}};

  std::vector<double> y_end;
  for (const auto& q : res.ensemble.position) y_end.push_back(q[1]);
  if (o.tables) {
    o.csv("marginal.csv", {"y", "density"}, {res.y_nodes, res.y_marginal});
    std::vector<double> alpha, slit, y0, xf;
    for (std::size_t a = 0; a < res.ensemble.size(); ++a) {
      alpha.push_back(double(a));
      slit.push_back(res.upper[a] ? 1.0 : -1.0);
      y0.push_back(res.ensemble.position_history.front()[a][1]);
      xf.push_back(res.ensemble.position[a][0]);
    }
    o.csv("endpoints.csv", {"alpha", "slit", "y0", "x_final", "y_final"}, {alpha, slit, y0, xf, y_end});
  }
  o.trajectories(res.ensemble, "trajectories");
  if (o.plots) {
    SvgPlot screen(o.meta("transverse distribution at the detector"), length_label(o.units, "y"), "density");
    const double h = p.y_half_width;
    screen.add_line(histogram_series(y_end, -h, h, 128, "trajectories", "#1f4e9c"));
    screen.add_line({"|psi|^2", res.y_nodes, res.y_marginal, "#c03020", false, 1.5, false});
    o.plot(screen, "screen.svg");

    SvgPlot paths(o.meta("slit trajectories over the final density"), length_label(o.units, "x"),
                  length_label(o.units, "y"));
    paths.set_raster(density_raster(res.final_state, 128));
    std::vector<std::vector<double>> xs, ys;
    const std::size_t n = std::min(plotted_paths(o) * 2, res.ensemble.size());
    for (std::size_t a = 0; a < n; ++a) {
      std::vector<double> x, y;
      for (const auto& row : res.ensemble.position_history) x.push_back(row[a][0]), y.push_back(row[a][1]);
      xs.push_back(std::move(x));
      ys.push_back(std::move(y));
    }
    paths.add_paths(xs, ys, "#202020", 0.5);
    paths.set_limits(p.x_lo, p.x_hi, -h, h);
    o.plot(paths, "trajectories.svg");
  }
  o.field(res.final_state, "final_field");
}

// --- infinite well momentum ------------------------------------------------------------

void check_well(const ScenarioConfig& c, std::vector<std::string>& e) {
  positive(c, e, {"/grid/L", "/integrator/t_release", "/integrator/t_flight", "/integrator/dt_box",
                  "/integrator/dt_free", "/analysis/max_overlap"});
  at_least(c, e, "/initial_state/n", 1);
  at_least(c, e, "/grid/box_points", 9);
  if (c.at("/grid/box_points").get<std::uint64_t>() % 2 == 0) e.push_back("/grid/box_points: must be odd");
  whole_steps(c, e, "/integrator/t_release", "/integrator/dt_box");
  whole_steps(c, e, "/integrator/t_flight", "/integrator/dt_free");
}

void run_well(const ScenarioConfig& c, Output& o, ScenarioReport& r) {
  WellMomentumParams p;
  p.L = c.internal("/grid/L");
  p.n = c.at("/initial_state/n").get<int>();
  p.box_points = c.at("/grid/box_points").get<std::size_t>();
  p.free_points = c.at("/grid/free_points").get<std::size_t>();
  p.t_release = c.internal("/integrator/t_release");
  p.t_flight = c.internal("/integrator/t_flight");
  p.dt_box = c.internal("/integrator/dt_box");
  p.dt_free = c.internal("/integrator/dt_free");
  p.max_overlap = num(c, "/analysis/max_overlap");
  p.M = c.at("/ensemble/M").get<std::size_t>();
  p.seed = c.seed();
  const auto res = run_well_momentum(p);

  below(r, "static_before_release", res.max_displacement_before, 1e-9);
  below(r, "median_momentum_error", std::abs(res.median_abs_p / res.p_exact - 1.0), 0.03);
  below(r, "sign_balance", std::abs(res.positive_fraction - 0.5), 3.0 / std::sqrt(double(p.M)));
  ordering_check(r, res.ensemble);
  r.metrics = {{"p_exact", res.p_exact},
               {"median_abs_p", res.median_abs_p},
               {"positive_fraction", res.positive_fraction},
               {"max_displacement_before", res.max_displacement_before},
               {"overlap", res.overlap}};

  if (o.tables) {
    std::vector<double> alpha, x0;
    for (std::size_t a = 0; a < res.ensemble.size(); ++a) {
      alpha.push_back(double(a));
      x0.push_back(res.ensemble.position_history.front()[a][0]);
    }
    o.csv("momentum.csv", {"alpha", "x0", "p_over_hbar"}, {alpha, x0, res.p_estimate});
  }
  o.trajectories(res.ensemble, "trajectories");
  if (o.plots) {
    const double pe = res.p_exact, lim = 2.0 * pe;
    SvgPlot h(o.meta("time-of-flight momentum"), "p / hbar", "density");
    h.add_line(histogram_series(res.p_estimate, -lim, lim, 80, "trajectories", "#1f4e9c"));
    for (double s : {-1.0, 1.0})
      h.add_line({s > 0 ? "+-n pi hbar / L" : "", {s * pe, s * pe}, {0.0, 50.0 / pe}, "#c03020", true, 1.2, false});
    o.plot(h, "momentum.svg");
    o.plot(path_plot(o, res.ensemble, "release from the well", plotted_paths(o)), "trajectories.svg");
  }
}

// --- triple-well adiabatic passage ---------------------------------------------------

void check_sap(const ScenarioConfig& c, std::vector<std::string>& e) {
  for (const char* k : {"/potential/depth", "/potential/width"}) {
    const json& v = c.at(k);
    if (v.size() != 3) e.push_back(std::string(k) + ": expected three values (left, middle, right)");
    for (const auto& x : v)
      if (!(x.get<double>() > 0.0)) e.push_back(std::string(k) + ": entries must be positive");
  }
  positive(c, e, {"/potential/d_min", "/potential/pulse_width", "/integrator/T", "/integrator/dt", "/grid/dx",
                  "/grid/margin"});
  ordered(c, e, "/potential/d_min", "/potential/d_max");
  for (const auto& f : c.at("/integrator/duration_factors"))
    if (!(f.get<double>() > 0.0)) e.push_back("/integrator/duration_factors: entries must be positive");
}

void run_sap_scenario(const ScenarioConfig& c, Output& o, ScenarioReport& r) {
  SapParams base;
  for (std::size_t j = 0; j < 3; ++j) {
    base.depth[j] = PhysicalUnits(c.units).energy_to_internal(c.at("/potential/depth")[j].get<double>());
    base.width[j] = c.at("/potential/width")[j].get<double>();
  }
  base.d_min = c.internal("/potential/d_min");
  base.d_max = c.internal("/potential/d_max");
  base.pulse_width = num(c, "/potential/pulse_width");
  base.delay = num(c, "/potential/delay");
  SapRunOptions opt;
  opt.dx = c.internal("/grid/dx");
  opt.margin = c.internal("/grid/margin");
  opt.dt = c.internal("/integrator/dt");
  opt.record_interval = c.internal("/outputs/checkpoint_every");
  opt.M = c.at("/ensemble/M").get<std::size_t>();
  opt.seed = c.seed();

  std::vector<double> factors;
  for (const auto& f : c.at("/integrator/duration_factors")) factors.push_back(f.get<double>());
  std::sort(factors.begin(), factors.end());
  const double T0 = c.internal("/integrator/T");

  std::vector<double> Ts, fid, model, middle, speed, top_speed, in_middle;
  json runs = json::array();
  for (double f : factors) {
    SapParams p = base;
    p.T = T0 * f;
    const auto res = run_sap(p, opt);
    const double T_user = o.units.time_from_internal(p.T);
    char tag[64];
    std::snprintf(tag, sizeof tag, "_T%g", T_user);
    const std::string s = tag;

    below(r, "norm_drift" + s, res.max_norm_drift, 1e-9);
    below(r, "grid_vs_model_fidelity" + s, std::abs(res.fidelity - res.model_fidelity), 0.05);
    ordering_check(r, res.ensemble, s);
    if (!res.adiabatic)
      r.warnings.push_back("duration " + json(T_user).dump() + ": fidelity " + json(res.fidelity).dump() +
                           ", the passage is not adiabatic; velocity statistics describe a failed transfer");
    Ts.push_back(T_user), fid.push_back(res.fidelity), model.push_back(res.model_fidelity);
    middle.push_back(res.max_middle_population), speed.push_back(o.units.velocity_from_internal(res.peak_middle_speed));
    top_speed.push_back(o.units.velocity_from_internal(res.max_middle_speed));
    in_middle.push_back(res.peak_in_middle_fraction);
    runs.push_back({{"T", T_user},
                    {"fidelity", res.fidelity},
                    {"model_fidelity", res.model_fidelity},
                    {"max_middle_population", res.max_middle_population},
                    {"peak_middle_speed", speed.back()},
                    {"max_middle_speed", top_speed.back()},
                    {"peak_in_middle_fraction", res.peak_in_middle_fraction},
                    {"adiabatic", res.adiabatic}});

    const auto t = in_time(res.t, o.units);
    if (o.tables)
      o.csv("populations" + s + ".csv", {"t", "P_L", "P_M", "P_R", "model_L", "model_M", "model_R"},
            {t, res.population[0], res.population[1], res.population[2], res.model.population[0],
             res.model.population[1], res.model.population[2]});
    o.trajectories(res.ensemble, "trajectories" + s);
    if (o.plots) {
      SvgPlot pop(o.meta("basin populations, T = " + json(T_user).dump()), time_label(o.units), "population");
      const char* col[3] = {"#1f4e9c", "#2a9d5c", "#c03020"};
      const char* name[3] = {"L", "M", "R"};
      for (std::size_t j = 0; j < 3; ++j) {
        pop.add_line({name[j], t, res.population[j], col[j], false, 1.5, false});
        pop.add_line({"", t, res.model.population[j], col[j], true, 1.0, false});
      }
      o.plot(pop, "populations" + s + ".svg");
      auto pp = path_plot(o, res.ensemble, "triple-well trajectories, T = " + json(T_user).dump(),
                          std::min<std::size_t>(plotted_paths(o), res.ensemble.size()));
      o.plot(pp, "trajectories" + s + ".svg");
    }
  }

  // the slowest run is the adiabatic reference
  below(r, "adiabatic_infidelity", 1.0 - fid.back(), 0.01);
  below(r, "adiabatic_middle_population", middle.back(), 0.05);
  above(r, "adiabatic_peak_in_middle_fraction", in_middle.back(), 0.5);
  if (speed.size() > 1) {
    double worst = 1e300;
    for (std::size_t i = 1; i < speed.size(); ++i) worst = std::min(worst, speed[i] - speed[i - 1]);
    r.checks.push_back({"peak_speed_grows_with_duration", worst > 0.0, worst, 0.0, "monotonic"});
  }
  r.metrics = {{"runs", runs}};
  if (o.tables)
    o.csv("sap_summary.csv",
          {"T", "fidelity", "model_fidelity", "max_middle_population", "peak_middle_speed", "max_middle_speed",
           "peak_in_middle_fraction"},
          {Ts, fid, model, middle, speed, top_speed, in_middle});
  if (o.plots && Ts.size() > 1) {
    SvgPlot sp(o.meta("middle-basin speed against duration"), time_label(o.units) + " (duration)", "speed");
    sp.add_line({"median peak", Ts, speed, "#1f4e9c", false, 1.5, true});
    sp.add_line({"largest", Ts, top_speed, "#c03020", false, 1.5, true});
    o.plot(sp, "speed_vs_duration.svg");
  }
}

// --- two-electron conditional wave functions --------------------------------------------

void check_conditional(const ScenarioConfig& c, std::vector<std::string>& e) {
  ordered(c, e, "/grid/lo", "/grid/hi");
  at_least(c, e, "/grid/points_1d", 16);
  at_least(c, e, "/grid/points_2d", 16);
  positive(c, e, {"/integrator/dt", "/integrator/t_end", "/analysis/l2_tolerance"});
  for (const char* k : {"/initial_state/particle_1", "/initial_state/particle_2"}) {
    const std::string s = k;
    if (!(num(c, s + "/sigma") > 0.0)) e.push_back(s + "/sigma: must be positive");
    if (num(c, s + "/energy") < 0.0) e.push_back(s + "/energy: must not be negative");
    const auto d = c.at(s + "/direction").get<long long>();
    if (d != 1 && d != -1) e.push_back(s + "/direction: expected 1 or -1");
  }
  whole_steps(c, e, "/integrator/t_end", "/integrator/dt");
}

TwoBodyConfig two_body(const ScenarioConfig& c) {
  TwoBodyConfig t;
  t.F = c.internal("/potential/F");
  for (int a = 0; a < 2; ++a) {
    const std::string s = a == 0 ? "/initial_state/particle_1" : "/initial_state/particle_2";
    t.packet[std::size_t(a)] = {c.internal(s + "/energy"), c.internal(s + "/center"), c.internal(s + "/sigma"),
                                int(c.at(s + "/direction").get<long long>())};
  }
  if (c.at("/frame/comoving").get<bool>()) t.frame_velocity = 0.5 * (t.k0(0) + t.k0(1));
  t.lo = c.internal("/grid/lo");
  t.hi = c.internal("/grid/hi");
  t.points_1d = c.at("/grid/points_1d").get<std::size_t>();
  t.points_2d = c.at("/grid/points_2d").get<std::size_t>();
  t.dt = c.internal("/integrator/dt");
  t.t_end = c.internal("/integrator/t_end");
  t.record_interval = c.internal("/outputs/checkpoint_every");
  t.M = c.at("/ensemble/M").get<std::size_t>();
  t.seed = c.seed();
  return t;
}

/// F = 0: worst gap between conditional paths and independent 1D co-evolved
/// paths from the same starts, lab frame.
double decoupled_gap(TwoBodyConfig t, double dt) {
  t.F = 0.0;
  t.frame_velocity = 0.0;
  t.dt = dt;
  const auto start = sample_product_state(t);
  const auto res = run_conditional(t, start);
  double worst = 0.0;
  for (int a = 0; a < 2; ++a) {
    const WaveFunction w = initial_packet(t, a, false);
    std::vector<Point> s1;
    for (const auto& q : start) s1.push_back({q[std::size_t(a)], 0.0});
    CrankNicolson prop(w.grid(), w.constants());
    CoevolutionOptions opt;
    opt.dt = t.dt;
    opt.record_interval = t.record_interval;
    const auto co = coevolve(w, prop, make_ensemble(s1, 0.0, 1, 1), t.t_end, opt);
    const std::size_t n = std::min(co.ensemble.times.size(), res.ensemble.times.size());
    for (std::size_t h = 0; h < n; ++h)
      for (std::size_t m = 0; m < start.size(); ++m)
        worst = std::max(worst, std::abs(co.ensemble.position_history[h][m][0] -
                                         res.ensemble.position_history[h][m][std::size_t(a)]));
  }
  return worst;
}

void run_conditional_scenario(const ScenarioConfig& c, Output& o, ScenarioReport& r) {
  const TwoBodyConfig t = two_body(c);
  const auto start = sample_product_state(t);
  const auto ex = solve_exact_2d(t, start);
  const auto co = run_conditional(t, start);
  const double tol = num(c, "/analysis/l2_tolerance");

  json l2 = json::object();
  for (int a = 0; a < 2; ++a) {
    const std::string s = std::to_string(a + 1);
    const double vs_traj = relative_l2(co.kinetic.K[std::size_t(a)], ex.trajectories.K[std::size_t(a)]);
    const double vs_quad = relative_l2(co.kinetic.K[std::size_t(a)], ex.quadrature.K[std::size_t(a)]);
    below(r, "kinetic_l2_particle_" + s, vs_traj, tol);
    l2["particle_" + s] = {{"vs_exact_trajectories", vs_traj}, {"vs_exact_quadrature", vs_quad}};
  }
  if (co.excluded > 0)
    r.warnings.push_back(std::to_string(co.excluded) + " realizations left the grid and were excluded");

  // decoupled limit on a short window
  TwoBodyConfig d = t;
  d.M = c.at("/analysis/decoupled_members").get<std::size_t>();
  d.t_end = std::min(t.t_end, c.internal("/analysis/decoupled_t_end"));
  d.t_end = t.dt * std::max(1.0, std::round(d.t_end / t.dt));
  double gap = 0.0, ratio = 0.0;
  if (d.M > 0) {
    const double coarse = decoupled_gap(d, t.dt), fine = decoupled_gap(d, 0.5 * t.dt);
    gap = fine;
    ratio = fine > 0.0 ? coarse / fine : 0.0;
    // second-order convergence, unless both paths already agree to round-off
    const bool ok = fine < 1e-9 || (ratio > 2.5 && ratio < 6.0);
    r.checks.push_back({"decoupled_limit_convergence", ok, ratio, 4.0, "~"});
    below(r, "decoupled_limit_gap", fine, 0.05 * (t.hi - t.lo) / double(t.points_1d));
  }
  r.metrics = {{"kinetic_l2", l2},
               {"excluded", co.excluded},
               {"decoupled_gap", gap},
               {"decoupled_gap_ratio", ratio},
               {"max_conditional_norm_drift",
                co.max_norm_drift.empty() ? 0.0 : *std::max_element(co.max_norm_drift.begin(), co.max_norm_drift.end())}};

  const auto tt = in_time(co.kinetic.t, o.units);
  auto energy = [&](const std::vector<double>& v) {
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [&](double e) { return o.units.energy_from_internal(e); });
    return out;
  };
  if (o.tables) {
    o.csv("kinetic.csv",
          {"t", "K1_conditional", "K2_conditional", "K1_exact_trajectories", "K2_exact_trajectories",
           "K1_exact_quadrature", "K2_exact_quadrature"},
          {tt, energy(co.kinetic.K[0]), energy(co.kinetic.K[1]), energy(ex.trajectories.K[0]),
           energy(ex.trajectories.K[1]), energy(ex.quadrature.K[0]), energy(ex.quadrature.K[1])});
  }
  o.trajectories(co.ensemble, "trajectories");
  if (o.plots) {
    const std::string e_label = o.units.system() == UnitSystem::ev_nm_fs ? "<K> [eV]" : "<K>";
    SvgPlot k(o.meta("kinetic energy per particle"), time_label(o.units), e_label);
    k.add_line({"conditional 1", tt, energy(co.kinetic.K[0]), "#1f4e9c", false, 1.5, false});
    k.add_line({"conditional 2", tt, energy(co.kinetic.K[1]), "#c03020", false, 1.5, false});
    k.add_line({"exact 1", tt, energy(ex.quadrature.K[0]), "#1f4e9c", true, 1.2, false});
    k.add_line({"exact 2", tt, energy(ex.quadrature.K[1]), "#c03020", true, 1.2, false});
    o.plot(k, "kinetic.svg");
  }
}

// --- registry --------------------------------------------------------------------------

using Q = Quantity;

const std::vector<Definition>& registry() {
  static const std::vector<Definition> defs = [] {
    std::vector<Definition> d;
    d.push_back({"free_packet", UnitSystem::internal,
                 {{"grid", {{"lo", -100.0}, {"hi", 100.0}, {"points", std::uint64_t(1024)}}},
                  {"initial_state", {{"center", 0.0}, {"sigma", 8.0}, {"k0", 0.5}}},
                  {"integrator", {{"dt", 0.01}, {"t_end", 20.0}}},
                  {"ensemble", ensemble(1000)},
                  {"outputs", outputs(1.0)}},
                 {{"/grid/lo", Q::length}, {"/grid/hi", Q::length}, {"/initial_state/center", Q::length},
                  {"/initial_state/sigma", Q::length}, {"/initial_state/k0", Q::wavevector},
                  {"/integrator/dt", Q::time}, {"/integrator/t_end", Q::time}},
                 check_free, run_free});
    d.push_back({"harmonic_coherent", UnitSystem::internal,
                 {{"grid", {{"lo", -20.0}, {"hi", 20.0}, {"points", std::uint64_t(512)}}},
                  {"potential", {{"omega", 1.0}}},
                  {"initial_state", {{"displacement", 3.0}}},
                  {"integrator", {{"dt", 0.005}, {"periods", 2.0}}},
                  {"ensemble", ensemble(500)},
                  {"outputs", outputs(0.1)}},
                 {{"/grid/lo", Q::length}, {"/grid/hi", Q::length}, {"/potential/omega", Q::frequency},
                  {"/initial_state/displacement", Q::length}, {"/integrator/dt", Q::time}},
                 check_harmonic, run_harmonic});
    d.push_back({"barrier_tunneling", UnitSystem::internal,
                 {{"grid", {{"lo", -200.0}, {"hi", 200.0}, {"points", std::uint64_t(4096)}}},
                  {"potential", {{"V0", 1.0}, {"a", 1.0}, {"center", 0.0}}},
                  {"initial_state", {{"center", -60.0}, {"sigma", 10.0}, {"k0", 1.3}}},
                  {"integrator", {{"method", "split_operator"}, {"dt", 0.02}, {"t_end", 100.0}}},
                  {"ensemble", ensemble(2000)},
                  {"outputs", outputs(1.0)}},
                 {{"/grid/lo", Q::length}, {"/grid/hi", Q::length}, {"/potential/V0", Q::energy},
                  {"/potential/a", Q::length}, {"/potential/center", Q::length},
                  {"/initial_state/center", Q::length}, {"/initial_state/sigma", Q::length},
                  {"/initial_state/k0", Q::wavevector}, {"/integrator/dt", Q::time}, {"/integrator/t_end", Q::time}},
                 check_barrier, run_barrier_scenario});
    d.push_back({"double_slit", UnitSystem::internal,
                 {{"grid", {{"x_lo", -32.0}, {"x_hi", 32.0}, {"points_x", std::uint64_t(256)},
                            {"y_half_width", 32.0}, {"points_y", std::uint64_t(256)}}},
                  {"initial_state", {{"x0", -15.0}, {"sigma_x", 2.0}, {"kx", 2.0}, {"separation", 12.0},
                                     {"sigma_y", 0.8}, {"slits", std::uint64_t(2)}, {"lower_amplitude", 1.0}}},
                  {"integrator", {{"dt", 0.05}, {"t_end", 10.0}}},
                  {"analysis", {{"sample_refine", std::uint64_t(4)}}},
                  {"ensemble", ensemble(10000)},
                  {"outputs", outputs(0.5)}},
                 {{"/grid/x_lo", Q::length}, {"/grid/x_hi", Q::length}, {"/grid/y_half_width", Q::length},
                  {"/initial_state/x0", Q::length}, {"/initial_state/sigma_x", Q::length},
                  {"/initial_state/kx", Q::wavevector}, {"/initial_state/separation", Q::length},
                  {"/initial_state/sigma_y", Q::length}, {"/integrator/dt", Q::time}, {"/integrator/t_end", Q::time}},
                 check_slit, run_slit});
    d.push_back({"infinite_well_momentum", UnitSystem::ev_nm_fs,
                 {{"grid", {{"L", 100.0}, {"box_points", std::uint64_t(801)}, {"free_points", std::uint64_t(32768)}}},
                  {"initial_state", {{"n", std::uint64_t(10)}}},
                  {"integrator", {{"t_release", 1000.0}, {"t_flight", 26000.0}, {"dt_box", 10.0}, {"dt_free", 20.0}}},
                  {"analysis", {{"max_overlap", 0.05}}},
                  {"ensemble", ensemble(2000)},
                  {"outputs", outputs(0.0)}},
                 {{"/grid/L", Q::length}, {"/integrator/t_release", Q::time}, {"/integrator/t_flight", Q::time},
                  {"/integrator/dt_box", Q::time}, {"/integrator/dt_free", Q::time}},
                 check_well, run_well});
    d.push_back({"sap_triple_well", UnitSystem::internal,
                 {{"grid", {{"dx", 0.05}, {"margin", 11.0}}},
                  {"potential", {{"depth", {2.0, 2.0, 2.0}}, {"width", {1.0, 1.0, 1.0}}, {"d_min", 4.0},
                                 {"d_max", 9.0}, {"pulse_width", 0.25}, {"delay", 0.08}}},
                  {"integrator", {{"T", 4000.0}, {"dt", 0.2}, {"duration_factors", {1.0, 2.0, 4.0}}}},
                  {"ensemble", ensemble(64)},
                  {"outputs", outputs(0.0)}},
                 {{"/grid/dx", Q::length}, {"/grid/margin", Q::length}, {"/potential/d_min", Q::length},
                  {"/potential/d_max", Q::length}, {"/integrator/T", Q::time}, {"/integrator/dt", Q::time}},
                 check_sap, run_sap_scenario});
    json p1 = {{"energy", 0.06}, {"center", 50.0}, {"sigma", 25.0}, {"direction", 1}};
    json p2 = {{"energy", 0.04}, {"center", -50.0}, {"sigma", 25.0}, {"direction", 1}};
    d.push_back({"two_electron_conditional", UnitSystem::ev_nm_fs,
                 {{"grid", {{"lo", -320.0}, {"hi", 320.0}, {"points_1d", std::uint64_t(2048)},
                            {"points_2d", std::uint64_t(512)}}},
                  {"potential", {{"F", 1e-6}}},
                  {"initial_state", {{"particle_1", p1}, {"particle_2", p2}}},
                  {"frame", {{"comoving", true}}},
                  {"integrator", {{"dt", 4.0}, {"t_end", 5000.0}}},
                  {"analysis", {{"l2_tolerance", 0.05}, {"decoupled_members", std::uint64_t(8)},
                                {"decoupled_t_end", 1000.0}}},
                  {"ensemble", ensemble(2000)},
                  {"outputs", outputs(20.0)}},
                 {{"/grid/lo", Q::length}, {"/grid/hi", Q::length}, {"/potential/F", Q::stiffness},
                  {"/initial_state/particle_1/energy", Q::energy}, {"/initial_state/particle_1/center", Q::length},
                  {"/initial_state/particle_1/sigma", Q::length}, {"/initial_state/particle_2/energy", Q::energy},
                  {"/initial_state/particle_2/center", Q::length}, {"/initial_state/particle_2/sigma", Q::length},
                  {"/integrator/dt", Q::time}, {"/integrator/t_end", Q::time},
                  {"/analysis/decoupled_t_end", Q::time}},
                 check_conditional, run_conditional_scenario});
    for (auto& def : d) def.kinds["/outputs/checkpoint_every"] = Q::time;
    return d;
  }();
  return defs;
}

const Definition& definition(const std::string& id) {
  const Definition* d = find_definition(id);
  if (!d) throw ConfigError("unknown scenario '" + id + "'; valid ids: " + joined_ids());
  return *d;
}

}  // namespace

// --- ScenarioConfig ------------------------------------------------------------------------

const nlohmann::json& ScenarioConfig::at(const std::string& pointer) const {
  try {
    return params.at(json::json_pointer(pointer));
  } catch (const json::exception&) {
    throw ConfigError("scenario " + scenario + ": missing entry " + pointer);
  }
}

double ScenarioConfig::internal(const std::string& pointer) const {
  const json& v = at(pointer);
  if (!v.is_number()) throw ConfigError("scenario " + scenario + ": " + pointer + " is not a number");
  const auto& kinds = definition(scenario).kinds;
  const auto it = kinds.find(pointer);
  const Quantity q = it == kinds.end() ? Quantity::none : it->second;
  const PhysicalUnits u(units);
  const double x = v.get<double>();
  switch (q) {
    case Quantity::time: return u.time_to_internal(x);
    case Quantity::energy: return u.energy_to_internal(x);
    case Quantity::frequency: return x * u.time_unit();
    case Quantity::stiffness: return u.stiffness_to_internal(x);
    default: return x;
  }
}

std::uint64_t ScenarioConfig::seed() const { return at("/ensemble/seed").get<std::uint64_t>(); }

nlohmann::json ScenarioConfig::document() const {
  json d = params;
  d["schema_version"] = kScenarioSchemaVersion;
  d["scenario"] = scenario;
  d["units"] = std::string(to_string(units));
  return d;
}

std::string ScenarioConfig::hash() const {
  const std::string s = document().dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> scenario_ids() {
  std::vector<std::string> ids;
  for (const auto& d : registry()) ids.push_back(d.id);
  return ids;
}

nlohmann::json scenario_defaults(const std::string& id) {
  const Definition& d = definition(id);
  ScenarioConfig c;
  c.scenario = id;
  c.units = d.units;
  c.params = d.defaults;
  return c.document();
}

ScenarioConfig parse_scenario_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  std::vector<std::string> errs;
  if (!doc.contains("scenario") || !doc["scenario"].is_string())
    throw ConfigError("config has no scenario id; valid ids: " + joined_ids());
  const std::string id = doc["scenario"].get<std::string>();
  const Definition& d = definition(id);

  if (!doc.contains("schema_version"))
    errs.push_back("missing schema_version (expected " + std::to_string(kScenarioSchemaVersion) + ")");
  else if (!doc["schema_version"].is_number_integer() || doc["schema_version"].get<long long>() != kScenarioSchemaVersion)
    errs.push_back("unsupported schema_version " + doc["schema_version"].dump() + " (expected " +
                   std::to_string(kScenarioSchemaVersion) + ")");

  ScenarioConfig cfg;
  cfg.scenario = id;
  cfg.units = d.units;
  if (doc.contains("units")) {
    if (!doc["units"].is_string()) {
      errs.push_back("/units: expected a string");
    } else {
      try {
        cfg.units = parse_unit_system(doc["units"].get<std::string>());
      } catch (const Error& e) {
        errs.push_back(std::string("/units: ") + e.what());
      }
    }
  }

  json user = json::object();
  for (const auto& [k, v] : doc.items()) {
    if (k == "schema_version" || k == "scenario" || k == "units" || k == "description") continue;
    user[k] = v;
  }
  const std::size_t before = errs.size();
  check_types(d.defaults, user, "", errs);
  if (errs.size() == before) {
    cfg.params = d.defaults;
    cfg.params.merge_patch(user);
    common_checks(cfg, errs);
    d.check(cfg, errs);
  }
  if (!errs.empty()) {
    std::string msg = "scenario " + id + ": invalid config";
    for (const auto& e : errs) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_scenario_config(doc);
}

ScenarioConfig apply_overrides(const ScenarioConfig& cfg, const RunOverrides& o) {
  json doc = cfg.document();
  if (o.seed) doc["ensemble"]["seed"] = *o.seed;
  if (o.checkpoint_every) doc["outputs"]["checkpoint_every"] = *o.checkpoint_every;
  return parse_scenario_config(doc);
}

// --- reports ---------------------------------------------------------------------------------

bool ScenarioReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

nlohmann::json ScenarioReport::to_json() const {
  json c = json::array();
  for (const auto& k : checks)
    c.push_back({{"name", k.name}, {"pass", k.pass}, {"value", k.value}, {"limit", k.limit}, {"relation", k.relation}});
  return {{"scenario", scenario},
          {"config_hash", config_hash},
          {"seed", seed},
          {"units", std::string(to_string(units))},
          {"passed", passed()},
          {"checks", c},
          {"metrics", metrics},
          {"warnings", warnings},
          {"files", files}};
}

ScenarioReport run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out) {
  const Definition& d = definition(cfg.scenario);
  fs::create_directories(out);
  ScenarioReport rep;
  rep.scenario = cfg.scenario;
  rep.config_hash = cfg.hash();
  rep.seed = cfg.seed();
  rep.units = cfg.units;
  Output o(cfg, out, rep);
  {
    std::ofstream os(o.file("config.json"));
    os << cfg.document().dump(2) << '\n';
  }
  try {
    d.run(cfg, o, rep);
  } catch (const InvalidArgument& e) {
    throw ConfigError("scenario " + cfg.scenario + ": " + e.what());
  }
  rep.files.push_back("report.json");
  std::ofstream os(out / "report.json");
  if (!os) throw Error("cannot write " + (out / "report.json").string());
  os << rep.to_json().dump(2) << '\n';
  return rep;
}

}  // namespace bohmkit
