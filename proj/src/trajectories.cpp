#include "bohmkit/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "bohmkit/error.hpp"
#include "bohmkit/parallel.hpp"

namespace bohmkit {

std::size_t TrajectoryEnsemble::active() const {
  return std::size_t(std::count_if(flags.begin(), flags.end(), [](std::uint8_t f) { return !(f & kExited); }));
}

void TrajectoryEnsemble::record() {
  times.push_back(time);
  position_history.push_back(position);
  velocity_history.push_back(velocity);
  flags_history.push_back(flags);
}

TrajectoryEnsemble make_ensemble(std::vector<Point> start, double t, std::size_t particles, int spatial_dims,
                                 std::uint64_t seed) {
  detail::require(particles >= 1 && spatial_dims >= 1 && particles * std::size_t(spatial_dims) <= 2,
                  "ensemble configuration space must have 1 or 2 components");
  TrajectoryEnsemble e;
  e.particles = particles;
  e.spatial_dims = spatial_dims;
  e.seed = seed;
  e.time = t;
  e.velocity.assign(start.size(), Point{0.0, 0.0});
  e.flags.assign(start.size(), 0);
  e.exit_time.assign(start.size(), std::numeric_limits<double>::quiet_NaN());
  e.position = std::move(start);
  return e;
}

bool inside_interior(const Grid& g, const Point& r) {
  for (int a = 0; a < g.dims(); ++a) {
    double lo = g.origin(a), hi = g.upper(a);
    if (g.boundary() == Boundary::absorbing) {
      const double layer = double(g.cap().width_cells) * g.spacing(a);
      lo += layer;
      hi -= layer;
    }
    const double x = r[std::size_t(a)];
    if (!(x >= lo && x <= hi)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

FieldTimeline::FieldTimeline(const EvolutionRecord& rec) {
  detail::require(!rec.fields.empty(), "evolution record holds no fields");
  for (const auto& f : rec.fields) push(f);
}

void FieldTimeline::push(VelocityField f) {
  if (!fields_.empty()) {
    detail::require(f.time > fields_.back().time, "field samples must have increasing times");
    detail::require(f.grid.same_layout(fields_.back().grid), "field samples must share one grid");
  }
  fields_.push_back(std::move(f));
}

void FieldTimeline::drop_before(double t) {
  while (fields_.size() > 1 && fields_[1].time <= t) fields_.pop_front();
}

double FieldTimeline::first_time() const {
  if (fields_.empty()) throw MissingTimeSample("field timeline is empty");
  return fields_.front().time;
}

double FieldTimeline::last_time() const {
  if (fields_.empty()) throw MissingTimeSample("field timeline is empty");
  return fields_.back().time;
}

std::pair<std::size_t, double> FieldTimeline::bracket(double t) const {
  if (fields_.empty()) throw MissingTimeSample("field timeline is empty");
  const double t0 = fields_.front().time, t1 = fields_.back().time;
  const double eps = 1e-9 * std::max({1.0, std::abs(t0), std::abs(t1)});
  if (t < t0 - eps || t > t1 + eps) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "no field sample brackets t = %.9g (available [%.9g, %.9g])", t, t0, t1);
    throw MissingTimeSample(buf);
  }
  if (fields_.size() == 1) return {0, 0.0};
  auto it = std::upper_bound(fields_.begin(), fields_.end(), t,
                             [](double v, const VelocityField& f) { return v < f.time; });
  std::size_t i = it == fields_.begin() ? 0 : std::size_t(it - fields_.begin()) - 1;
  i = std::min(i, fields_.size() - 2);
  const double w = std::clamp((t - fields_[i].time) / (fields_[i + 1].time - fields_[i].time), 0.0, 1.0);
  return {i, w};
}

Point FieldTimeline::velocity(const Point& r, double t) const {
  const auto [i, w] = bracket(t);
  const Point a = fields_[i].at(r);
  if (w == 0.0) return a;
  const Point b = fields_[i + 1].at(r);
  if (w == 1.0) return b;
  return {(1.0 - w) * a[0] + w * b[0], (1.0 - w) * a[1] + w * b[1]};
}

bool FieldTimeline::masked(const Point& r, double t) const {
  const auto [i, w] = bracket(t);
  return fields_[w < 0.5 ? i : i + 1].masked_at(r);
}

bool FieldTimeline::inside(const Point& r) const {
  if (fields_.empty()) throw MissingTimeSample("field timeline is empty");
  return inside_interior(fields_.front().grid, r);
}

double FieldTimeline::step_length() const {
  if (fields_.empty()) return 0.0;
  const Grid& g = fields_.front().grid;
  double h = g.spacing(0);
  if (g.dims() == 2) h = std::min(h, g.spacing(1));
  return 0.5 * h;
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kMaxSplits = 12;
constexpr double kSplitThreshold = 0.25;

// |dv/dx| from a centred difference at +-eps; 0 when a probe leaves the interior
double velocity_gradient(const VelocitySource& src, double x, double t, double eps) {
  const Point lo{x - eps, 0.0}, hi{x + eps, 0.0};
  if (!src.inside(lo) || !src.inside(hi)) return 0.0;
  return std::abs(src.velocity(hi, t)[0] - src.velocity(lo, t)[0]) / (2.0 * eps);
}

void rk4_all(TrajectoryEnsemble& ens, const VelocitySource& src, double t, double dt) {
  const double th = t + 0.5 * dt, tf = t + dt;
  auto axpy = [](const Point& r, double h, const Point& k) { return Point{r[0] + h * k[0], r[1] + h * k[1]}; };
  parallel_for(ens.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t a = b; a < e; ++a) {
      if (ens.flags[a] & kExited) continue;
      const Point r = ens.position[a];
      const Point k1 = src.velocity(r, t);
      const Point k2 = src.velocity(axpy(r, 0.5 * dt, k1), th);
      const Point k3 = src.velocity(axpy(r, 0.5 * dt, k2), th);
      const Point k4 = src.velocity(axpy(r, dt, k3), tf);
      Point rn;
      for (std::size_t k = 0; k < 2; ++k) rn[k] = r[k] + dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
      ens.position[a] = rn;
      if (!src.inside(rn)) {
        ens.flags[a] |= kExited;
        ens.exit_time[a] = tf;
        ens.velocity[a] = {0.0, 0.0};
      } else if (src.masked(rn, tf)) {
        ens.flags[a] |= kMasked;
      }
    }
  });
}

}  // namespace

void advance_trajectories(TrajectoryEnsemble& ens, const VelocitySource& src, double dt) {
  const double t = ens.time;
  int splits = 0;
  const double eps = src.step_length();
  if (eps > 0.0 && ens.particles == 1 && ens.spatial_dims == 1) {
    // One map for every member: a monotone RK4 map keeps the 1D order, so
    // the whole ensemble shares the substep chosen by its steepest member.
    std::vector<double> g(ens.size(), 0.0);
    parallel_for(ens.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t a = b; a < e; ++a) {
        if (ens.flags[a] & kExited) continue;
        const double x = ens.position[a][0];
        g[a] = std::max({velocity_gradient(src, x, t, eps), velocity_gradient(src, x, t + 0.5 * dt, eps),
                         velocity_gradient(src, x, t + dt, eps)});
      }
    });
    const double worst = g.empty() ? 0.0 : *std::max_element(g.begin(), g.end());
    while (splits < kMaxSplits && std::abs(dt) * worst > kSplitThreshold * double(1 << splits)) ++splits;
  }
  const int n = 1 << splits;
  const double h = dt / double(n);
  for (int i = 0; i < n; ++i) rk4_all(ens, src, t + h * double(i), h);
  ens.time = t + dt;
}

void update_velocities(TrajectoryEnsemble& ens, const VelocitySource& src) {
  parallel_for(ens.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t a = b; a < e; ++a)
      ens.velocity[a] = (ens.flags[a] & kExited) ? Point{0.0, 0.0} : src.velocity(ens.position[a], ens.time);
  });
}

CoevolutionResult coevolve(const WaveFunction& wf0, Propagator& prop, TrajectoryEnsemble ens, double t1,
                           const CoevolutionOptions& opt) {
  const double t0 = wf0.time();
  detail::require(t1 >= t0, "coevolve needs t1 >= t0");
  detail::require(std::abs(ens.time - t0) <= 1e-12 * std::max(1.0, std::abs(t0)),
                  "ensemble and field must start at the same time");
  CoevolutionResult res;
  EvolutionRecord& rec = res.record;
  const CheckpointSpec& cps = opt.field_checkpoints;
  auto checkpoint = [&](const WaveFunction& s) {
    rec.times.push_back(s.time());
    rec.norms.push_back(norm(s));
    for (const auto& [name, fn] : cps.observables) rec.observables[name].push_back(fn(s));
    if (cps.store_fields) rec.fields.push_back(s);
  };

  FieldTimeline tl;
  WaveFunction wf = wf0;
  ens.time = t0;
  tl.push(wf);
  update_velocities(ens, tl);
  ens.record();
  checkpoint(wf);
  if (opt.on_record) opt.on_record(wf, ens);

  const std::size_t steps =
      t1 > t0 ? std::size_t(std::max(1.0, std::ceil((t1 - t0) / opt.dt - 1e-9))) : 0;
  if (steps > 0) detail::require(opt.dt > 0.0, "coevolve needs dt > 0");
  const double h = steps ? (t1 - t0) / double(steps) : 0.0;
  const std::size_t rec_every =
      opt.record_interval > 0.0 ? std::max<std::size_t>(1, std::size_t(std::llround(opt.record_interval / h))) : 1;
  const std::size_t cp_every =
      cps.interval > 0.0 ? std::max<std::size_t>(1, std::size_t(std::llround(cps.interval / h))) : 1;

  for (std::size_t s = 1; s <= steps; ++s) {
    const double ta = t0 + (double(s) - 0.5) * h;
    const double tb = s == steps ? t1 : t0 + double(s) * h;
    wf = prop.step(std::move(wf), 0.5 * h).with_time(ta);
    tl.push(wf);
    wf = prop.step(std::move(wf), 0.5 * h).with_time(tb);
    tl.push(wf);
    advance_trajectories(ens, tl, h);
    ens.time = tb;
    if (cps.on_step) cps.on_step(wf);
    if (s % rec_every == 0 || s == steps) {
      update_velocities(ens, tl);
      ens.record();
      if (opt.on_record) opt.on_record(wf, ens);
    }
    if (s % cp_every == 0 || s == steps) checkpoint(wf);
    tl.drop_before(tb);
  }
  rec.steps = steps;
  rec.dt = h;
  rec.final_state = std::move(wf);
  res.ensemble = std::move(ens);
  return res;
}

TrajectoryEnsemble streamline_reconstruction(const EvolutionRecord& rec, const std::vector<Point>& launch, double dt,
                                             std::size_t particles) {
  FieldTimeline tl(rec);
  const Grid& g = rec.fields.front().grid();
  for (const Point& p : launch)
    if (tl.masked(p, tl.first_time()))
      throw InvalidArgument("streamline launch point lies in a masked (near-node) region");
  const int sd = particles == 1 ? g.dims() : 1;
  TrajectoryEnsemble ens = make_ensemble(launch, tl.first_time(), particles, sd);
  update_velocities(ens, tl);
  ens.record();
  const double t0 = tl.first_time(), t1 = tl.last_time();
  const std::size_t steps = t1 > t0 ? std::size_t(std::max(1.0, std::ceil((t1 - t0) / dt - 1e-9))) : 0;
  const double h = steps ? (t1 - t0) / double(steps) : 0.0;
  for (std::size_t s = 1; s <= steps; ++s) {
    advance_trajectories(ens, tl, h);
    ens.time = s == steps ? t1 : t0 + double(s) * h;
    update_velocities(ens, tl);
    ens.record();
  }
  return ens;
}

// ---------------------------------------------------------------------------

void write_trajectories_csv(const TrajectoryEnsemble& ens, const std::filesystem::path& path,
                            const PhysicalUnits& units) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  const bool two = ens.spatial_dims == 2;
  os << (two ? "t,alpha,k,x,y,vx,vy,flags\n" : "t,alpha,k,x,vx,flags\n");
  char buf[256];
  for (std::size_t h = 0; h < ens.times.size(); ++h) {
    const double t = units.time_from_internal(ens.times[h]);
    for (std::size_t a = 0; a < ens.size(); ++a) {
      const Point& r = ens.position_history[h][a];
      const Point& v = ens.velocity_history[h][a];
      const unsigned f = ens.flags_history[h][a];
      for (std::size_t k = 0; k < ens.particles; ++k) {
        if (two)
          std::snprintf(buf, sizeof buf, "%.10g,%zu,%zu,%.12g,%.12g,%.12g,%.12g,%u\n", t, a, k, r[0], r[1],
                        units.velocity_from_internal(v[0]), units.velocity_from_internal(v[1]), f);
        else
          std::snprintf(buf, sizeof buf, "%.10g,%zu,%zu,%.12g,%.12g,%u\n", t, a, k, r[k],
                        units.velocity_from_internal(v[k]), f);
        os << buf;
      }
    }
  }
}

void write_trajectories_ndjson(const TrajectoryEnsemble& ens, const std::filesystem::path& path,
                               const PhysicalUnits& units) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  const std::size_t comps = ens.particles * std::size_t(ens.spatial_dims);
  for (std::size_t h = 0; h < ens.times.size(); ++h) {
    nlohmann::json line;
    line["t"] = units.time_from_internal(ens.times[h]);
    line["seed"] = ens.seed;
    auto& members = line["members"] = nlohmann::json::array();
    for (std::size_t a = 0; a < ens.size(); ++a) {
      nlohmann::json m;
      m["alpha"] = a;
      m["r"] = nlohmann::json::array();
      m["v"] = nlohmann::json::array();
      for (std::size_t c = 0; c < comps; ++c) {
        m["r"].push_back(ens.position_history[h][a][c]);
        m["v"].push_back(units.velocity_from_internal(ens.velocity_history[h][a][c]));
      }
      m["flags"] = ens.flags_history[h][a];
      members.push_back(std::move(m));
    }
    os << line.dump() << '\n';
  }
}

}  // namespace bohmkit
