#include "bohmkit/evolution.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "bohmkit/error.hpp"
#include "bohmkit/field_io.hpp"

namespace bohmkit {

EvolutionRecord evolve(const WaveFunction& wf, Propagator& prop, double t0, double t1, double dt,
                       const CheckpointSpec& spec) {
  detail::require(t1 >= t0, "evolve needs t1 >= t0");
  EvolutionRecord rec;
  auto checkpoint = [&](const WaveFunction& state) {
    rec.times.push_back(state.time());
    rec.norms.push_back(norm(state));
    for (const auto& [name, fn] : spec.observables) rec.observables[name].push_back(fn(state));
    if (spec.store_fields) rec.fields.push_back(state);
  };

  WaveFunction state = wf.with_time(t0);
  checkpoint(state);
  if (t1 == t0) {
    rec.final_state = std::move(state);
    return rec;
  }
  detail::require(dt > 0.0, "evolve needs dt > 0");
  const auto steps = std::size_t(std::max(1.0, std::ceil((t1 - t0) / dt - 1e-9)));
  const double h = (t1 - t0) / double(steps);
  const std::size_t every =
      spec.interval > 0.0 ? std::max<std::size_t>(1, std::size_t(std::llround(spec.interval / h))) : 1;
  for (std::size_t s = 1; s <= steps; ++s) {
    state = prop.step(std::move(state), h);
    if (s == steps) state = state.with_time(t1);
    if (spec.on_step) spec.on_step(state);
    if (s % every == 0 || s == steps) checkpoint(state);
  }
  rec.steps = steps;
  rec.dt = h;
  rec.final_state = std::move(state);
  return rec;
}

void write_evolution_ndjson(const EvolutionRecord& rec, const std::filesystem::path& path,
                            UnitSystem units) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  for (std::size_t c = 0; c < rec.times.size(); ++c) {
    nlohmann::json line;
    line["checkpoint"] = c;
    line["t"] = rec.times[c];
    line["norm"] = rec.norms[c];
    for (const auto& [name, series] : rec.observables) line["observables"][name] = series[c];
    if (c < rec.fields.size()) {
      char name[64];
      std::snprintf(name, sizeof name, "%s.field_%05zu", path.stem().string().c_str(), c);
      write_field_dump(rec.fields[c], path.parent_path() / name, units);
      line["field"] = name;
    }
    os << line.dump() << '\n';
  }
}

}  // namespace bohmkit
