#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bohmkit/propagators.hpp"
#include "bohmkit/units.hpp"

namespace bohmkit {

/// What to record during evolve(). The checkpoint interval is in time units
/// and is rounded to a whole number of integrator steps; zero means every step.
struct CheckpointSpec {
  double interval = 0.0;
  bool store_fields = false;
  std::map<std::string, std::function<double(const WaveFunction&)>> observables;
  /// Called at every integrator step (not only checkpoints), after the step.
  std::function<void(const WaveFunction&)> on_step;
};

struct EvolutionRecord {
  std::vector<double> times;
  std::vector<double> norms;
  std::vector<WaveFunction> fields;  // filled when store_fields is set
  std::map<std::string, std::vector<double>> observables;
  WaveFunction final_state;
  std::size_t steps = 0;
  double dt = 0.0;  // effective step after rounding
};

/// Deterministic checkpointed run from t0 to t1 with steps close to dt.
/// The initial state is recorded as the first checkpoint.
EvolutionRecord evolve(const WaveFunction& wf, Propagator& prop, double t0, double t1, double dt,
                       const CheckpointSpec& spec = {});

/// NDJSON stream: one line per checkpoint with time, norm and observables;
/// when fields are stored each line names a raw dump written next to it.
void write_evolution_ndjson(const EvolutionRecord& rec, const std::filesystem::path& path,
                            UnitSystem units = UnitSystem::internal);

}  // namespace bohmkit
