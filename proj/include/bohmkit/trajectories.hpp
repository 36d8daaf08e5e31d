#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <limits>
#include <vector>

#include "bohmkit/evolution.hpp"
#include "bohmkit/units.hpp"
#include "bohmkit/velocity.hpp"

namespace bohmkit {

enum TrajectoryFlag : std::uint8_t {
  kExited = 1,   // left the interior domain; frozen at its exit point
  kMasked = 2,   // visited a masked (near-node) region at least once
};

/// M realizations of a configuration point with N particles of d spatial
/// dimensions each (N * d <= 2). Member alpha is the index of the sum over
/// realizations and also names its RNG substream.
struct TrajectoryEnsemble {
  std::size_t particles = 1;
  int spatial_dims = 1;
  std::uint64_t seed = 0;

  double time = 0.0;
  std::vector<Point> position;
  std::vector<Point> velocity;
  std::vector<std::uint8_t> flags;
  std::vector<double> exit_time;

  // Recorded history on a shared time axis.
  std::vector<double> times;
  std::vector<std::vector<Point>> position_history;
  std::vector<std::vector<Point>> velocity_history;
  std::vector<std::vector<std::uint8_t>> flags_history;

  std::size_t size() const { return position.size(); }
  std::size_t active() const;
  bool exited(std::size_t alpha) const { return flags[alpha] & kExited; }
  /// Appends the current state to the history.
  void record();
  /// Position of one particle coordinate of a member at history index h.
  double coordinate(std::size_t h, std::size_t alpha, std::size_t component) const {
    return position_history[h][alpha][component];
  }
};

/// An ensemble at t with the given starting points, one particle of
/// grid.dims() dimensions, or `particles` 1D particles on a 2D grid.
TrajectoryEnsemble make_ensemble(std::vector<Point> start, double t, std::size_t particles,
                                 int spatial_dims, std::uint64_t seed = 0);

/// Velocity at (r, t) for trajectory integration.
class VelocitySource {
 public:
  virtual ~VelocitySource() = default;
  virtual Point velocity(const Point& r, double t) const = 0;
  virtual bool masked(const Point&, double) const { return false; }
  /// Interior domain; members leaving it are flagged as exited.
  virtual bool inside(const Point& r) const = 0;
  /// Scale for the velocity-gradient probe that decides step splitting;
  /// 0 disables splitting.
  virtual double step_length() const { return 0.0; }
};

/// Closed-form velocity field, e.g. for convergence studies.
class AnalyticVelocity final : public VelocitySource {
 public:
  using Fn = std::function<Point(const Point&, double)>;
  AnalyticVelocity(Fn fn, std::function<bool(const Point&)> inside = {})
      : fn_(std::move(fn)), inside_(std::move(inside)) {}
  Point velocity(const Point& r, double t) const override { return fn_(r, t); }
  bool inside(const Point& r) const override { return inside_ ? inside_(r) : true; }

 private:
  Fn fn_;
  std::function<bool(const Point&)> inside_;
};

/// Interior domain of a grid: the full box, minus the absorbing layers.
bool inside_interior(const Grid& g, const Point& r);

/// Velocity fields at a sequence of times; between samples the velocity is
/// interpolated linearly in time. Requests outside the stored span throw
/// MissingTimeSample.
class FieldTimeline final : public VelocitySource {
 public:
  FieldTimeline() = default;
  explicit FieldTimeline(const EvolutionRecord& rec);

  void push(VelocityField f);
  void push(const WaveFunction& wf) { push(velocity_field(wf)); }
  /// Drops samples strictly older than t that are not needed to bracket t.
  void drop_before(double t);
  std::size_t samples() const { return fields_.size(); }
  double first_time() const;
  double last_time() const;

  Point velocity(const Point& r, double t) const override;
  bool masked(const Point& r, double t) const override;
  bool inside(const Point& r) const override;
  /// Half the finest grid spacing.
  double step_length() const override;

 private:
  std::pair<std::size_t, double> bracket(double t) const;
  std::deque<VelocityField> fields_;
};

/// One RK4 step of every active member over [ens.time, ens.time + dt].
/// Velocity is evaluated at t, t + dt/2 and t + dt. For a single 1D
/// coordinate the step is split into 2^n equal substeps for all members
/// when dt |dv/dx| at some member (probed at +-src.step_length()) exceeds
/// 1/4, so steep flow near quasi-nodes cannot swap neighbours. Members that leave the
/// interior are flagged, their exit time recorded, and frozen.
void advance_trajectories(TrajectoryEnsemble& ens, const VelocitySource& src, double dt);

/// Refreshes ens.velocity from the source at ens.time (frozen members keep 0).
void update_velocities(TrajectoryEnsemble& ens, const VelocitySource& src);

struct CoevolutionOptions {
  double dt = 0.0;               // trajectory step; the field advances in dt/2 half-steps
  double record_interval = 0.0;  // ensemble history cadence (0 = every step)
  CheckpointSpec field_checkpoints{};
  std::function<void(const WaveFunction&, const TrajectoryEnsemble&)> on_record;
};

struct CoevolutionResult {
  TrajectoryEnsemble ensemble;
  EvolutionRecord record;
};

/// Advances the field and the ensemble together from wf.time() to t1.
CoevolutionResult coevolve(const WaveFunction& wf, Propagator& prop, TrajectoryEnsemble ens,
                           double t1, const CoevolutionOptions& opt);

/// Average-trajectory reconstruction: integrates the velocity field of
/// stored checkpoints from launch points. Equivalent to advance_trajectories
/// on the same FieldTimeline; the launch points must be unmasked.
TrajectoryEnsemble streamline_reconstruction(const EvolutionRecord& rec, const std::vector<Point>& launch,
                                             double dt, std::size_t particles = 1);

/// CSV rows t, alpha, k, x[, y], vx[, vy], flags over the recorded history.
void write_trajectories_csv(const TrajectoryEnsemble& ens, const std::filesystem::path& path,
                            const PhysicalUnits& units = PhysicalUnits{});
/// One JSON object per recorded time with all members.
void write_trajectories_ndjson(const TrajectoryEnsemble& ens, const std::filesystem::path& path,
                               const PhysicalUnits& units = PhysicalUnits{});

}  // namespace bohmkit
