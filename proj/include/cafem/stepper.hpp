#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cafem/fem.hpp"
#include "cafem/gating.hpp"
#include "cafem/mesh.hpp"
#include "cafem/problem.hpp"
#include "cafem/sparse.hpp"

namespace cafem {

/// Time-independent discrete data of a geometry: operators of both meshes and
/// precomputed quadrature, built once per run.
struct Discretization {
  std::shared_ptr<const Geometry> geometry;
  fem::AssembledOperators cytosol;
  fem::AssembledOperators er;
  fem::EdgeQuadrature outer_quad;      // cytosol mesh, plasma membrane
  fem::EdgeQuadrature interface_quad;  // cytosol mesh, ER membrane
  fem::VolumeQuadrature cytosol_quad;
  fem::VolumeQuadrature er_quad;
  /// Per interface quadrature point: ring edge index and whether the mesh
  /// edge runs against the ring direction.
  std::vector<std::size_t> interface_ring_edge;
  std::vector<bool> interface_reversed;
  /// Row sums of the mass matrices (1'M), used for mass-weighted means.
  std::vector<double> cytosol_weights;
  std::vector<double> er_weights;
};

Discretization discretize(std::shared_ptr<const Geometry> geometry);

/// Nodal fields at time t = step * dt.
struct FieldState {
  std::vector<double> u;   // cytosol calcium
  std::vector<double> b;   // buffer (empty when the problem has none)
  std::vector<double> ue;  // ER calcium
  GatingField gating;      // interface ring order
  double t = 0.0;
  long step = 0;
  friend bool operator==(const FieldState&, const FieldState&) = default;
};

/// Uniform initial data on both meshes.
FieldState uniform_state(const Discretization& disc, double u0, double b0, double ue0, GatingState gating0,
                         bool with_buffer);

/// Calcium trace of the cytosol field on the interface ring.
std::vector<double> interface_trace(const Discretization& disc, std::span<const double> u);
/// ER field on the interface ring.
std::vector<double> interface_trace_er(const Discretization& disc, std::span<const double> ue);

struct StepperOptions {
  SolveOptions solve;
  /// Fields whose magnitude exceeds this are reported as unstable.
  double blowup_threshold = 1e4;
  /// Solve the three systems concurrently when > 1.
  int threads = 1;
  /// Order of the u, b, ue solves within a step (any permutation of {0, 1, 2}).
  std::array<int, 3> solve_order{0, 1, 2};
};

/// Prebuilt solvers for M + dt D K of each field, preconditioned once.
struct SteppingPlan {
  double dt = 0.0;
  Diffusion diffusion;
  bool with_buffer = true;
  StepperOptions options;
  std::shared_ptr<const PcgSolver> cytosol;
  std::shared_ptr<const PcgSolver> buffer;
  std::shared_ptr<const PcgSolver> er;
};

/// Throws InputError for dt <= 0 or if a system matrix fails the SPD spot check.
SteppingPlan build_plan(const Discretization& disc, Diffusion diffusion, double dt, bool with_buffer,
                        StepperOptions options = {});

struct StepReport {
  std::array<int, 3> iterations{};  // u, b, ue
  double solve_seconds = 0.0;
  double total_seconds = 0.0;
};

/// Advances state from t_n to t_n + dt: explicit fluxes and sources at t_n,
/// three decoupled implicit solves, then one backward-Euler gating sweep
/// driven by the old cytosol trace. Throws InstabilityError when a field
/// becomes non-finite or exceeds the blow-up threshold; the state is then
/// left at t_n.
void step(FieldState& state, const SteppingPlan& plan, const Discretization& disc, Problem& problem,
          StepReport* report = nullptr);

struct TimeSeriesRow {
  double t = 0.0;
  double u_min = 0.0, u_max = 0.0, u_mean = 0.0;
  double b_min = 0.0, b_max = 0.0, b_mean = 0.0;
  double ue_min = 0.0, ue_max = 0.0, ue_mean = 0.0;
  double p_min = 0.0, p_max = 0.0;
  int iterations = 0;
};

/// Mass-weighted means; b columns are zero when there is no buffer.
TimeSeriesRow summarize(const FieldState& state, const Discretization& disc, int iterations = 0);

struct SnapshotRequest {
  double requested = 0.0;
  long step = 0;
  double actual = 0.0;
};

/// Maps requested times to the nearest step index (ties round up).
std::vector<SnapshotRequest> schedule_snapshots(std::span<const double> times, double dt, long total_steps);

struct RunSchedule {
  long steps = 0;
  /// Emit a time-series row every this many steps (and at step 0 and the last step).
  long series_interval = 1;
  std::vector<SnapshotRequest> snapshots;
};

struct RunObserver {
  std::function<void(const TimeSeriesRow&)> on_row;
  std::function<void(const FieldState&, const SnapshotRequest&)> on_snapshot;
};

struct InstabilityInfo {
  long step = 0;
  double t = 0.0;
  std::string message;
};

struct RunResult {
  FieldState final_state;
  std::optional<InstabilityInfo> instability;
  long steps_taken = 0;
  double solve_seconds = 0.0;
  double step_seconds = 0.0;
  bool completed() const { return !instability.has_value(); }
};

/// Executes schedule.steps steps from the initial state. Stops at the first
/// instability and reports it instead of throwing.
RunResult run(FieldState initial, const SteppingPlan& plan, const Discretization& disc, Problem& problem,
              const RunSchedule& schedule, const RunObserver& observer = {});

/// Stored nodal history U^0..U^N at increasing times, read back through the
/// piecewise-linear-in-time (hat function) interpolant.
class Trajectory {
 public:
  void push(double t, std::vector<double> field);
  std::size_t size() const { return times_.size(); }
  std::span<const double> times() const { return times_; }
  const std::vector<double>& field(std::size_t i) const { return fields_[i]; }

  /// Throws InputError outside [t_0, t_N].
  std::vector<double> at(double t) const;

 private:
  std::vector<double> times_;
  std::vector<std::vector<double>> fields_;
};

}  // namespace cafem
