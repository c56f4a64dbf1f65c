#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cafem/flux.hpp"
#include "cafem/gating.hpp"
#include "cafem/problem.hpp"
#include "cafem/stepper.hpp"

namespace cafem {

/// Complete description of a cell simulation: geometry, physics, numerics and
/// output. Units are µM and seconds; the engine itself is unit-agnostic.
struct ScenarioConfig {
  std::string name = "custom";

  // geometry
  double r_inner = 1.0;
  double r_outer = 2.0;
  double h = 0.0;

  // physics
  Diffusion diffusion;
  FluxParams flux;
  RateConstants rates = RateConstants::keizer_levine();
  bool buffer = false;
  InfluxPulse influx;
  ClampSpec clamp;

  // initial state
  double u0 = 0.0;
  double b_init = 0.0;
  double ue0 = 0.0;
  GatingState gating0;

  // numerics
  double dt = 0.0;
  double final_time = 0.0;
  bool deterministic = true;

  // output
  std::vector<double> snapshot_times;
  long series_interval = 1;
  std::string output_dir = "output";

  /// Step count N with dt * N = T (valid after validate()).
  long steps() const;

  /// Throws InputError naming the offending key when an invariant fails:
  /// positive geometry and diffusion, valid flux/rate constants, initial
  /// gating state in the simplex, dt dividing T, snapshots within [0, T].
  void validate() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Example 3 ("ex3": minimal wave model) or Example 4 ("ex4": full model with
/// buffer). Throws InputError for other ids.
ScenarioConfig builtin_scenario(const std::string& id);

/// Ids accepted by builtin_scenario.
std::vector<std::string> builtin_scenario_ids();

/// The cell model a configuration describes.
std::unique_ptr<CellModel> make_model(const ScenarioConfig& config);

/// Initial fields of a configuration on a discretization.
FieldState initial_state(const ScenarioConfig& config, const Discretization& disc);

/// Everything needed to run a configuration, built once.
struct ScenarioSetup {
  ScenarioConfig config;
  std::shared_ptr<const Geometry> geometry;
  Discretization disc;
  std::unique_ptr<CellModel> model;
  SteppingPlan plan;
};

/// Validates the configuration, meshes the geometry, assembles operators and
/// prepares the solvers.
ScenarioSetup prepare(const ScenarioConfig& config, const StepperOptions& options = {});

/// Runs the whole schedule of a prepared scenario.
RunResult run_scenario(ScenarioSetup& setup, const RunObserver& observer = {});

struct CheckItem {
  std::string name;
  bool ok = false;
  std::string detail;
};

/// Invariant and property checks of a configuration that do not need a full
/// run: configuration invariants, mesh validity and interface pairing, SPD
/// system matrices, flux sign conditions, initial gating state, and one trial
/// step that must stay finite and positive.
std::vector<CheckItem> check_scenario(const ScenarioConfig& config);

}  // namespace cafem
