#include "cafem/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cafem/errors.hpp"

namespace cafem {

namespace {

void require_positive(double v, const char* key) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key, "must be positive (got " + std::to_string(v) + ")");
}

void require_nonnegative(double v, const char* key) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(key, "must be non-negative (got " + std::to_string(v) + ")");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

long ScenarioConfig::steps() const { return std::lround(final_time / dt); }

void ScenarioConfig::validate() const {
  require_positive(r_inner, "geometry.r_inner");
  require_positive(r_outer, "geometry.r_outer");
  require_positive(h, "geometry.h");
  if (!(r_inner < r_outer)) throw ConfigError("geometry.r_outer", "must exceed geometry.r_inner");
  if (!(h < r_inner)) throw ConfigError("geometry.h", "must be smaller than geometry.r_inner");

  require_positive(diffusion.cytosol, "diffusion.cytosol");
  require_positive(diffusion.er, "diffusion.er");
  if (buffer) require_positive(diffusion.buffer, "diffusion.buffer");

  require_nonnegative(flux.c1e, "er_membrane.c1e");
  require_nonnegative(flux.c2e, "er_membrane.c2e");
  require_nonnegative(flux.c3e, "er_membrane.c3e");
  require_positive(flux.ks, "er_membrane.ks");
  require_positive(flux.m, "er_membrane.m");
  require_nonnegative(flux.c1c, "plasma_membrane.c1");
  require_nonnegative(flux.c2c, "plasma_membrane.c2");
  require_nonnegative(flux.c3c, "plasma_membrane.c3");
  require_positive(flux.kp, "plasma_membrane.kp");
  require_positive(flux.kn, "plasma_membrane.kn");
  require_nonnegative(flux.c_out, "plasma_membrane.c_out");
  require_nonnegative(flux.b0, "buffer.b0");
  require_nonnegative(flux.kb_minus, "buffer.kb_minus");
  require_nonnegative(flux.kb_plus, "buffer.kb_plus");

  require_positive(rates.ka_plus, "gating.ka_plus");
  require_positive(rates.ka_minus, "gating.ka_minus");
  require_positive(rates.kb_plus, "gating.kb_plus");
  require_positive(rates.kb_minus, "gating.kb_minus");
  require_positive(rates.kc_plus, "gating.kc_plus");
  require_positive(rates.kc_minus, "gating.kc_minus");
  if (!gating0.in_simplex())
    throw ConfigError("gating.c1", "initial channel state (" + fmt(gating0.c1) + ", " + fmt(gating0.o) + ", " +
                                       fmt(gating0.c2) + ") is outside the simplex");

  require_nonnegative(u0, "initial.u");
  require_nonnegative(ue0, "initial.ue");
  if (buffer) require_nonnegative(b_init, "buffer.initial");

  if (influx.shape != InfluxPulse::Shape::None) {
    require_nonnegative(influx.amplitude, "influx.amplitude");
    if (!(influx.t_end > influx.t_start)) throw ConfigError("influx.t_end", "must exceed influx.t_start");
  }
  if (clamp.enabled) {
    require_positive(clamp.a, "clamp.a");
    require_positive(clamp.upper, "clamp.upper");
  }

  require_positive(dt, "numerics.dt");
  require_positive(final_time, "numerics.final_time");
  const double n = std::round(final_time / dt);
  if (n < 1.0 || std::abs(n * dt - final_time) > 1e-9 * final_time)
    throw ConfigError("numerics.dt", "dt = " + fmt(dt) + " does not divide final_time = " + fmt(final_time));

  if (series_interval < 1) throw ConfigError("output.series_interval", "must be at least 1");
  for (double t : snapshot_times)
    if (!(t >= 0.0 && t <= final_time))
      throw ConfigError("output.snapshots", "time " + fmt(t) + " outside [0, " + fmt(final_time) + "]");
}

ScenarioConfig builtin_scenario(const std::string& id) {
  ScenarioConfig c;
  if (id == "ex3") {
    // Minimal wave model: no buffer, unit diffusion.
    c.name = "ex3";
    c.r_inner = 1.0;
    c.r_outer = 2.0;
    c.h = std::numbers::pi / 48.0;
    c.diffusion = {1.0, 1.0, 1.0};
    const double c3 = 1.0 / 540000.0;
    c.flux.c1e = 0.17;
    c.flux.c2e = 8853.54;
    c.flux.c3e = 1.0 / 150.0;
    c.flux.ks = 2.0;
    c.flux.c1c = 19954.0 * c3;
    c.flux.c2c = 19954.0 * c3;
    c.flux.c3c = c3;
    c.flux.kp = 1.0;
    c.flux.kn = 1.0;
    c.flux.c_out = 1000.0;
    c.buffer = false;
    c.influx = {InfluxPulse::Shape::Rectangular, 3.0, 0.05, 0.65, 2.5};
    c.u0 = 0.05;
    c.ue0 = 180.0;
    c.gating0 = {0.798, 0.0, 0.202};
    c.dt = 0.00375;
    c.final_time = 12.0;
    c.snapshot_times = {0.12, 0.6, 0.72, 0.84, 1.08, 1.44, 1.92, 3.12, 4.32, 5.52, 7.32, 9.12};
    c.series_interval = 1;
    c.output_dir = "output/ex3";
    return c;
  }
  if (id == "ex4") {
    // Full model with mobile buffer.
    c.name = "ex4";
    c.r_inner = 1.2;
    c.r_outer = 2.0;
    c.h = std::numbers::pi / 32.0;
    c.diffusion = {220.0, 20.0, 220.0};
    c.flux.c1e = 0.829468;
    c.flux.c2e = 11000.0;
    c.flux.c3e = 0.038;
    c.flux.ks = 0.18;
    c.flux.c1c = 8.5;
    c.flux.c2c = 37.6;
    c.flux.c3c = 0.0045;
    c.flux.kp = 0.06;
    c.flux.kn = 1.8;
    c.flux.c_out = 1000.0;
    c.flux.b0 = 40.0;
    c.flux.kb_minus = 16.65;
    c.flux.kb_plus = 27.0;
    c.buffer = true;
    c.influx = {InfluxPulse::Shape::SmoothBump, 240.0, 0.1, 0.3, 2.5};
    c.u0 = 0.05;
    c.b_init = 37.0;
    c.ue0 = 250.0;
    c.gating0 = {0.994, 1.5721e-7, 5.6625e-3};
    c.dt = 0.01 / 16.0;
    c.final_time = 80.0;
    c.snapshot_times = {0.04, 0.24, 0.44, 0.64, 0.84, 1.04, 1.24, 1.44, 1.64, 1.88, 2.44, 3.64, 4.8, 16.8, 28.8, 74.4};
    c.series_interval = 16;
    c.output_dir = "output/ex4";
    return c;
  }
  throw InputError("unknown scenario '" + id + "' (expected ex3 or ex4)");
}

std::vector<std::string> builtin_scenario_ids() { return {"ex3", "ex4"}; }

std::unique_ptr<CellModel> make_model(const ScenarioConfig& config) {
  return std::make_unique<CellModel>(config.diffusion, config.flux, config.rates, config.influx, config.clamp,
                                     config.buffer);
}

FieldState initial_state(const ScenarioConfig& config, const Discretization& disc) {
  return uniform_state(disc, config.u0, config.b_init, config.ue0, config.gating0, config.buffer);
}

ScenarioSetup prepare(const ScenarioConfig& config, const StepperOptions& options) {
  config.validate();
  ScenarioSetup s;
  s.config = config;
  s.geometry = std::make_shared<const Geometry>(generate_geometry(config.r_inner, config.r_outer, config.h));
  s.disc = discretize(s.geometry);
  s.model = make_model(config);
  StepperOptions opts = options;
  if (config.deterministic) opts.threads = 1;
  s.plan = build_plan(s.disc, config.diffusion, config.dt, config.buffer, opts);
  return s;
}

RunResult run_scenario(ScenarioSetup& setup, const RunObserver& observer) {
  RunSchedule schedule;
  schedule.steps = setup.config.steps();
  schedule.series_interval = setup.config.series_interval;
  schedule.snapshots = schedule_snapshots(setup.config.snapshot_times, setup.config.dt, schedule.steps);
  return run(initial_state(setup.config, setup.disc), setup.plan, setup.disc, *setup.model, schedule, observer);
}

std::vector<CheckItem> check_scenario(const ScenarioConfig& config) {
  std::vector<CheckItem> items;
  auto record = [&](std::string name, bool ok, std::string detail = {}) {
    items.push_back({std::move(name), ok, std::move(detail)});
  };

  try {
    config.validate();
    record("configuration invariants", true);
  } catch (const InputError& e) {
    record("configuration invariants", false, e.what());
    return items;
  }

  std::unique_ptr<ScenarioSetup> setup;
  try {
    setup = std::make_unique<ScenarioSetup>(prepare(config));
    record("system matrices SPD", true);
  } catch (const Error& e) {
    record("system matrices SPD", false, e.what());
    return items;
  }
  const Geometry& g = *setup->geometry;

  const MeshDiagnostics dc = validate_mesh(g.cytosol), de = validate_mesh(g.er);
  record("cytosol mesh valid", dc.ok(DomainTag::Cytosol),
         "min angle " + fmt(dc.min_angle_deg) + " deg, " + std::to_string(g.cytosol.num_triangles()) + " triangles");
  record("ER mesh valid", de.ok(DomainTag::ER),
         "min angle " + fmt(de.min_angle_deg) + " deg, " + std::to_string(g.er.num_triangles()) + " triangles");

  bool paired = g.interface.cytosol_nodes.size() == g.interface.er_nodes.size();
  for (std::size_t k = 0; paired && k < g.interface.size(); ++k)
    paired = g.cytosol.vertices[g.interface.cytosol_nodes[k]] == g.er.vertices[g.interface.er_nodes[k]];
  record("interface nodes paired", paired, std::to_string(g.interface.size()) + " ring nodes");

  // Sign conditions of the membrane fluxes on a grid of states.
  bool signs = true;
  std::string sign_detail;
  const FluxParams& f = config.flux;
  const double top = std::max({10.0 * config.ue0, 10.0 * config.u0, f.c_out, 1.0});
  for (int i = 0; i <= 200 && signs; ++i) {
    const double v = top * i / 200.0;
    for (double p : {0.0, 0.5, 1.0}) {
      if (flux_er(0.0, v, p, f, config.clamp) > 0.0) signs = false, sign_detail = "g_e(0, ue) > 0 at ue = " + fmt(v);
      if (flux_er(v, 0.0, p, f, config.clamp) < 0.0) signs = false, sign_detail = "g_e(u, 0) < 0 at u = " + fmt(v);
    }
  }
  if (flux_plasma(0.0, 0.0, 0.0, 0.0, f, {}, config.clamp) < 0.0) signs = false, sign_detail = "g_c(0) < 0";
  if (flux_plasma(f.c_out, 0.0, 0.0, 0.0, f, {}, config.clamp) > 0.0) signs = false, sign_detail = "g_c(c_out) > 0";
  record("flux sign conditions", signs, sign_detail);

  record("initial gating state in simplex", config.gating0.in_simplex());

  FieldState state = initial_state(config, setup->disc);
  try {
    step(state, setup->plan, setup->disc, *setup->model);
    auto positive = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
    };
    const bool ok = positive(state.u) && positive(state.ue) && (!config.buffer || positive(state.b));
    record("trial step finite and positive", ok);
  } catch (const Error& e) {
    record("trial step finite and positive", false, e.what());
  }
  return items;
}

}  // namespace cafem
