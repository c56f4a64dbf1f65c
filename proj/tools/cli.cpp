#include "cafem/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>

#include "cafem/config.hpp"
#include "cafem/errors.hpp"
#include "cafem/mesh.hpp"
#include "cafem/output.hpp"
#include "cafem/scenario.hpp"
#include "cafem/verification.hpp"

namespace fs = std::filesystem;

namespace cafem {

namespace {

bool parse_plain(const std::string& s, double& v) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

struct ScenarioSource {
  std::string scenario;
  std::string config;
  std::optional<double> dt, final_time;
  std::string h;

  void add_options(CLI::App* app) {
    auto* s = app->add_option("--scenario", scenario, "Built-in scenario")->check(CLI::IsMember({"ex3", "ex4"}));
    auto* c = app->add_option("--config", config, "Scenario configuration file");
    s->excludes(c);
    c->excludes(s);
    app->add_option("--dt", dt, "Override the time step");
    app->add_option("--final-time", final_time, "Override the final time");
    app->add_option("--mesh-size", h, "Override the mesh size (number or pi/N)");
  }

  ScenarioConfig load() const {
    if (scenario.empty() && config.empty()) throw InputError("one of --scenario or --config is required");
    ScenarioConfig c = scenario.empty() ? parse_config(fs::path(config)) : builtin_scenario(scenario);
    if (dt) c.dt = *dt;
    if (final_time) {
      c.final_time = *final_time;
      std::erase_if(c.snapshot_times, [&](double t) { return t > c.final_time; });
    }
    if (!h.empty()) c.h = parse_mesh_size(h);
    c.validate();
    return c;
  }
};

std::string snapshot_stem(const SnapshotRequest& s) {
  std::ostringstream name;
  name << "snapshot_" << std::setw(7) << std::setfill('0') << s.step;
  return name.str();
}

int run_mesh(const std::string& h_text, double r_inner, double r_outer, const fs::path& dir, std::ostream& out) {
  const Geometry g = generate_geometry(r_inner, r_outer, parse_mesh_size(h_text));
  fs::create_directories(dir);
  write_mesh(g.cytosol, dir / "cytosol.mesh");
  write_mesh(g.er, dir / "er.mesh");
  for (const Mesh2D* m : {&g.cytosol, &g.er}) {
    const MeshDiagnostics d = validate_mesh(*m);
    out << to_string(m->domain) << ": " << m->num_vertices() << " vertices, " << m->num_triangles()
        << " triangles, min angle " << std::fixed << std::setprecision(2) << d.min_angle_deg << " deg, max edge "
        << std::setprecision(4) << d.max_edge << (d.ok(m->domain) ? ", valid" : ", INVALID") << '\n';
    out.unsetf(std::ios::floatfield);
    if (!d.ok(m->domain)) return kExitValidation;
  }
  out << "interface ring: " << g.interface.size() << " nodes\n";
  out << "wrote " << (dir / "cytosol.mesh").string() << " and " << (dir / "er.mesh").string() << '\n';
  return kExitOk;
}

int run_converge(int example, int levels, const std::string& csv, std::ostream& out) {
  if (levels < 2) throw InputError("--levels must be at least 2");
  StepperOptions options;
  options.threads = threads_from_environment();
  const auto hs = verification::default_levels(levels);
  const auto report = verification::convergence_study(example, hs, options);
  verification::print_report(report, out);
  if (!csv.empty()) {
    std::ofstream f(csv);
    verification::write_report_csv(report, f);
    if (!f) throw Error("failed writing " + csv);
    out << "wrote " << csv << '\n';
  }
  return kExitOk;
}

int run_simulate(const ScenarioSource& source, const std::string& out_dir, bool snapshots, std::ostream& out,
                 std::ostream& err) {
  ScenarioConfig config = source.load();
  if (!out_dir.empty()) config.output_dir = out_dir;
  if (!snapshots) config.snapshot_times.clear();
  StepperOptions options;
  options.threads = threads_from_environment();
  ScenarioSetup setup = prepare(config, options);

  const fs::path dir = config.output_dir;
  fs::create_directories(dir);
  write_config(config, dir / "config.ini");
  TimeSeriesWriter series(dir / "timeseries.csv");
  RunObserver observer;
  observer.on_row = [&](const TimeSeriesRow& row) { series.append(row); };
  observer.on_snapshot = [&](const FieldState& state, const SnapshotRequest& s) {
    write_snapshot_vtk(state, setup.disc, dir / snapshot_stem(s));
  };

  out << "simulate " << config.name << ": h = " << config.h << ", dt = " << config.dt << ", T = " << config.final_time
      << ", " << config.steps() << " steps, " << setup.geometry->cytosol.num_vertices() << " + "
      << setup.geometry->er.num_vertices() << " nodes\n";
  const RunResult result = run_scenario(setup, observer);
  out << "steps taken: " << result.steps_taken << ", step time " << result.step_seconds << " s (solves "
      << result.solve_seconds << " s)\n";
  out << "wrote " << series.rows() << " time-series rows to " << (dir / "timeseries.csv").string() << '\n';
  if (setup.model->low_er_evaluations() > 0)
    err << "warning: ER calcium fell below the regularization floor m in " << setup.model->low_er_evaluations()
        << " flux evaluations\n";
  if (result.instability) {
    err << "instability at step " << result.instability->step << " (t = " << result.instability->t
        << "): " << result.instability->message << '\n';
    return kExitInstability;
  }
  return kExitOk;
}

int run_check(const ScenarioSource& source, std::ostream& out) {
  const ScenarioConfig config = source.load();
  const auto items = check_scenario(config);
  bool ok = true;
  for (const auto& item : items) {
    out << (item.ok ? "PASS " : "FAIL ") << item.name;
    if (!item.detail.empty()) out << " (" << item.detail << ')';
    out << '\n';
    ok = ok && item.ok;
  }
  return ok ? kExitOk : kExitValidation;
}

}  // namespace

double parse_mesh_size(const std::string& text) {
  double v = 0.0;
  if (parse_plain(text, v) && v > 0.0) return v;
  if (text.starts_with("pi/")) {
    double d = 0.0;
    if (parse_plain(text.substr(3), d) && d > 0.0) return std::numbers::pi / d;
  }
  throw InputError("invalid mesh size '" + text + "' (expected a positive number or pi/N)");
}

int threads_from_environment() {
  const char* env = std::getenv("CAFEM_THREADS");
  if (!env || !*env) return 1;
  int n = 0;
  const std::string s(env);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc() || p != s.data() + s.size() || n < 1)
    throw InputError("CAFEM_THREADS must be a positive integer (got '" + s + "')");
  return n;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"cafem: finite element calcium dynamics in a cell with an ER"};
  app.require_subcommand(1);

  auto* mesh = app.add_subcommand("mesh", "Generate and write the cytosol and ER meshes");
  std::string mesh_h;
  double r_inner = 1.0, r_outer = 2.0;
  std::string mesh_dir = ".";
  mesh->add_option("--mesh-size", mesh_h, "Mesh size (number or pi/N)")->required();
  mesh->add_option("--r-inner", r_inner, "ER radius");
  mesh->add_option("--r-outer", r_outer, "Cell radius");
  mesh->add_option("--out", mesh_dir, "Output directory");

  auto* converge = app.add_subcommand("converge", "Manufactured-solution convergence study");
  int example = 1, levels = 4;
  std::string csv;
  converge->add_option("--example", example, "Example id")->required()->check(CLI::IsMember({1, 2}));
  converge->add_option("--levels", levels, "Number of levels h = pi/8, pi/16, ...");
  converge->add_option("--csv", csv, "Write the report as CSV");

  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write time series and snapshots");
  ScenarioSource sim_source;
  sim_source.add_options(simulate);
  std::string sim_out;
  bool no_snapshots = false;
  simulate->add_option("--out", sim_out, "Output directory (overrides the configuration)");
  simulate->add_flag("--no-snapshots", no_snapshots, "Skip VTK snapshots");

  auto* check = app.add_subcommand("check", "Check a scenario's invariants without a full run");
  ScenarioSource check_source;
  check_source.add_options(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (*mesh) return run_mesh(mesh_h, r_inner, r_outer, mesh_dir, out);
    if (*converge) return run_converge(example, levels, csv, out);
    if (*simulate) return run_simulate(sim_source, sim_out, !no_snapshots, out, err);
    if (*check) return run_check(check_source, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const InstabilityError& e) {
    err << "instability at step " << e.step() << " (t = " << e.time() << "): " << e.what() << '\n';
    return kExitInstability;
  } catch (const SolverError& e) {
    err << "error: " << e.what() << " (residual " << e.residual() << ")\n";
    return kExitInstability;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace cafem
