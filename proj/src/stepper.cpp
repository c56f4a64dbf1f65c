#include "cafem/stepper.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <string>
#include <unordered_map>

#include "cafem/errors.hpp"

namespace cafem {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void spd_spot_check(const SparseMatrixSym& a, const char* name) {
  if (a.asymmetry() > 1e-12 * std::max(1.0, a.total()))
    throw InputError(std::string("system matrix for ") + name + " is not symmetric");
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(a.size()), y(a.size());
  for (int trial = 0; trial < 4; ++trial) {
    for (auto& v : x) v = dist(rng);
    a.matvec(x, y);
    if (!(dot(x, y) > 0.0)) throw InputError(std::string("system matrix for ") + name + " is not positive definite");
  }
}

void check_field(std::span<const double> f, double threshold, const char* name, long step, double t) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f[i]))
      throw InstabilityError(std::string("non-finite ") + name + " at node " + std::to_string(i), step, t);
    if (std::abs(f[i]) > threshold)
      throw InstabilityError(std::string(name) + " exceeds blow-up threshold at node " + std::to_string(i) + " (" +
                                 std::to_string(f[i]) + ")",
                             step, t);
  }
}

struct MinMaxMean {
  double min = 0.0, max = 0.0, mean = 0.0;
};

MinMaxMean stats(std::span<const double> f, std::span<const double> weights) {
  if (f.empty()) return {};
  MinMaxMean s{f[0], f[0], 0.0};
  double mass = 0.0, area = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    s.min = std::min(s.min, f[i]);
    s.max = std::max(s.max, f[i]);
    mass += weights[i] * f[i];
    area += weights[i];
  }
  s.mean = mass / area;
  return s;
}

}  // namespace

Discretization discretize(std::shared_ptr<const Geometry> geometry) {
  if (!geometry) throw InputError("discretize: null geometry");
  Discretization d;
  d.geometry = geometry;
  const Geometry& g = *geometry;
  d.cytosol = fem::assemble_operators(g.cytosol);
  d.er = fem::assemble_operators(g.er);
  d.outer_quad = fem::edge_quadrature(g.cytosol, BoundaryMarker::Outer);
  d.interface_quad = fem::edge_quadrature(g.cytosol, BoundaryMarker::Interface);
  d.cytosol_quad = fem::volume_quadrature(g.cytosol);
  d.er_quad = fem::volume_quadrature(g.er);

  const std::size_t n = g.interface.size();
  std::unordered_map<int, std::size_t> ring_of;
  for (std::size_t k = 0; k < n; ++k) ring_of[g.interface.cytosol_nodes[k]] = k;
  for (const auto& p : d.interface_quad.points) {
    const auto a = ring_of.find(p.nodes[0]), b = ring_of.find(p.nodes[1]);
    if (a == ring_of.end() || b == ring_of.end())
      throw StructuralError("interface edge " + std::to_string(p.edge) + " has a node outside the interface map");
    if (b->second == (a->second + 1) % n) {
      d.interface_ring_edge.push_back(a->second);
      d.interface_reversed.push_back(false);
    } else if (a->second == (b->second + 1) % n) {
      d.interface_ring_edge.push_back(b->second);
      d.interface_reversed.push_back(true);
    } else {
      throw StructuralError("interface edge " + std::to_string(p.edge) + " does not join neighbouring ring nodes");
    }
  }
  std::vector<double> ones(g.cytosol.num_vertices(), 1.0);
  d.cytosol_weights = d.cytosol.mass * ones;
  ones.assign(g.er.num_vertices(), 1.0);
  d.er_weights = d.er.mass * ones;
  return d;
}

FieldState uniform_state(const Discretization& disc, double u0, double b0, double ue0, GatingState gating0,
                         bool with_buffer) {
  const Geometry& g = *disc.geometry;
  FieldState s;
  s.u.assign(g.cytosol.num_vertices(), u0);
  if (with_buffer) s.b.assign(g.cytosol.num_vertices(), b0);
  s.ue.assign(g.er.num_vertices(), ue0);
  s.gating = GatingField(g.interface.size(), gating0);
  return s;
}

std::vector<double> interface_trace(const Discretization& disc, std::span<const double> u) {
  const auto& nodes = disc.geometry->interface.cytosol_nodes;
  std::vector<double> trace(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) trace[k] = u[nodes[k]];
  return trace;
}

std::vector<double> interface_trace_er(const Discretization& disc, std::span<const double> ue) {
  const auto& nodes = disc.geometry->interface.er_nodes;
  std::vector<double> trace(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) trace[k] = ue[nodes[k]];
  return trace;
}

SteppingPlan build_plan(const Discretization& disc, Diffusion diffusion, double dt, bool with_buffer,
                        StepperOptions options) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("time step must be positive");
  if (!(diffusion.cytosol > 0.0) || !(diffusion.er > 0.0) || (with_buffer && !(diffusion.buffer > 0.0)))
    throw InputError("diffusion coefficients must be positive");
  auto order = options.solve_order;
  std::sort(order.begin(), order.end());
  if (order != std::array<int, 3>{0, 1, 2}) throw InputError("solve_order must be a permutation of {0, 1, 2}");

  SteppingPlan plan;
  plan.dt = dt;
  plan.diffusion = diffusion;
  plan.with_buffer = with_buffer;
  plan.options = options;
  auto make = [&](const fem::AssembledOperators& ops, double d, const char* name) {
    auto a = std::make_shared<const SparseMatrixSym>(SparseMatrixSym::combine(1.0, ops.mass, dt * d, ops.stiffness));
    spd_spot_check(*a, name);
    return std::make_shared<const PcgSolver>(a, options.solve);
  };
  plan.cytosol = make(disc.cytosol, diffusion.cytosol, "u");
  if (with_buffer) plan.buffer = make(disc.cytosol, diffusion.buffer, "b");
  plan.er = make(disc.er, diffusion.er, "ue");
  return plan;
}

void step(FieldState& state, const SteppingPlan& plan, const Discretization& disc, Problem& problem,
          StepReport* report) {
  const auto start = Clock::now();
  const Geometry& geo = *disc.geometry;
  const double dt = plan.dt;
  const double t = state.t;
  const long next_step = state.step + 1;
  const bool buffer = plan.with_buffer;
  if (buffer != problem.has_buffer()) throw InputError("plan and problem disagree on the buffer field");

  const std::size_t nc = geo.cytosol.num_vertices(), ne = geo.er.num_vertices();
  std::vector<double> load_u(nc, 0.0), load_b(buffer ? nc : 0, 0.0), load_e(ne, 0.0);
  const std::vector<double> p_ring = open_probability(state.gating);
  const std::vector<double> ue_ring = interface_trace_er(disc, state.ue);
  const std::size_t n_ring = p_ring.size();

  try {
    for (std::size_t k = 0; k < disc.outer_quad.points.size(); ++k) {
      const fem::EdgePoint& q = disc.outer_quad.points[k];
      const double g = problem.plasma_flux({q.x, q.y, t, q.interpolate(state.u), q.nx, q.ny});
      if (!std::isfinite(g)) throw Error("non-finite plasma flux on outer edge " + std::to_string(q.edge));
      const double w = disc.outer_quad.weights[k] * g;
      load_u[q.nodes[0]] += w * (1.0 - q.s);
      load_u[q.nodes[1]] += w * q.s;
      if (buffer && problem.has_buffer_boundary_flux()) {
        const double gb = problem.buffer_boundary_flux(q.x, q.y, t, q.nx, q.ny) * disc.outer_quad.weights[k];
        load_b[q.nodes[0]] += gb * (1.0 - q.s);
        load_b[q.nodes[1]] += gb * q.s;
      }
    }

    const auto& er_nodes = geo.interface.er_nodes;
    for (std::size_t k = 0; k < disc.interface_quad.points.size(); ++k) {
      const fem::EdgePoint& q = disc.interface_quad.points[k];
      const std::size_t r0 = disc.interface_ring_edge[k], r1 = (r0 + 1) % n_ring;
      const double s = disc.interface_reversed[k] ? 1.0 - q.s : q.s;
      const double ue = (1.0 - s) * ue_ring[r0] + s * ue_ring[r1];
      const double p = (1.0 - s) * p_ring[r0] + s * p_ring[r1];
      const InterfaceFlux f = problem.interface_flux({q.x, q.y, t, q.interpolate(state.u), ue, p, -q.nx, -q.ny, r0, s});
      if (!std::isfinite(f.into_cytosol) || !std::isfinite(f.into_er))
        throw Error("non-finite interface flux on ring edge " + std::to_string(r0));
      const double w = disc.interface_quad.weights[k];
      load_u[q.nodes[0]] += w * f.into_cytosol * (1.0 - q.s);
      load_u[q.nodes[1]] += w * f.into_cytosol * q.s;
      load_e[er_nodes[r0]] += w * f.into_er * (1.0 - s);
      load_e[er_nodes[r1]] += w * f.into_er * s;
      if (buffer && problem.has_buffer_boundary_flux()) {
        const double gb = problem.buffer_boundary_flux(q.x, q.y, t, q.nx, q.ny) * w;
        load_b[q.nodes[0]] += gb * (1.0 - q.s);
        load_b[q.nodes[1]] += gb * q.s;
      }
    }

    if (problem.has_volume_sources()) {
      for (std::size_t k = 0; k < disc.cytosol_quad.points.size(); ++k) {
        const fem::TrianglePoint& q = disc.cytosol_quad.points[k];
        const VolumePoint vp{q.x, q.y, t, q.interpolate(state.u), buffer ? q.interpolate(state.b) : 0.0};
        const double w = disc.cytosol_quad.weights[k];
        const double fu = problem.calcium_source(vp);
        const double fb = buffer ? problem.buffer_source(vp) : 0.0;
        if (!std::isfinite(fu) || !std::isfinite(fb))
          throw Error("non-finite volume source in triangle " + std::to_string(q.triangle));
        for (int i = 0; i < 3; ++i) {
          load_u[q.nodes[i]] += w * fu * q.bary[i];
          if (buffer) load_b[q.nodes[i]] += w * fb * q.bary[i];
        }
      }
    }
    if (problem.has_er_source()) {
      for (std::size_t k = 0; k < disc.er_quad.points.size(); ++k) {
        const fem::TrianglePoint& q = disc.er_quad.points[k];
        const double fe = problem.er_source({q.x, q.y, t, q.interpolate(state.ue), 0.0});
        if (!std::isfinite(fe)) throw Error("non-finite ER source in triangle " + std::to_string(q.triangle));
        const double w = disc.er_quad.weights[k];
        for (int i = 0; i < 3; ++i) load_e[q.nodes[i]] += w * fe * q.bary[i];
      }
    }
  } catch (const InputError&) {
    throw;
  } catch (const Error& e) {
    throw InstabilityError(e.what(), next_step, t + dt);
  }

  // right-hand sides M X^n + dt * load
  auto rhs_of = [dt](const SparseMatrixSym& m, std::span<const double> x, std::vector<double>& load) {
    std::vector<double> rhs = m * x;
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += dt * load[i];
    return rhs;
  };
  std::vector<double> rhs_u = rhs_of(disc.cytosol.mass, state.u, load_u);
  std::vector<double> rhs_b = buffer ? rhs_of(disc.cytosol.mass, state.b, load_b) : std::vector<double>{};
  std::vector<double> rhs_e = rhs_of(disc.er.mass, state.ue, load_e);
  check_field(rhs_u, std::numeric_limits<double>::infinity(), "u right-hand side", next_step, t + dt);
  check_field(rhs_b, std::numeric_limits<double>::infinity(), "b right-hand side", next_step, t + dt);
  check_field(rhs_e, std::numeric_limits<double>::infinity(), "ue right-hand side", next_step, t + dt);

  std::vector<double> u_new = state.u, b_new = state.b, ue_new = state.ue;
  std::array<int, 3> iterations{};
  const auto solve_start = Clock::now();
  auto solve_one = [&](int which) {
    switch (which) {
      case 0:
        iterations[0] = plan.cytosol->solve(rhs_u, u_new).iterations;
        break;
      case 1:
        if (buffer) iterations[1] = plan.buffer->solve(rhs_b, b_new).iterations;
        break;
      default:
        iterations[2] = plan.er->solve(rhs_e, ue_new).iterations;
        break;
    }
  };
  if (plan.options.threads > 1) {
    std::array<std::future<void>, 3> jobs;
    for (int k = 0; k < 3; ++k) jobs[k] = std::async(std::launch::async, solve_one, plan.options.solve_order[k]);
    for (auto& j : jobs) j.get();
  } else {
    for (int which : plan.options.solve_order) solve_one(which);
  }
  const double solve_seconds = seconds_since(solve_start);

  const double thr = plan.options.blowup_threshold;
  check_field(u_new, thr, "u", next_step, t + dt);
  check_field(b_new, thr, "b", next_step, t + dt);
  check_field(ue_new, thr, "ue", next_step, t + dt);

  // gating driven by the trace of U^n
  GatingField gating = state.gating;
  try {
    step_gating(gating, interface_trace(disc, state.u), dt, problem.rates());
  } catch (const InputError&) {
    throw;
  } catch (const Error& e) {
    throw InstabilityError(e.what(), next_step, t + dt);
  }

  state.u = std::move(u_new);
  state.b = std::move(b_new);
  state.ue = std::move(ue_new);
  state.gating = std::move(gating);
  state.step = next_step;
  state.t = static_cast<double>(next_step) * dt;
  problem.advance(t, dt);

  if (report) {
    report->iterations = iterations;
    report->solve_seconds = solve_seconds;
    report->total_seconds = seconds_since(start);
  }
}

TimeSeriesRow summarize(const FieldState& state, const Discretization& disc, int iterations) {
  TimeSeriesRow row;
  row.t = state.t;
  const auto u = stats(state.u, disc.cytosol_weights);
  const auto b = stats(state.b, disc.cytosol_weights);
  const auto e = stats(state.ue, disc.er_weights);
  row.u_min = u.min, row.u_max = u.max, row.u_mean = u.mean;
  row.b_min = b.min, row.b_max = b.max, row.b_mean = b.mean;
  row.ue_min = e.min, row.ue_max = e.max, row.ue_mean = e.mean;
  const auto p = open_probability(state.gating);
  if (!p.empty()) {
    row.p_min = *std::min_element(p.begin(), p.end());
    row.p_max = *std::max_element(p.begin(), p.end());
  }
  row.iterations = iterations;
  return row;
}

std::vector<SnapshotRequest> schedule_snapshots(std::span<const double> times, double dt, long total_steps) {
  std::vector<SnapshotRequest> out;
  for (double t : times) {
    if (!(t >= 0.0)) throw InputError("snapshot times must be non-negative");
    const long k = std::clamp(static_cast<long>(std::floor(t / dt + 0.5)), 0L, total_steps);
    out.push_back({t, k, static_cast<double>(k) * dt});
  }
  return out;
}

RunResult run(FieldState initial, const SteppingPlan& plan, const Discretization& disc, Problem& problem,
              const RunSchedule& schedule, const RunObserver& observer) {
  RunResult result;
  FieldState& state = initial;
  const long first = state.step;
  const long last = first + schedule.steps;
  const long interval = std::max(1L, schedule.series_interval);

  auto emit_snapshots = [&] {
    if (!observer.on_snapshot) return;
    for (const auto& s : schedule.snapshots)
      if (s.step == state.step) observer.on_snapshot(state, s);
  };
  if (observer.on_row) observer.on_row(summarize(state, disc, 0));
  emit_snapshots();

  const auto start = Clock::now();
  while (state.step < last) {
    StepReport report;
    try {
      step(state, plan, disc, problem, &report);
    } catch (const InstabilityError& e) {
      result.instability = InstabilityInfo{e.step(), e.time(), e.what()};
      break;
    }
    ++result.steps_taken;
    result.solve_seconds += report.solve_seconds;
    if (observer.on_row && ((state.step - first) % interval == 0 || state.step == last))
      observer.on_row(summarize(state, disc, report.iterations[0] + report.iterations[1] + report.iterations[2]));
    emit_snapshots();
  }
  result.step_seconds = seconds_since(start);
  result.final_state = std::move(state);
  return result;
}

void Trajectory::push(double t, std::vector<double> field) {
  if (!times_.empty() && !(t > times_.back())) throw InputError("trajectory times must increase");
  if (!fields_.empty() && field.size() != fields_.front().size()) throw InputError("trajectory field size changed");
  times_.push_back(t);
  fields_.push_back(std::move(field));
}

std::vector<double> Trajectory::at(double t) const {
  if (times_.empty() || t < times_.front() || t > times_.back())
    throw InputError("time " + std::to_string(t) + " outside the stored trajectory");
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.end()) return fields_.back();
  const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
  if (t == times_[i]) return fields_[i];
  const double w = (t - times_[i]) / (times_[i + 1] - times_[i]);
  std::vector<double> out(fields_[i].size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (1.0 - w) * fields_[i][k] + w * fields_[i + 1][k];
  return out;
}

}  // namespace cafem
