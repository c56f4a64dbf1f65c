#include "cafem/verification.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

#include "cafem/errors.hpp"
#include "cafem/fem.hpp"

namespace cafem::verification {

namespace {

// Shared by both examples: u = exp((x^2 + y^2 + 4t)/4) / 10.
ExactField radial_calcium() {
  return {[](double x, double y, double t) { return std::exp((x * x + y * y + 4.0 * t) / 4.0) / 10.0; },
          [](double x, double y, double t) -> std::array<double, 2> {
            const double u = std::exp((x * x + y * y + 4.0 * t) / 4.0) / 10.0;
            return {0.5 * x * u, 0.5 * y * u};
          }};
}

double radial_calcium_source(double x, double y, double t) {
  const double r2 = x * x + y * y;
  return -std::exp(r2 / 4.0 + t) * r2 / 40.0;
}

ExactField er_field(double scale, double offset) {
  return {[=](double x, double y, double t) { return std::exp(x + y) * (std::sin(t) + 2.0) / scale + offset; },
          [=](double x, double y, double t) -> std::array<double, 2> {
            const double g = std::exp(x + y) * (std::sin(t) + 2.0) / scale;
            return {g, g};
          }};
}

SpaceTimeFunction er_source(double scale) {
  return [=](double x, double y, double t) {
    return std::exp(x + y) * (std::cos(t) - 2.0 * (std::sin(t) + 2.0)) / scale;
  };
}

}  // namespace

ManufacturedCase manufactured_example(int id) {
  ManufacturedCase c;
  c.id = id;
  c.u = radial_calcium();
  c.coupling.c1e = 1.0;  // RyR term P (ue - u)
  if (id == 1) {
    c.ue = er_field(8.0, 0.0);
    c.source_u = radial_calcium_source;
    c.source_ue = er_source(8.0);
    return c;
  }
  if (id == 2) {
    c.b = {[](double x, double y, double t) { return std::exp(x * y * t / 16.0); },
           [](double x, double y, double t) -> std::array<double, 2> {
             const double b = std::exp(x * y * t / 16.0);
             return {b * y * t / 16.0, b * x * t / 16.0};
           }};
    c.ue = er_field(16.0, 1.0);
    const ExactField u = c.u, b = c.b;
    // forcings include +b u so that the discrete reaction -B U cancels it
    c.source_u = [u, b](double x, double y, double t) {
      return radial_calcium_source(x, y, t) + b.value(x, y, t) * u.value(x, y, t);
    };
    c.source_b = [u, b](double x, double y, double t) {
      const double bv = b.value(x, y, t);
      return -bv * (-x * y + t * t * (x * x + y * y) / 16.0) / 16.0 + bv * u.value(x, y, t);
    };
    // d/dt - Laplacian of exp(x+y)(sin t + 2)/16 + 1
    c.source_ue = er_source(16.0);
    c.coupling.c2e = 1.0;  // SERCA-like u / ((1 + u) ue)
    c.coupling.ks = 1.0;
    c.coupling.kb_plus = 1.0;  // reaction -b u
    return c;
  }
  throw InputError("unknown manufactured example " + std::to_string(id) + " (expected 1 or 2)");
}

ManufacturedProblem::ManufacturedProblem(ManufacturedCase mcase, const Geometry& geometry, double dt)
    : case_(std::move(mcase)), dt_(dt) {
  if (!(dt > 0.0)) throw InputError("manufactured problem: dt must be positive");
  for (int node : geometry.interface.cytosol_nodes) ring_.push_back(geometry.cytosol.vertices[node]);
  reference_ = GatingField(ring_.size(), case_.gating0);
  reference_p_ = open_probability(reference_);
}

double ManufacturedProblem::plasma_flux(const PlasmaPoint& p) const {
  const auto g = case_.u.gradient(p.x, p.y, p.t + dt_);
  return p.nx * g[0] + p.ny * g[1];
}

InterfaceFlux ManufacturedProblem::interface_flux(const InterfacePoint& p) const {
  const std::size_t r1 = (p.ring_edge + 1) % ring_.size();
  const double p_ref = (1.0 - p.s) * reference_p_[p.ring_edge] + p.s * reference_p_[r1];
  const double t = p.t + dt_;
  const double u_ex = case_.u.value(p.x, p.y, t);
  const double ue_ex = case_.ue.value(p.x, p.y, t);
  const auto gu = case_.u.gradient(p.x, p.y, t);
  const auto gue = case_.ue.gradient(p.x, p.y, t);
  const double dn_u = -(p.nx * gu[0] + p.ny * gu[1]);  // cytosol normal is -n_er
  const double dn_ue = p.nx * gue[0] + p.ny * gue[1];

  const double g_discrete = flux_er(p.u, p.ue, p.open_prob, case_.coupling);
  const double g_exact = flux_er(u_ex, ue_ex, p_ref, case_.coupling);
  return {-g_discrete + (dn_u + g_exact), g_discrete + (dn_ue - g_exact)};
}

double ManufacturedProblem::calcium_source(const VolumePoint& p) const {
  return case_.source_u(p.x, p.y, p.t + dt_) + (case_.has_buffer() ? reaction(p.b, p.u, case_.coupling) : 0.0);
}

double ManufacturedProblem::buffer_source(const VolumePoint& p) const {
  return case_.source_b(p.x, p.y, p.t + dt_) + reaction(p.b, p.u, case_.coupling);
}

double ManufacturedProblem::er_source(const VolumePoint& p) const { return case_.source_ue(p.x, p.y, p.t + dt_); }

double ManufacturedProblem::buffer_boundary_flux(double x, double y, double t, double nx, double ny) const {
  const auto g = case_.b.gradient(x, y, t + dt_);
  return nx * g[0] + ny * g[1];
}

void ManufacturedProblem::advance(double t, double dt) {
  std::vector<double> trace(ring_.size());
  for (std::size_t k = 0; k < ring_.size(); ++k) trace[k] = case_.u.value(ring_[k].x, ring_[k].y, t);
  step_gating(reference_, trace, dt, case_.rates);
  open_probability(reference_, reference_p_);
}

std::vector<double> interpolate(const Mesh2D& mesh, const ExactField& f, double t) {
  std::vector<double> v(mesh.num_vertices());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f.value(mesh.vertices[i].x, mesh.vertices[i].y, t);
  return v;
}

FieldState exact_initial_state(const Discretization& disc, const ManufacturedCase& mcase) {
  const Geometry& g = *disc.geometry;
  FieldState s;
  s.u = interpolate(g.cytosol, mcase.u, 0.0);
  if (mcase.has_buffer()) s.b = interpolate(g.cytosol, mcase.b, 0.0);
  s.ue = interpolate(g.er, mcase.ue, 0.0);
  s.gating = GatingField(g.interface.size(), mcase.gating0);
  return s;
}

FieldError field_error(const Mesh2D& mesh, std::span<const double> nodal, const ExactField& f, double t) {
  const auto& rule = fem::midpoint_rule();
  double l2 = 0.0, h1 = 0.0;
  for (const auto& tri : mesh.triangles) {
    const Point2 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
    const double area = fem::signed_area(a, b, c);
    const double by[3] = {b.y - c.y, c.y - a.y, a.y - b.y};
    const double cx[3] = {c.x - b.x, a.x - c.x, b.x - a.x};
    double gx = 0.0, gy = 0.0;
    for (int i = 0; i < 3; ++i) {
      gx += nodal[tri[i]] * by[i] / (2.0 * area);
      gy += nodal[tri[i]] * cx[i] / (2.0 * area);
    }
    for (int q = 0; q < 3; ++q) {
      const auto& w = rule.points[q];
      const double x = w[0] * a.x + w[1] * b.x + w[2] * c.x;
      const double y = w[0] * a.y + w[1] * b.y + w[2] * c.y;
      const double uh = w[0] * nodal[tri[0]] + w[1] * nodal[tri[1]] + w[2] * nodal[tri[2]];
      const double e = f.value(x, y, t) - uh;
      const auto g = f.gradient(x, y, t);
      l2 += rule.weights[q] * area * e * e;
      h1 += rule.weights[q] * area * ((g[0] - gx) * (g[0] - gx) + (g[1] - gy) * (g[1] - gy));
    }
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

void ErrorAccumulator::add(const FieldState& state) {
  auto acc = [](FieldError& sum, FieldError e) {
    sum.l2 += e.l2;
    sum.h1_semi += e.h1_semi;
  };
  acc(sum_.u, field_error(geometry_.cytosol, state.u, case_.u, state.t));
  if (case_.has_buffer()) acc(sum_.b, field_error(geometry_.cytosol, state.b, case_.b, state.t));
  acc(sum_.ue, field_error(geometry_.er, state.ue, case_.ue, state.t));
  ++samples_;
}

ErrorNorms ErrorAccumulator::average() const {
  if (samples_ == 0) return {};
  const double n = static_cast<double>(samples_);
  auto avg = [n](FieldError e) { return FieldError{e.l2 / n, e.h1_semi / n}; };
  return {avg(sum_.u), avg(sum_.b), avg(sum_.ue)};
}

ErrorNorms error_norms(std::span<const FieldState> trajectory, const Geometry& geometry, const ManufacturedCase& mcase) {
  ErrorAccumulator acc(geometry, mcase);
  for (std::size_t i = 1; i < trajectory.size(); ++i) acc.add(trajectory[i]);
  return acc.average();
}

double time_step_constant(double final_time) { return 32.0 * final_time / (5.0 * std::numbers::pi * std::numbers::pi); }

long steps_for_level(double h, double final_time) {
  const double dt = time_step_constant(final_time) * h * h;
  return std::max(1L, std::lround(final_time / dt));
}

double observed_rate(double e_coarse, double e_fine, double h_coarse, double h_fine) {
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

std::vector<std::string> ConvergenceReport::fields() const {
  std::vector<std::string> out;
  for (const auto& r : rows)
    if (std::find(out.begin(), out.end(), r.field) == out.end()) out.push_back(r.field);
  return out;
}

std::vector<ConvergenceRow> ConvergenceReport::rows_for(const std::string& field) const {
  std::vector<ConvergenceRow> out;
  for (const auto& r : rows)
    if (r.field == field) out.push_back(r);
  return out;
}

LevelResult run_level(const ManufacturedCase& mcase, double h, const StepperOptions& options) {
  auto geometry = std::make_shared<const Geometry>(generate_geometry(mcase.r_inner, mcase.r_outer, h));
  const Discretization disc = discretize(geometry);
  const long steps = steps_for_level(h, mcase.final_time);
  const double dt = mcase.final_time / static_cast<double>(steps);
  ManufacturedProblem problem(mcase, *geometry, dt);
  const SteppingPlan plan = build_plan(disc, problem.diffusion(), dt, mcase.has_buffer(), options);

  FieldState state = exact_initial_state(disc, mcase);
  ErrorAccumulator acc(*geometry, mcase);
  for (long n = 0; n < steps; ++n) {
    step(state, plan, disc, problem);
    acc.add(state);
  }
  return {h, dt, steps, acc.average()};
}

std::vector<double> default_levels(int count) {
  std::vector<double> h;
  for (int i = 0; i < count; ++i) h.push_back(std::numbers::pi / (8.0 * std::pow(2.0, i)));
  return h;
}

ConvergenceReport convergence_study(int example, std::span<const double> levels, const StepperOptions& options) {
  if (levels.size() < 2) throw InputError("a convergence study needs at least two levels");
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (!(levels[i] < levels[i - 1])) throw InputError("levels must be strictly decreasing in h");
  const ManufacturedCase mcase = manufactured_example(example);

  ConvergenceReport report;
  report.example = example;
  for (double h : levels) report.levels.push_back(run_level(mcase, h, options));

  std::vector<std::pair<std::string, FieldError ErrorNorms::*>> fields{{"u", &ErrorNorms::u}};
  if (mcase.has_buffer()) fields.emplace_back("b", &ErrorNorms::b);
  fields.emplace_back("ue", &ErrorNorms::ue);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [name, member] : fields) {
    for (std::size_t i = 0; i < report.levels.size(); ++i) {
      const LevelResult& lv = report.levels[i];
      const FieldError e = lv.errors.*member;
      ConvergenceRow row{name, lv.h, lv.dt, e.l2, e.h1_semi, nan, nan};
      if (i > 0) {
        const LevelResult& prev = report.levels[i - 1];
        const FieldError ep = prev.errors.*member;
        row.rate_l2 = observed_rate(ep.l2, e.l2, prev.h, lv.h);
        row.rate_h1 = observed_rate(ep.h1_semi, e.h1_semi, prev.h, lv.h);
      }
      report.rows.push_back(row);
    }
  }
  return report;
}

void write_report_csv(const ConvergenceReport& report, std::ostream& out) {
  out << "field,h,dt,err_L2,err_H1semi,rate_L2,rate_H1\n";
  out << std::setprecision(17);
  for (const auto& r : report.rows) {
    out << r.field << ',' << r.h << ',' << r.dt << ',' << r.err_l2 << ',' << r.err_h1 << ',';
    if (std::isfinite(r.rate_l2)) out << r.rate_l2;
    out << ',';
    if (std::isfinite(r.rate_h1)) out << r.rate_h1;
    out << '\n';
  }
}

void print_report(const ConvergenceReport& report, std::ostream& out) {
  const auto flags = out.flags();
  out << "Example " << report.example << " convergence (P1, dt = C h^2)\n";
  out << std::left << std::setw(6) << "field" << std::right << std::setw(12) << "h" << std::setw(12) << "dt"
      << std::setw(14) << "err_L2" << std::setw(9) << "rate" << std::setw(14) << "err_H1semi" << std::setw(9) << "rate"
      << '\n';
  for (const auto& r : report.rows) {
    out << std::left << std::setw(6) << r.field << std::right << std::scientific << std::setprecision(4)
        << std::setw(12) << r.h << std::setw(12) << r.dt << std::setw(14) << r.err_l2;
    out << std::fixed << std::setprecision(3) << std::setw(9);
    if (std::isfinite(r.rate_l2))
      out << r.rate_l2;
    else
      out << "-";
    out << std::scientific << std::setprecision(4) << std::setw(14) << r.err_h1;
    out << std::fixed << std::setprecision(3) << std::setw(9);
    if (std::isfinite(r.rate_h1))
      out << r.rate_h1;
    else
      out << "-";
    out << '\n';
  }
  out.flags(flags);
}

}  // namespace cafem::verification
