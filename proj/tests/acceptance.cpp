// Acceptance run: one PASS/FAIL line per criterion. Exits non-zero when any
// criterion fails so that ctest reports it.

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cafem/fem.hpp"
#include "cafem/flux.hpp"
#include "cafem/gating.hpp"
#include "cafem/scenario.hpp"
#include "cafem/sparse.hpp"
#include "cafem/stepper.hpp"
#include "cafem/verification.hpp"

using namespace cafem;

namespace {

constexpr double kPi = std::numbers::pi;

int failures = 0;

void report(int id, bool ok, const std::string& title, const std::string& detail) {
  std::printf("%s criterion %d: %s -- %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

bool in(double v, double lo, double hi) { return v >= lo && v <= hi; }

// Rates of every field of a convergence study against the windows
// L2 in [1.85, 2.15], H1-semi in [0.85, 1.15].
void check_convergence(int id, int example) {
  const auto study = verification::convergence_study(example, verification::default_levels(4));
  bool ok = true;
  std::ostringstream d;
  for (const auto& field : study.fields()) {
    d << field << " L2";
    for (const auto& row : study.rows_for(field)) {
      if (!std::isfinite(row.rate_l2)) continue;
      const bool good = in(row.rate_l2, 1.85, 2.15);
      ok = ok && good;
      d << ' ' << fmt("%.3f", row.rate_l2) << (good ? "" : "!");
    }
    d << " H1";
    for (const auto& row : study.rows_for(field)) {
      if (!std::isfinite(row.rate_h1)) continue;
      const bool good = in(row.rate_h1, 0.85, 1.15);
      ok = ok && good;
      d << ' ' << fmt("%.3f", row.rate_h1) << (good ? "" : "!");
    }
    d << "; ";
  }
  d << "levels pi/8..pi/64, '!' marks a rate outside its window";
  report(id, ok, "convergence rates, Example " + std::to_string(example), d.str());
}

struct WaveMetrics {
  bool completed = false;
  std::string instability;
  double u_max = 0.0, t_u_max = 0.0;
  double mean_max = 0.0, t_mean_max = 0.0;
  double ue_min = 1e300;
  double p_max = 0.0;
  double u_min = 1e300;
  double solve_seconds = 0.0, step_seconds = 0.0;
  long combos_setup = 0, combos_after = 0, precond_setup = 0, precond_after = 0, solves = 0, steps = 0;
};

WaveMetrics run_wave(double dt) {
  ScenarioConfig c = builtin_scenario("ex3");
  c.dt = dt;
  c.snapshot_times.clear();
  linalg_counters().reset();
  ScenarioSetup setup = prepare(c);
  WaveMetrics m;
  m.combos_setup = linalg_counters().matrix_combinations.load();
  m.precond_setup = linalg_counters().preconditioner_setups.load();
  RunObserver obs;
  obs.on_row = [&](const TimeSeriesRow& r) {
    if (r.u_max > m.u_max) m.u_max = r.u_max, m.t_u_max = r.t;
    if (r.u_mean > m.mean_max) m.mean_max = r.u_mean, m.t_mean_max = r.t;
    m.ue_min = std::min(m.ue_min, r.ue_min);
    m.u_min = std::min(m.u_min, r.u_min);
    m.p_max = std::max(m.p_max, r.p_max);
  };
  const RunResult r = run_scenario(setup, obs);
  m.completed = r.completed();
  if (r.instability)
    m.instability = "step " + std::to_string(r.instability->step) + ", t = " + fmt("%.4f", r.instability->t);
  m.solve_seconds = r.solve_seconds;
  m.step_seconds = r.step_seconds;
  m.combos_after = linalg_counters().matrix_combinations.load();
  m.precond_after = linalg_counters().preconditioner_setups.load();
  m.solves = linalg_counters().solves.load();
  m.steps = r.steps_taken;
  return m;
}

void check_wave(const WaveMetrics& m) {
  const bool peak = m.u_max > 1.5, timing = in(m.t_u_max, 2.6, 3.6), er = in(m.ue_min, 174.0, 178.0),
             open = in(m.p_max, 0.75, 0.87);
  std::ostringstream d;
  d << "max u " << fmt("%.4f", m.u_max) << (peak ? "" : "!") << " at t = " << fmt("%.4f", m.t_u_max)
    << (timing ? "" : "!") << " s (window [2.6, 3.6]); min ue " << fmt("%.3f", m.ue_min) << (er ? "" : "!")
    << "; max P " << fmt("%.4f", m.p_max) << (open ? "" : "!") << "; cell-mean u peaks at t = "
    << fmt("%.4f", m.t_mean_max) << " s";
  report(3, m.completed && peak && timing && er && open, "calcium wave, Example 3 (h = pi/48, dt = 0.00375)",
         d.str());
}

void check_stability(const WaveMetrics& stable, const WaveMetrics& doubled) {
  std::ostringstream d;
  d << "dt = 0.00375: " << (stable.completed ? "completed to T = 12" : "unstable at " + stable.instability)
    << "; dt = 0.0075: "
    << (doubled.completed ? "completed to T = 12 (min u " + fmt("%.4g", doubled.u_min) + ", max u " +
                                fmt("%.4g", doubled.u_max) + ", max P " + fmt("%.4f", doubled.p_max) + ")"
                          : "detector fired at " + doubled.instability);
  report(4, stable.completed && !doubled.completed, "stability boundary, Example 3", d.str());
}

void check_example4() {
  ScenarioConfig c = builtin_scenario("ex4");
  c.h = kPi / 16;
  c.final_time = 5.0;
  c.snapshot_times.clear();
  ScenarioSetup setup = prepare(c);
  double u_min = 1e300, ue_min = 1e300, b_min = 1e300, p_max = 0.0;
  bool finite = true;
  RunObserver obs;
  obs.on_row = [&](const TimeSeriesRow& r) {
    for (double v : {r.u_min, r.u_max, r.b_min, r.b_max, r.ue_min, r.ue_max}) finite = finite && std::isfinite(v);
    u_min = std::min(u_min, r.u_min);
    ue_min = std::min(ue_min, r.ue_min);
    b_min = std::min(b_min, r.b_min);
    p_max = std::max(p_max, r.p_max);
  };
  const RunResult r = run_scenario(setup, obs);
  const bool ok = r.completed() && finite && u_min > 0.0 && ue_min > 0.0 && b_min > 0.0 && p_max > 0.9;
  std::ostringstream d;
  d << (r.completed() ? "completed" : "unstable") << "; min u " << fmt("%.4g", u_min) << ", min b "
    << fmt("%.4g", b_min) << ", min ue " << fmt("%.4g", ue_min) << "; max P " << fmt("%.4f", p_max);
  report(5, ok, "Example 4 smoke run (h = pi/16, T = 5)", d.str());
}

// ---- property suite -------------------------------------------------------

using State3 = std::array<double, 3>;

struct ChannelOde {
  double u;
  RateConstants r;
  void operator()(const State3& q, State3& dq, double) const {
    const double u3 = u * u * u, u4 = u3 * u;
    dq[0] = (-u4 * r.ka_plus - r.ka_minus) * q[0] - r.ka_minus * q[1] - r.ka_minus * q[2] + r.ka_minus;
    dq[1] = -u3 * r.kb_plus * q[0] + (-u3 * r.kb_plus - r.kb_minus) * q[1] - u3 * r.kb_plus * q[2] + u3 * r.kb_plus;
    dq[2] = -r.kc_plus * q[0] - r.kc_plus * q[1] + (-r.kc_plus - r.kc_minus) * q[2] + r.kc_plus;
  }
};

std::string prop_gating_simplex() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const RateConstants r = RateConstants::keizer_levine();
  for (int k = 0; k < 100000; ++k) {
    std::array<double, 3> s{unit(rng), unit(rng), unit(rng)};
    std::sort(s.begin(), s.end());
    const GatingState q = step_gating({s[0], s[1] - s[0], s[2] - s[1]}, 5.0 * unit(rng),
                                      std::pow(10.0, -5.0 + 3.0 * unit(rng)), r);
    if (!q.in_simplex()) return "step " + std::to_string(k) + " left the simplex";
  }
  return {};
}

std::string prop_gating_order(std::string& info) {
  namespace odeint = boost::numeric::odeint;
  State3 ref{0.5, 0.0, 0.5};
  odeint::integrate_adaptive(odeint::make_controlled(1e-12, 1e-12, odeint::runge_kutta_dopri5<State3>()),
                             ChannelOde{0.2, RateConstants::keizer_levine()}, ref, 0.0, 1.0, 1e-6);
  std::vector<double> err;
  for (int n : {100, 200, 400}) {
    GatingState q{0.5, 0.0, 0.5};
    for (int k = 0; k < n; ++k) q = step_gating(q, 0.2, 1.0 / n, RateConstants::keizer_levine());
    err.push_back(std::max({std::abs(q.c1 - ref[0]), std::abs(q.o - ref[1]), std::abs(q.c2 - ref[2])}));
  }
  const double r1 = std::log2(err[0] / err[1]), r2 = std::log2(err[1] / err[2]);
  info = "gating order " + fmt("%.3f", r1) + "/" + fmt("%.3f", r2);
  if (!in(r1, 0.9, 1.1) || !in(r2, 0.9, 1.1)) return info;
  return {};
}

std::string prop_flux_signs() {
  const ScenarioConfig configs[] = {builtin_scenario("ex3"), builtin_scenario("ex4")};
  for (const auto& c : configs) {
    const FluxParams& p = c.flux;
    for (int i = 0; i <= 200; ++i)
      for (int j = 0; j <= 200; ++j) {
        const double u = 1000.0 * i / 200, ue = 1000.0 * j / 200;
        for (double P : {0.0, 1.0}) {
          if (flux_er(0.0, ue, P, p) > 0.0) return c.name + ": g_e(0, ue) > 0";
          if (flux_er(u, 0.0, P, p) < 0.0) return c.name + ": g_e(u, 0) < 0";
          const double g = flux_er(u, ue, P, p);
          if (g > (p.c1e + p.c3e) * u + 2.0 * p.c2e / p.m || g < -(p.c1e + p.c3e) * ue - 1e-12)
            return c.name + ": g_e outside its linear bounds";
        }
        if (flux_plasma(u, 0.0, 0.0, 0.0, p) > p.c3c * p.c_out) return c.name + ": g_c above its bound";
      }
    if (flux_plasma(0.0, 0.0, 0.0, 0.0, p) < 0.0) return c.name + ": g_c(0) < 0";
    if (flux_plasma(p.c_out, 0.0, 0.0, 0.0, p) > 0.0) return c.name + ": g_c(c_out) > 0";
  }
  return {};
}

std::string prop_mass_conservation() {
  auto geo = std::make_shared<const Geometry>(generate_geometry(1.0, 2.0, kPi / 16));
  const Discretization disc = discretize(geo);
  CellModel model({220.0, 20.0, 220.0}, FluxParams{}, RateConstants::keizer_levine(), {}, {}, true);
  const SteppingPlan plan = build_plan(disc, model.diffusion(), 1e-3, true);
  FieldState s = uniform_state(disc, 0.0, 0.0, 0.0, {1.0, 0.0, 0.0}, true);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> val(0.5, 2.0);
  for (auto* f : {&s.u, &s.b, &s.ue})
    for (auto& v : *f) v = val(rng);
  auto total = [](const SparseMatrixSym& m, const std::vector<double>& f) {
    return dot(m * std::vector<double>(f.size(), 1.0), f);
  };
  for (int k = 0; k < 10; ++k) {
    const double mu = total(disc.cytosol.mass, s.u), mb = total(disc.cytosol.mass, s.b), me = total(disc.er.mass, s.ue);
    step(s, plan, disc, model);
    if (std::abs(total(disc.cytosol.mass, s.u) - mu) > 1e-10 * mu ||
        std::abs(total(disc.cytosol.mass, s.b) - mb) > 1e-10 * mb ||
        std::abs(total(disc.er.mass, s.ue) - me) > 1e-10 * me)
      return "mass drift at step " + std::to_string(k + 1);
  }
  return {};
}

std::string prop_element_matrices() {
  const auto m = fem::element_mass({0, 0}, {1, 0}, {0, 1});
  const auto k = fem::element_stiffness({0, 0}, {1, 0}, {0, 1});
  const double kref[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (std::abs(m[i][j] - (i == j ? 2.0 : 1.0) / 24.0) > 1e-12) return "mass entry differs";
      if (std::abs(k[i][j] - kref[i][j]) > 1e-12) return "stiffness entry differs";
    }
  return {};
}

std::string prop_cg_vs_dense() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> val(-1.0, 1.0), coin(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 50;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j)
        if (coin(rng) < 0.3) a(i, j) = a(j, i) = val(rng);
    for (int i = 0; i < n; ++i) a(i, i) = a.row(i).cwiseAbs().sum() + 0.5 + coin(rng);
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (a(i, j) != 0.0) t.push_back({i, j, a(i, j)});
    auto sparse = std::make_shared<const SparseMatrixSym>(SparseMatrixSym::from_triplets(n, t));
    std::vector<double> b(n);
    for (auto& v : b) v = val(rng);
    const auto x = PcgSolver(sparse).solve(b);
    const Eigen::VectorXd ref = a.llt().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), n));
    double err = 0.0;
    for (int i = 0; i < n; ++i) err = std::max(err, std::abs(x[i] - ref(i)));
    if (err > 1e-8 * ref.cwiseAbs().maxCoeff()) return "trial " + std::to_string(trial) + " differs";
  }
  return {};
}

std::string prop_manufactured_residuals() {
  const double e = 1e-3;
  auto d1 = [&](const std::function<double(double)>& f, double s) {
    return (-f(s + 2 * e) + 8 * f(s + e) - 8 * f(s - e) + f(s - 2 * e)) / (12 * e);
  };
  auto d2 = [&](const std::function<double(double)>& f, double s) {
    return (-f(s + 2 * e) + 16 * f(s + e) - 30 * f(s) + 16 * f(s - e) - f(s - 2 * e)) / (12 * e * e);
  };
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int id : {1, 2}) {
    const auto c = verification::manufactured_example(id);
    auto residual = [&](const verification::ExactField& f, const verification::SpaceTimeFunction& src, double x,
                        double y, double t, bool reaction) {
      const double lap = d2([&](double s) { return f.value(s, y, t); }, x) +
                         d2([&](double s) { return f.value(x, s, t); }, y);
      const double react = reaction ? -c.b.value(x, y, t) * c.u.value(x, y, t) : 0.0;
      return d1([&](double s) { return f.value(x, y, s); }, t) - lap - src(x, y, t) - react;
    };
    for (int k = 0; k < 20; ++k) {
      const double a = 2 * kPi * unit(rng), t = 0.01 + 1.28 * unit(rng);
      const double rc = std::sqrt(1.0 + 3.0 * unit(rng)), re = std::sqrt(unit(rng));
      const double xc = rc * std::cos(a), yc = rc * std::sin(a), xe = re * std::cos(a), ye = re * std::sin(a);
      double worst = std::abs(residual(c.u, c.source_u, xc, yc, t, c.has_buffer()));
      if (c.has_buffer()) worst = std::max(worst, std::abs(residual(c.b, c.source_b, xc, yc, t, true)));
      worst = std::max(worst, std::abs(residual(c.ue, c.source_ue, xe, ye, t, false)));
      if (worst > 1e-8) return "Example " + std::to_string(id) + " residual " + fmt("%.3g", worst);
    }
  }
  return {};
}

void check_properties() {
  std::string order_info;
  const std::vector<std::pair<std::string, std::string>> results{
      {"gating simplex (1e5 steps)", prop_gating_simplex()},
      {"gating order vs RK", prop_gating_order(order_info)},
      {"flux signs (200x200)", prop_flux_signs()},
      {"zero-flux mass conservation", prop_mass_conservation()},
      {"element matrices", prop_element_matrices()},
      {"CG vs dense", prop_cg_vs_dense()},
      {"manufactured residuals", prop_manufactured_residuals()},
  };
  bool ok = true;
  std::ostringstream d;
  for (const auto& [name, problem] : results) {
    ok = ok && problem.empty();
    d << name << (problem.empty() ? " ok" : ": " + problem) << "; ";
  }
  d << order_info;
  report(6, ok, "property suite", d.str());
}

void check_efficiency(const WaveMetrics& m) {
  // Example 3 has no buffer: two system matrices, two solves per step.
  const bool once = m.combos_setup == 2 && m.precond_setup == 2 && m.combos_after == m.combos_setup &&
                    m.precond_after == m.precond_setup && m.solves == 2 * m.steps;
  const double ratio = m.step_seconds / m.solve_seconds;
  std::ostringstream d;
  d << "system matrices built " << m.combos_after << ", preconditioned " << m.precond_after << " times for "
    << m.steps << " steps (" << m.solves << " solves); step time " << fmt("%.3f", m.step_seconds) << " s vs solve time "
    << fmt("%.3f", m.solve_seconds) << " s, ratio " << fmt("%.3f", ratio);
  report(7, once && ratio < 2.0, "efficiency contract, Example 3 at h = pi/48", d.str());
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  check_convergence(1, 1);
  check_convergence(2, 2);
  const WaveMetrics stable = run_wave(0.00375);
  check_wave(stable);
  check_stability(stable, run_wave(0.0075));
  check_example4();
  check_properties();
  check_efficiency(stable);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d of 7 criteria failed (%.1f s)\n", failures, seconds);
  return failures == 0 ? 0 : 1;
}
