#include "cafem/gating.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cafem/errors.hpp"

namespace cafem {

void RateConstants::validate() const {
  const double rates[] = {ka_plus, ka_minus, kb_plus, kb_minus, kc_plus, kc_minus};
  for (double r : rates)
    if (!(r > 0.0) || !std::isfinite(r)) throw InputError("gating rate constants must be positive and finite");
}

bool GatingState::in_simplex(double tol) const {
  return c1 >= -tol && o >= -tol && c2 >= -tol && c1 + o + c2 <= 1.0 + tol;
}

GatingSystem gating_matrix(double u, const RateConstants& k) {
  if (!(u >= 0.0)) throw InputError("gating_matrix: calcium trace must be non-negative");
  const double u3 = u * u * u;
  const double u4 = u3 * u;
  GatingSystem s;
  s.a = {{{-u4 * k.ka_plus - k.ka_minus, -k.ka_minus, -k.ka_minus},
          {-u3 * k.kb_plus, -u3 * k.kb_plus - k.kb_minus, -u3 * k.kb_plus},
          {-k.kc_plus, -k.kc_plus, -k.kc_plus - k.kc_minus}}};
  s.f = {k.ka_minus, u3 * k.kb_plus, k.kc_plus};
  return s;
}

GatingState step_gating(const GatingState& q0, double u_trace, double dt, const RateConstants& rates) {
  const GatingSystem sys = gating_matrix(std::max(u_trace, 0.0), rates);
  // M = I - dt A, rhs = q0 + dt f; Gaussian elimination without pivoting
  // (leading principal minors of M are positive for positive rates).
  double m[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = (i == j ? 1.0 : 0.0) - dt * sys.a[i][j];
  double r[3] = {q0.c1 + dt * sys.f[0], q0.o + dt * sys.f[1], q0.c2 + dt * sys.f[2]};

  for (int p = 0; p < 3; ++p) {
    if (m[p][p] == 0.0 || !std::isfinite(m[p][p])) throw Error("step_gating: singular backward-Euler system");
    for (int i = p + 1; i < 3; ++i) {
      const double l = m[i][p] / m[p][p];
      for (int j = p; j < 3; ++j) m[i][j] -= l * m[p][j];
      r[i] -= l * r[p];
    }
  }
  double q[3];
  for (int i = 2; i >= 0; --i) {
    double s = r[i];
    for (int j = i + 1; j < 3; ++j) s -= m[i][j] * q[j];
    q[i] = s / m[i][i];
  }

  GatingState out{q[0], q[1], q[2]};
  if (!std::isfinite(q[0]) || !std::isfinite(q[1]) || !std::isfinite(q[2]))
    throw Error("step_gating: non-finite channel state");
  if (!out.in_simplex(1e-10)) throw Error("step_gating: channel state left the simplex");
  out.c1 = std::max(out.c1, 0.0);
  out.o = std::max(out.o, 0.0);
  out.c2 = std::max(out.c2, 0.0);
  const double sum = out.c1 + out.o + out.c2;
  if (sum > 1.0) {
    out.c1 /= sum;
    out.o /= sum;
    out.c2 /= sum;
  }
  return out;
}

double open_probability(const GatingState& q) {
  const double p = 1.0 - q.c1 - q.c2;
  if (p < -1e-10 || p > 1.0 + 1e-10) throw Error("open probability " + std::to_string(p) + " outside [0, 1]");
  return std::clamp(p, 0.0, 1.0);
}

void step_gating(GatingField& field, std::span<const double> u_trace, double dt, const RateConstants& rates) {
  if (u_trace.size() != field.size()) throw InputError("step_gating: trace length does not match gating field");
  if (!(dt > 0.0)) throw InputError("step_gating: dt must be positive");
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (!std::isfinite(u_trace[i])) throw Error("step_gating: non-finite trace at interface node " + std::to_string(i));
    field.nodes[i] = step_gating(field.nodes[i], u_trace[i], dt, rates);
  }
}

void open_probability(const GatingField& field, std::span<double> out) {
  for (std::size_t i = 0; i < field.size(); ++i) out[i] = open_probability(field.nodes[i]);
}

std::vector<double> open_probability(const GatingField& field) {
  std::vector<double> p(field.size());
  open_probability(field, p);
  return p;
}

}  // namespace cafem
