#pragma once

#include <array>
#include <span>
#include <vector>

namespace cafem {

/// Rate constants of the three-state RyR channel ODE.
struct RateConstants {
  double ka_plus = 1500.0;
  double ka_minus = 28.8;
  double kb_plus = 1500.0;
  double kb_minus = 385.9;
  double kc_plus = 1.75;
  double kc_minus = 0.1;

  /// Keizer-Levine values used by every built-in example.
  static RateConstants keizer_levine() { return {}; }
  /// Throws InputError unless all rates are strictly positive.
  void validate() const;
  friend bool operator==(const RateConstants&, const RateConstants&) = default;
};

/// Channel-state fractions (c1, o, c2) of one interface node.
struct GatingState {
  double c1 = 1.0;
  double o = 0.0;
  double c2 = 0.0;

  /// True for a point of the simplex c1, o, c2 >= 0, c1 + o + c2 <= 1.
  bool in_simplex(double tol = 0.0) const;
  friend bool operator==(const GatingState&, const GatingState&) = default;
};

/// Right-hand side q' = A(u) q + f(u) of the channel ODE.
struct GatingSystem {
  std::array<std::array<double, 3>, 3> a{};
  std::array<double, 3> f{};
};

/// Coefficient matrix and source at cytosolic calcium u >= 0. Throws InputError for u < 0.
GatingSystem gating_matrix(double u, const RateConstants& rates);

/// One backward-Euler step with frozen trace: (I - dt A(u+)) q1 = q0 + dt f(u+),
/// u+ = max(u, 0). The result is clamped back onto the simplex. Throws Error
/// on a singular system or when the unclamped result leaves the simplex by
/// more than roundoff.
GatingState step_gating(const GatingState& q0, double u_trace, double dt, const RateConstants& rates);

/// P = 1 - c1 - c2, clamped to [0, 1]. Throws Error if the clamp exceeds 1e-10.
double open_probability(const GatingState& q);

/// Gating state of every interface node, in interface-ring order.
struct GatingField {
  std::vector<GatingState> nodes;

  GatingField() = default;
  GatingField(std::size_t n, GatingState initial) : nodes(n, initial) {}
  std::size_t size() const { return nodes.size(); }
  friend bool operator==(const GatingField&, const GatingField&) = default;
};

/// Advances every node with its own trace value; u_trace has one entry per node.
void step_gating(GatingField& field, std::span<const double> u_trace, double dt, const RateConstants& rates);

std::vector<double> open_probability(const GatingField& field);
void open_probability(const GatingField& field, std::span<double> out);

}  // namespace cafem
