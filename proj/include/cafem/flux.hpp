#pragma once

namespace cafem {

/// Coefficients of the membrane fluxes and of the buffer reaction.
///
/// ER membrane:      J_R = c1e P (ue - u), J_S = c2e u / ((ks + u) phi_m(ue)), J_le = c3e (ue - u)
/// Plasma membrane:  J_P = c1c u^2 / (kp^2 + u^2), J_N = c2c u / (kn + u), J_lp = c3c (c_out - u)
/// Reaction:         f(b, u) = kb_minus (b0 - b) - kb_plus b u
struct FluxParams {
  double c1e = 0.0, c2e = 0.0, c3e = 0.0;
  double c1c = 0.0, c2c = 0.0, c3c = 0.0;
  double ks = 1.0, kp = 1.0, kn = 1.0;
  double c_out = 0.0;
  double m = 1e-3;
  double kb_minus = 0.0, kb_plus = 0.0, b0 = 0.0;

  /// Coefficients must be finite and >= 0; ks, kp, kn and m must be > 0.
  void validate() const;
  friend bool operator==(const FluxParams&, const FluxParams&) = default;
};

/// Optional C1 clamp used to globalize the flux laws: identity on [0, M],
/// quintic blends of width a on either side, constant beyond.
struct ClampSpec {
  bool enabled = false;
  double a = 0.1;
  double upper = 1e4;

  void validate() const;
  double apply(double x) const;
  friend bool operator==(const ClampSpec&, const ClampSpec&) = default;
};

/// Regularized denominator floor: m/2 for x <= 0, x for x >= m, smooth in between.
double phi_m(double x, double m);

/// The clamp function itself (independent of the enabled flag).
double phi_clamp(double x, double a, double upper);

struct ErFlux {
  double ryr = 0.0;
  double serca = 0.0;
  double leak = 0.0;
  /// g_e = J_S - J_R - J_le, the flux into the ER (De dn ue). The cytosol receives -g_e.
  double into_er() const { return serca - ryr - leak; }
};

/// ER-membrane flux components. Throws Error if the result is non-finite.
ErFlux er_flux(double u, double ue, double open_prob, const FluxParams& p, const ClampSpec& clamp = {});
double flux_er(double u, double ue, double open_prob, const FluxParams& p, const ClampSpec& clamp = {});

/// Spatio-temporal calcium influx through part of the plasma membrane.
struct InfluxPulse {
  enum class Shape { None, Rectangular, SmoothBump };
  Shape shape = Shape::None;
  double amplitude = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  /// Active where y - x >= region_offset.
  double region_offset = 2.5;

  /// Rectangular: amplitude on t_start <= t <= t_end.
  /// SmoothBump: amplitude * exp(1 - w^2 / (w^2 - (t - tc)^2)) on t_start < t < t_end,
  /// with tc the window center and w its half width.
  double operator()(double x, double y, double t) const;
  void validate() const;
  friend bool operator==(const InfluxPulse&, const InfluxPulse&) = default;
};

/// g_c = J_lp - J_N - J_P + influx, the flux into the cytosol across the plasma membrane.
double flux_plasma(double u, double t, double x, double y, const FluxParams& p, const InfluxPulse& influx = {},
                   const ClampSpec& clamp = {});

/// Buffer reaction f(b, u); feeds both the calcium and the buffer equations.
double reaction(double b, double u, const FluxParams& p);

}  // namespace cafem
