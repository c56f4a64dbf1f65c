#include "cafem/flux.hpp"

#include <cmath>

#include "cafem/errors.hpp"

namespace cafem {

void FluxParams::validate() const {
  const double coeffs[] = {c1e, c2e, c3e, c1c, c2c, c3c, c_out, kb_minus, kb_plus, b0};
  for (double c : coeffs)
    if (!(c >= 0.0) || !std::isfinite(c)) throw InputError("flux coefficients must be finite and non-negative");
  const double scales[] = {ks, kp, kn, m};
  for (double s : scales)
    if (!(s > 0.0) || !std::isfinite(s)) throw InputError("half-saturation constants and m must be positive");
}

void ClampSpec::validate() const {
  if (!(a > 0.0) || !(upper > 0.0)) throw InputError("clamp width and upper level must be positive");
}

double ClampSpec::apply(double x) const { return enabled ? phi_clamp(x, a, upper) : x; }

double phi_m(double x, double m) {
  if (x <= 0.0) return 0.5 * m;
  if (x >= m) return x;
  const double x2 = x * x, x3 = x2 * x;
  const double m2 = m * m, m5 = m2 * m2 * m, m6 = m5 * m;
  return m6 / (2.0 * m5 - 5.0 * m2 * x3 + 6.0 * m * x3 * x - 2.0 * x3 * x2);
}

double phi_clamp(double x, double a, double upper) {
  if (x <= -a) return -a;
  if (x < 0.0) {
    const double x3 = x * x * x;
    return 3.0 * x3 * x * x / (a * a * a * a) + 7.0 * x3 * x / (a * a * a) + 4.0 * x3 / (a * a) + x;
  }
  if (x <= upper) return x;
  if (x <= upper + a) {
    const double d = x - upper, d3 = d * d * d;
    return 3.0 * d3 * d * d / (a * a * a * a) - 7.0 * d3 * d / (a * a * a) + 4.0 * d3 / (a * a) + x;
  }
  return upper + a;
}

ErFlux er_flux(double u, double ue, double open_prob, const FluxParams& p, const ClampSpec& clamp) {
  const double uc = clamp.apply(u);
  ErFlux f;
  f.ryr = p.c1e * open_prob * (clamp.apply(ue) - uc);
  f.serca = p.c2e * uc / ((p.ks + uc) * phi_m(ue, p.m));
  f.leak = p.c3e * (ue - u);
  if (!std::isfinite(f.ryr) || !std::isfinite(f.serca) || !std::isfinite(f.leak))
    throw Error("non-finite ER membrane flux");
  return f;
}

double flux_er(double u, double ue, double open_prob, const FluxParams& p, const ClampSpec& clamp) {
  return er_flux(u, ue, open_prob, p, clamp).into_er();
}

void InfluxPulse::validate() const {
  if (shape == Shape::None) return;
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw InputError("influx amplitude must be non-negative");
  if (!(t_end > t_start)) throw InputError("influx window must have t_end > t_start");
}

double InfluxPulse::operator()(double x, double y, double t) const {
  if (shape == Shape::None || y - x < region_offset) return 0.0;
  if (shape == Shape::Rectangular) return (t >= t_start && t <= t_end) ? amplitude : 0.0;
  if (!(t > t_start && t < t_end)) return 0.0;
  const double w = 0.5 * (t_end - t_start), tc = 0.5 * (t_start + t_end);
  const double d = t - tc;
  return amplitude * std::exp(1.0 - w * w / (w * w - d * d));
}

double flux_plasma(double u, double t, double x, double y, const FluxParams& p, const InfluxPulse& influx,
                   const ClampSpec& clamp) {
  const double uc = clamp.apply(u);
  const double pmca = p.c1c * u * u / (p.kp * p.kp + u * u);
  const double ncx = p.c2c * uc / (p.kn + uc);
  const double leak = p.c3c * (p.c_out - u);
  const double g = leak - ncx - pmca + influx(x, y, t);
  if (!std::isfinite(g)) throw Error("non-finite plasma membrane flux");
  return g;
}

double reaction(double b, double u, const FluxParams& p) { return p.kb_minus * (p.b0 - b) - p.kb_plus * b * u; }

}  // namespace cafem
