#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cafem/flux.hpp"
#include "cafem/gating.hpp"
#include "cafem/mesh.hpp"
#include "cafem/problem.hpp"
#include "cafem/stepper.hpp"

namespace cafem::verification {

/// Closed-form space-time field with its spatial gradient.
struct ExactField {
  std::function<double(double x, double y, double t)> value;
  std::function<std::array<double, 2>(double x, double y, double t)> gradient;
  explicit operator bool() const { return static_cast<bool>(value); }
};

using SpaceTimeFunction = std::function<double(double x, double y, double t)>;

/// Exact solution bundle of a manufactured problem. The interface coupling is
/// the ER-membrane flux law with `coupling` coefficients; the forcings are the
/// strong-form right-hand sides with the reaction -b u removed (it is applied
/// through the discrete fields, like the physical reaction).
struct ManufacturedCase {
  int id = 1;
  double r_inner = 1.0;
  double r_outer = 2.0;
  double final_time = 1.3;
  ExactField u, b, ue;
  SpaceTimeFunction source_u, source_b, source_ue;
  FluxParams coupling;
  RateConstants rates = RateConstants::keizer_levine();
  GatingState gating0{0.5, 0.0, 0.5};
  bool has_buffer() const { return static_cast<bool>(b); }
};

/// Examples 1 (u, ue) and 2 (u, b, ue). Throws InputError for other ids.
ManufacturedCase manufactured_example(int id);

/// Problem whose boundary data are built from the exact solution. The RyR
/// term of the exact data uses a reference gating field driven by the exact
/// cytosol trace with the same backward-Euler update as the solver.
/// The known space-time data (forcings, exact-solution boundary terms) of a
/// step from t_n are evaluated at t_n + dt, as backward Euler treats given
/// data; only the state-dependent coupling is lagged to t_n.
class ManufacturedProblem final : public Problem {
 public:
  ManufacturedProblem(ManufacturedCase mcase, const Geometry& geometry, double dt);

  Diffusion diffusion() const override { return {1.0, 1.0, 1.0}; }
  const RateConstants& rates() const override { return case_.rates; }
  bool has_buffer() const override { return case_.has_buffer(); }

  double plasma_flux(const PlasmaPoint& p) const override;
  InterfaceFlux interface_flux(const InterfacePoint& p) const override;
  double calcium_source(const VolumePoint& p) const override;
  double buffer_source(const VolumePoint& p) const override;
  bool has_er_source() const override { return true; }
  double er_source(const VolumePoint& p) const override;
  bool has_buffer_boundary_flux() const override { return case_.has_buffer(); }
  double buffer_boundary_flux(double x, double y, double t, double nx, double ny) const override;
  void advance(double t, double dt) override;

  const GatingField& reference_gating() const { return reference_; }
  const ManufacturedCase& manufactured_case() const { return case_; }

 private:
  ManufacturedCase case_;
  double dt_;
  std::vector<Point2> ring_;
  GatingField reference_;
  std::vector<double> reference_p_;
};

/// Nodal interpolant of an exact field on a mesh.
std::vector<double> interpolate(const Mesh2D& mesh, const ExactField& f, double t);

/// Initial state: nodal interpolants at t = 0 and the case's gating state.
FieldState exact_initial_state(const Discretization& disc, const ManufacturedCase& mcase);

struct FieldError {
  double l2 = 0.0;
  double h1_semi = 0.0;
};

/// ||f(t) - U|| in L2 and the H1 seminorm over the mesh, with the exact field
/// evaluated at the midpoint-rule points.
FieldError field_error(const Mesh2D& mesh, std::span<const double> nodal, const ExactField& f, double t);

/// Time-averaged errors (1/N) sum_{i=1..N} ||e(t_i)|| per field.
struct ErrorNorms {
  FieldError u, b, ue;
};

class ErrorAccumulator {
 public:
  ErrorAccumulator(const Geometry& geometry, const ManufacturedCase& mcase) : geometry_(geometry), case_(mcase) {}
  void add(const FieldState& state);
  ErrorNorms average() const;
  long samples() const { return samples_; }

 private:
  const Geometry& geometry_;
  const ManufacturedCase& case_;
  ErrorNorms sum_;
  long samples_ = 0;
};

/// Averaged errors over states at t_1..t_N (the initial state is not included).
ErrorNorms error_norms(std::span<const FieldState> trajectory, const Geometry& geometry, const ManufacturedCase& mcase);

/// Coupling constant of dt = C h^2.
double time_step_constant(double final_time);

/// Steps N = round(T / (C h^2)); the time step is then T / N.
long steps_for_level(double h, double final_time);

/// Observed order between two levels: log(e_coarse / e_fine) / log(h_coarse / h_fine).
double observed_rate(double e_coarse, double e_fine, double h_coarse = 2.0, double h_fine = 1.0);

struct LevelResult {
  double h = 0.0;
  double dt = 0.0;
  long steps = 0;
  ErrorNorms errors;
};

struct ConvergenceRow {
  std::string field;
  double h = 0.0, dt = 0.0;
  double err_l2 = 0.0, err_h1 = 0.0;
  double rate_l2 = 0.0, rate_h1 = 0.0;  // NaN on the coarsest level
};

struct ConvergenceReport {
  int example = 1;
  std::vector<LevelResult> levels;
  std::vector<ConvergenceRow> rows;  // grouped by field, coarse to fine
  std::vector<std::string> fields() const;
  std::vector<ConvergenceRow> rows_for(const std::string& field) const;
};

/// Solves one level with the IMEX stepper and returns its averaged errors.
LevelResult run_level(const ManufacturedCase& mcase, double h, const StepperOptions& options = {});

/// Runs every level (h strictly decreasing, at least two) and fits rates.
ConvergenceReport convergence_study(int example, std::span<const double> levels, const StepperOptions& options = {});

/// h = pi/8, pi/16, ... (count levels).
std::vector<double> default_levels(int count);

/// CSV: field,h,dt,err_L2,err_H1semi,rate_L2,rate_H1 (empty rate cells on the coarsest level).
void write_report_csv(const ConvergenceReport& report, std::ostream& out);
/// Aligned human-readable table.
void print_report(const ConvergenceReport& report, std::ostream& out);

}  // namespace cafem::verification
