#pragma once

#include <atomic>
#include <cstddef>

#include "cafem/flux.hpp"
#include "cafem/gating.hpp"

namespace cafem {

struct Diffusion {
  double cytosol = 1.0;
  double buffer = 1.0;
  double er = 1.0;
  friend bool operator==(const Diffusion&, const Diffusion&) = default;
};

/// Point on the plasma membrane; (nx, ny) is the outward unit normal of the cytosol.
struct PlasmaPoint {
  double x, y, t;
  double u;
  double nx, ny;
};

/// Point on the ER membrane. (nx, ny) is the outward unit normal of the ER
/// (pointing into the cytosol). ring_edge/s locate the point on the interface
/// ring: it lies between ring nodes ring_edge and ring_edge + 1 at parameter s.
struct InterfacePoint {
  double x, y, t;
  double u, ue, open_prob;
  double nx, ny;
  std::size_t ring_edge;
  double s;
};

/// Point inside the cytosol or the ER carrying interpolated nodal fields.
struct VolumePoint {
  double x, y, t;
  double u, b;
};

struct InterfaceFlux {
  double into_cytosol = 0.0;  // D_c dn u on the ER membrane
  double into_er = 0.0;       // D_e dn ue on the ER membrane
};

/// Data of one interface-coupled calcium problem as seen by the IMEX stepper.
/// All terms are evaluated explicitly at the start of a step.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual Diffusion diffusion() const = 0;
  virtual const RateConstants& rates() const = 0;
  /// When false the buffer field is neither solved nor coupled.
  virtual bool has_buffer() const = 0;

  virtual double plasma_flux(const PlasmaPoint& p) const = 0;
  virtual InterfaceFlux interface_flux(const InterfacePoint& p) const = 0;

  /// Volume sources; the stepper skips the quadrature when has_volume_sources() is false.
  virtual bool has_volume_sources() const { return true; }
  virtual double calcium_source(const VolumePoint& p) const = 0;
  virtual double buffer_source(const VolumePoint& p) const = 0;
  virtual bool has_er_source() const { return false; }
  virtual double er_source(const VolumePoint&) const { return 0.0; }

  /// Buffer flux Db dn b on either membrane; (nx, ny) is outward from the cytosol.
  virtual bool has_buffer_boundary_flux() const { return false; }
  virtual double buffer_boundary_flux(double /*x*/, double /*y*/, double /*t*/, double /*nx*/, double /*ny*/) const {
    return 0.0;
  }

  /// Called once the stepper has moved from t to t + dt.
  virtual void advance(double /*t*/, double /*dt*/) {}
};

/// The calcium model with membrane fluxes and buffer reaction.
class CellModel final : public Problem {
 public:
  CellModel(Diffusion diffusion, FluxParams flux, RateConstants rates, InfluxPulse influx = {}, ClampSpec clamp = {},
            bool buffer = true);

  Diffusion diffusion() const override { return diffusion_; }
  const RateConstants& rates() const override { return rates_; }
  bool has_buffer() const override { return buffer_; }

  double plasma_flux(const PlasmaPoint& p) const override;
  InterfaceFlux interface_flux(const InterfacePoint& p) const override;

  bool has_volume_sources() const override { return buffer_; }
  double calcium_source(const VolumePoint& p) const override;
  double buffer_source(const VolumePoint& p) const override;

  const FluxParams& flux_params() const { return flux_; }
  /// Interface evaluations that saw ue below the phi_m floor m.
  long low_er_evaluations() const { return low_er_.load(); }

 private:
  Diffusion diffusion_;
  FluxParams flux_;
  RateConstants rates_;
  InfluxPulse influx_;
  ClampSpec clamp_;
  bool buffer_;
  mutable std::atomic<long> low_er_{0};
};

}  // namespace cafem
