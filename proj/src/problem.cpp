#include "cafem/problem.hpp"

#include "cafem/errors.hpp"

namespace cafem {

CellModel::CellModel(Diffusion diffusion, FluxParams flux, RateConstants rates, InfluxPulse influx, ClampSpec clamp,
                     bool buffer)
    : diffusion_(diffusion), flux_(flux), rates_(rates), influx_(influx), clamp_(clamp), buffer_(buffer) {
  if (!(diffusion_.cytosol > 0.0) || !(diffusion_.er > 0.0) || (buffer_ && !(diffusion_.buffer > 0.0)))
    throw InputError("diffusion coefficients must be positive");
  flux_.validate();
  rates_.validate();
  influx_.validate();
  if (clamp_.enabled) clamp_.validate();
}

double CellModel::plasma_flux(const PlasmaPoint& p) const {
  return flux_plasma(p.u, p.t, p.x, p.y, flux_, influx_, clamp_);
}

InterfaceFlux CellModel::interface_flux(const InterfacePoint& p) const {
  if (p.ue < flux_.m) ++low_er_;
  const double g = flux_er(p.u, p.ue, p.open_prob, flux_, clamp_);
  return {-g, g};
}

double CellModel::calcium_source(const VolumePoint& p) const { return reaction(p.b, p.u, flux_); }

double CellModel::buffer_source(const VolumePoint& p) const { return reaction(p.b, p.u, flux_); }

}  // namespace cafem
