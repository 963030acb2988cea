#include "rydpshe/pipeline.hpp"

#include <cmath>

#include "rydpshe/errors.hpp"

namespace rydpshe::pipeline {

void Geometry::validate() const {
  if (!(n1 > 0.0) || !(n3 > 0.0)) throw DomainError("window indices must be positive");
  if (!(d2 >= 0.0)) throw DomainError("slab thickness must be non-negative");
}

cplx slab_index(cplx chi) {
  if (!std::isfinite(chi.real()) || !std::isfinite(chi.imag())) {
    throw PropagationError("non-finite susceptibility reached the slab index");
  }
  return std::sqrt(1.0 + chi);
}

optics::LayerStack make_stack(const Geometry& g, cplx chi) {
  g.validate();
  return optics::LayerStack::trilayer(g.n1, slab_index(chi), g.d2, g.n3);
}

optics::FresnelPair fresnel_for_chi(const Geometry& g, cplx chi, double theta_i, double lambda_p) {
  return optics::fresnel_pair(make_stack(g, chi), theta_i, kTwoPi / lambda_p);
}

beam::ShiftResult shifts_for_fresnel(const optics::FresnelPair& f, const beam::BeamSpec& beam,
                                     const Options& opts) {
  if (opts.method == ShiftMethod::Analytic) {
    // scale the cross term through r_p + r_s
    const cplx rs = opts.mixing.cross_sign * (f.rp + f.rs) - f.rp;
    return beam::analytic_gaussian_shift(f.rp, rs, beam.theta_i, beam);
  }
  return beam::compute_shifts(beam, f.rp, f.rs, opts.mixing);
}

PointResult pshe_shifts(const Geometry& g, const beam::BeamSpec& beam,
                        const response::SusceptibilityBreakdown& chi, const Options& opts) {
  beam.validate();
  PointResult out;
  out.chi = chi;
  out.n2 = slab_index(chi.total);
  out.fresnel = fresnel_for_chi(g, chi.total, beam.theta_i, beam.lambda_p);
  out.shift = shifts_for_fresnel(out.fresnel, beam, opts);
  return out;
}

PointResult pshe_shifts(const Geometry& g, const beam::BeamSpec& beam,
                        const response::DriveParams& drive, const response::AtomParams& atom,
                        const Options& opts) {
  beam::BeamSpec b = beam;
  b.lambda_p = atom.lambda_p;
  return pshe_shifts(g, b, response::susceptibility(drive, atom, opts.susceptibility), opts);
}

}  // namespace rydpshe::pipeline
