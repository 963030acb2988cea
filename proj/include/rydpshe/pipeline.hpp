#pragma once

// Susceptibility -> slab index -> Fresnel coefficients -> spin shifts.

#include "rydpshe/beam_shift.hpp"
#include "rydpshe/multilayer.hpp"
#include "rydpshe/quantum_response.hpp"

namespace rydpshe::pipeline {

struct Geometry {
  double n1 = 1.49;
  double d2 = 100.0;  // um
  double n3 = 1.49;

  void validate() const;
};

enum class ShiftMethod { Transform, Analytic };

struct Options {
  response::SusceptibilityOptions susceptibility{};
  ShiftMethod method = ShiftMethod::Transform;
  beam::MixingOptions mixing{};
};

struct PointResult {
  response::SusceptibilityBreakdown chi;
  cplx n2;
  optics::FresnelPair fresnel;
  beam::ShiftResult shift;
};

/// n2 = sqrt(1 + chi), principal branch.
cplx slab_index(cplx chi);

optics::LayerStack make_stack(const Geometry& g, cplx chi);

optics::FresnelPair fresnel_for_chi(const Geometry& g, cplx chi, double theta_i, double lambda_p);

beam::ShiftResult shifts_for_fresnel(const optics::FresnelPair& f, const beam::BeamSpec& beam,
                                     const Options& opts = {});

/// Full chain at one operating point. The beam wavelength is taken from the atom.
PointResult pshe_shifts(const Geometry& g, const beam::BeamSpec& beam,
                        const response::DriveParams& drive, const response::AtomParams& atom,
                        const Options& opts = {});

/// Same chain with a precomputed susceptibility (angle scans reuse it).
PointResult pshe_shifts(const Geometry& g, const beam::BeamSpec& beam,
                        const response::SusceptibilityBreakdown& chi, const Options& opts = {});

}  // namespace rydpshe::pipeline
