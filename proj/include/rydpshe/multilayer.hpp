#pragma once

// Planar stacks with 2x2 characteristic matrices. Impedances p = n/cos(theta)
// for p-polarization and p = n cos(theta) for s-polarization; the reflection
// coefficient of a single interface is (p_i - p_j) / (p_i + p_j).

#include <vector>

#include <Eigen/Dense>

#include "rydpshe/constants.hpp"

namespace rydpshe::optics {

enum class Polarization { P, S };

struct Layer {
  cplx n{1.0, 0.0};
  double d = 0.0;  // um

  bool is_passive() const { return n.imag() >= 0.0; }
};

struct LayerStack {
  double n_in = 1.0;
  std::vector<Layer> layers;
  double n_out = 1.0;

  /// Glass / slab / glass.
  static LayerStack trilayer(double n1, cplx n2, double d2, double n3);
  void validate() const;
};

struct Coefficients {
  cplx r;
  cplx t;
};

struct FresnelPair {
  cplx rp, rs, tp, ts;
};

/// cos(theta_j) from Snell's law, branch with Im[n_j cos(theta_j)] >= 0.
cplx refraction_cosine(double n_in, double theta_i, cplx n_j);

cplx impedance(cplx n, cplx cos_theta, Polarization pol);

Eigen::Matrix2cd layer_matrix(const Layer& layer, double theta_i, double k0, double n_in,
                              Polarization pol);

Coefficients stack_fresnel(const LayerStack& stack, double theta_i, double k0, Polarization pol);

FresnelPair fresnel_pair(const LayerStack& stack, double theta_i, double k0);

/// |r|^2 + Re(p_out)/Re(p_in) |t|^2, equal to 1 for lossless stacks.
double energy_balance(const LayerStack& stack, double theta_i, Polarization pol,
                      const Coefficients& c);

struct BrewsterSearch {
  double lo = 0.0;    // rad; defaults to 20 deg
  double hi = 0.0;    // rad; defaults to 50 deg
  int coarse = 3001;  // scan points
  double tol = 1e-9;  // rad
};

/// Angle minimizing |r_p|. A coarse scan of |r_p / r_s| (which cancels the
/// Fabry-Perot factor shared by both polarizations) brackets the interface
/// minimum; golden-section search on |r_p| refines it.
double brewster_angle(const LayerStack& stack, double k0, BrewsterSearch search = {});

}  // namespace rydpshe::optics
