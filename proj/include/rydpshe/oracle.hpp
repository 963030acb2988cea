#pragma once

// Brute-force references used to certify the perturbative and transfer-matrix
// code paths. Nothing here calls the code it checks, except quadrature_refine
// which compares the production quadrature against a dense trapezoid rule.

#include <vector>

#include <Eigen/Dense>

#include "rydpshe/constants.hpp"
#include "rydpshe/quantum_response.hpp"

namespace rydpshe::oracle {

struct DensityMatrix3 {
  Eigen::Matrix3cd rho = Eigen::Matrix3cd::Zero();

  cplx operator()(int a, int b) const { return rho(a - 1, b - 1); }  // 1-based levels

  double hermiticity_error() const;
  double trace_error() const;
  double min_eigenvalue() const;
  /// Hermitian to 1e-12, unit trace to 1e-12, eigenvalues >= -1e-10.
  bool is_physical() const;
};

/// Exact local (C6 = 0) steady state of the three-level ladder, all orders in
/// Omega_p. Solves the 8 real unknowns (rho22, rho33, Re/Im of rho21, rho31,
/// rho32) with rho11 = 1 - rho22 - rho33.
DensityMatrix3 full_local_bloch_steady_state(const response::DriveParams& drive,
                                             const response::AtomParams& atom);

struct QuadratureReport {
  std::vector<int> node_counts;
  std::vector<cplx> values;
  std::vector<double> successive_rel_diff;  // size node_counts - 1
  cplx trapezoid_reference;                 // 1e4 panels in s
  double default_vs_trapezoid = 0.0;        // last node count vs trapezoid
  double upper_extension_rel_change = 0.0;  // |I(5Rb) - I(3Rb)| / |I(3Rb)|
  double kernel_extension_numeric = 0.0;    // pure s^2 V(s) kernel, 3Rb -> 5Rb
  double kernel_extension_analytic = 0.0;   // (3^-3 - 5^-3) / (1 - 3^-3)
};

QuadratureReport quadrature_refine(const response::DriveParams& drive,
                                   const response::AtomParams& atom,
                                   const std::vector<int>& node_counts, int trapezoid_panels = 10000);

/// Two-interface Airy sum r = (r12 + r23 e^{2i delta}) / (1 + r12 r23 e^{2i delta})
/// for a single slab between two semi-infinite media, written independently of
/// the transfer-matrix code. `p_polarized` selects n/cos or n*cos impedances.
cplx airy_trilayer_reflection(double n1, cplx n2, double d2, double n3, double theta_i, double k0,
                              bool p_polarized);

}  // namespace rydpshe::oracle
