#pragma once

// Probe susceptibility of a ladder-EIT Rydberg gas from the steady-state
// perturbative correlator hierarchy (expansion in powers of Omega_p).
//
// Units: angular frequencies in rad/us, lengths in um, C6 in rad/us * um^6,
// densities in um^-3. Omega_p and Omega_c are real and non-negative.
//
// Coherence equations follow the convention -i d/dt rho_ab = d_ab rho_ab + ...,
// with d_ab = Delta_a - Delta_b + i gamma_ab and Delta_1 = 0. The first-order
// solution is rho21 = -d31 / (d21 d31 - Omega_c^2).

#include <array>
#include <string>

#include <json.hpp>

#include "rydpshe/constants.hpp"

namespace rydpshe::response {

struct AtomParams {
  double Gamma21 = 0.0;  // population decay |2> -> |1>
  double Gamma32 = 0.0;  // population decay |3> -> |2>
  double gamma21 = 0.0;  // coherence decay rates
  double gamma32 = 0.0;
  double gamma31 = 0.0;
  double C6 = 0.0;        // sign included
  double Na = 0.0;        // um^-3
  double lambda_p = 0.0;  // um

  /// Coherence rates from population decay: gamma21 = Gamma21/2,
  /// gamma31 = Gamma32/2, and gamma32 = (Gamma21 + Gamma32)/2 since both
  /// |2> and |3> decay. Override the fields afterwards for other models.
  static AtomParams from_decay_rates(double Gamma21, double Gamma32, double C6, double Na,
                                     double lambda_p);

  /// 87Rb, 60S Rydberg level, Na = 4e7 mm^-3, 780 nm probe.
  static AtomParams rubidium_defaults();

  void validate() const;

  /// |p21| in C*m from the spontaneous emission rate.
  double dipole_moment() const;

  /// K = Na |p21|^2 / (eps0 hbar), in rad/us.
  double chi_prefactor() const;
};

struct DriveParams {
  double Omega_p = 0.0;
  double Omega_c = 0.0;
  double Delta2 = 0.0;   // probe detuning
  double Delta_c = 0.0;  // coupling detuning

  double Delta3() const { return Delta2 + Delta_c; }

  static DriveParams defaults();
  void validate() const;
};

struct ComplexDenominators {
  cplx d21, d31, d32, d13, d12, d23;

  static ComplexDenominators from(const DriveParams& drive, const AtomParams& atom);
};

struct FirstOrder {
  cplx rho21;
  cplx rho31;
};

struct SecondOrderOneBody {
  cplx rho11, rho22, rho33, rho32;
  double residual = 0.0;

  cplx rho23() const { return std::conj(rho32); }
};

// Second-order two-body correlators rho rho_{ab,mn}. The first group does not
// depend on the pair separation; the second carries V(r) = C6/r^6.
struct SecondOrderTwoBody {
  // Order: 13,31; 12,31; 12,21; 13,21; 31,31; 21,31; 21,21; 31,21.
  std::array<cplx, 8> values{};
  double residual = 0.0;

  cplx rr13_31() const { return values[0]; }
  cplx rr12_31() const { return values[1]; }
  cplx rr12_21() const { return values[2]; }
  cplx rr13_21() const { return values[3]; }
  cplx rr31_31() const { return values[4]; }
  cplx rr21_31() const { return values[5]; }
  cplx rr21_21() const { return values[6]; }
  cplx rr31_21() const { return values[7]; }
};

// Third-order two-body correlators x = Q^-1 q.
struct ThirdOrderTwoBody {
  // Order: 33,31; 23,31; 32,31; 33,21; 22,31; 23,21; 32,21; 22,21.
  std::array<cplx, 8> values{};
  double residual = 0.0;

  cplx rr33_31() const { return values[0]; }
};

struct CorrelatorSet {
  cplx rho21_1, rho31_1;
  cplx rho11_2, rho22_2, rho33_2, rho32_2;
  double r = 0.0;
  std::array<cplx, 8> twobody2{};
  std::array<cplx, 8> twobody3{};
};

struct QuadratureOptions {
  int nodes = 64;
  double upper_factor = 3.0;  // integrate over [R_b, upper_factor * R_b]
  bool check_convergence = false;
  double tolerance = 1e-8;
};

struct ThirdOrderCoherence {
  cplx local;
  cplx nonlocal;
};

struct SusceptibilityBreakdown {
  cplx chi1;
  cplx chi3_local_contrib;
  cplx chi3_nonlocal_contrib;
  cplx total;
};

struct SusceptibilityOptions {
  bool include_nonlocal = true;
  QuadratureOptions quadrature{};
};

/// p21 = sqrt(3 pi eps0 hbar c^3 Gamma21 / omega_p^3), SI in and out.
double derive_dipole_moment(double Gamma21_rad_per_s, double lambda_m);

/// R_b = (|C6| gamma12 / Omega_c^2)^(1/6) with gamma12 = gamma21.
double blockade_radius(double Omega_c, double gamma21, double C6);

/// Van der Waals shift C6 / r^6.
double vdw_potential(double C6, double r);

FirstOrder first_order_coherences(const DriveParams& drive, const AtomParams& atom);
SecondOrderOneBody second_order_onebody(const DriveParams& drive, const AtomParams& atom);
SecondOrderTwoBody second_order_twobody(const DriveParams& drive, const AtomParams& atom,
                                        double r);
ThirdOrderTwoBody third_order_twobody(const DriveParams& drive, const AtomParams& atom, double r);

/// Na * integral d^3r' V(r'-r) rho rho^(3)_{33,31}, radial, over [R_b, 3 R_b].
cplx nonlocal_integral(const DriveParams& drive, const AtomParams& atom,
                       const QuadratureOptions& opts = {});

ThirdOrderCoherence third_order_coherence(const DriveParams& drive, const AtomParams& atom,
                                          const QuadratureOptions& opts = {});

SusceptibilityBreakdown susceptibility(const DriveParams& drive, const AtomParams& atom,
                                       const SusceptibilityOptions& opts = {});

// Caches the r-independent orders so that the radial quadrature only
// assembles and solves the r-dependent systems per node.
class PerturbativeSolver {
 public:
  PerturbativeSolver(const DriveParams& drive, const AtomParams& atom);

  const DriveParams& drive() const { return drive_; }
  const AtomParams& atom() const { return atom_; }
  const ComplexDenominators& denominators() const { return den_; }
  const FirstOrder& first() const { return first_; }
  const SecondOrderOneBody& second() const { return second_; }

  SecondOrderTwoBody twobody2(double r) const;
  ThirdOrderTwoBody twobody3(double r) const;
  ThirdOrderTwoBody twobody3_for_potential(double V) const;

  /// Nonlocal integral with a given number of Gauss-Legendre nodes.
  cplx nonlocal_integral(int nodes, double upper_factor = 3.0) const;
  cplx nonlocal_integral(const QuadratureOptions& opts) const;

  cplx local_third_order() const;
  /// Omega_c / (Omega_c^2 - d21 d31), the factor multiplying the integral.
  cplx nonlocal_prefactor() const;

  CorrelatorSet correlators(double r) const;

 private:
  SecondOrderTwoBody twobody2_for_potential(double V) const;

  DriveParams drive_;
  AtomParams atom_;
  ComplexDenominators den_;
  FirstOrder first_;
  SecondOrderOneBody second_;
  std::array<cplx, 4> twobody_local_{};  // r-independent block
  double twobody_local_residual_ = 0.0;
};

nlohmann::json to_json(const CorrelatorSet& set);

}  // namespace rydpshe::response
