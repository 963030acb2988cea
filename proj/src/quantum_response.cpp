#include "rydpshe/quantum_response.hpp"

#include <cmath>
#include <sstream>

#include <gsl/gsl_integration.h>

#include "rydpshe/errors.hpp"
#include "rydpshe/linalg.hpp"

namespace rydpshe::response {

namespace {

using Mat4 = Eigen::Matrix<cplx, 4, 4>;
using Vec4 = Eigen::Matrix<cplx, 4, 1>;
using Mat8 = Eigen::Matrix<cplx, 8, 8>;
using Vec8 = Eigen::Matrix<cplx, 8, 1>;

constexpr cplx kI{0.0, 1.0};

std::string describe(const DriveParams& d) {
  std::ostringstream os;
  os << "Delta2/2pi = " << units::rad_per_us_to_mhz(d.Delta2)
     << " MHz, Delta3/2pi = " << units::rad_per_us_to_mhz(d.Delta3()) << " MHz";
  return os.str();
}

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Omega_c^2 - d21 d31, shared by the first- and third-order coherences.
cplx eit_denominator(const DriveParams& drive, const ComplexDenominators& den) {
  return drive.Omega_c * drive.Omega_c - den.d21 * den.d31;
}

void require_nonzero(cplx denom, const DriveParams& drive, const char* what) {
  const double scale = std::max(1.0, drive.Omega_c * drive.Omega_c);
  if (std::abs(denom) <= 1e-14 * scale) {
    throw SingularityError(std::string(what) + ": vanishing EIT denominator at " +
                           describe(drive));
  }
}

}  // namespace

// --- parameters -------------------------------------------------------------

AtomParams AtomParams::from_decay_rates(double Gamma21, double Gamma32, double C6, double Na,
                                        double lambda_p) {
  AtomParams a;
  a.Gamma21 = Gamma21;
  a.Gamma32 = Gamma32;
  a.gamma21 = Gamma21 / 2.0;
  a.gamma31 = Gamma32 / 2.0;
  a.gamma32 = (Gamma21 + Gamma32) / 2.0;
  a.C6 = C6;
  a.Na = Na;
  a.lambda_p = lambda_p;
  return a;
}

AtomParams AtomParams::rubidium_defaults() {
  return from_decay_rates(units::mhz_to_rad_per_us(6.0), units::mhz_to_rad_per_us(3e-3),
                          units::mhz_to_rad_per_us(140e3), units::per_mm3_to_per_um3(4e7),
                          0.78);
}

void AtomParams::validate() const {
  if (!(Gamma21 > 0.0)) throw DomainError("Gamma21 must be positive");
  if (!(Gamma32 >= 0.0)) throw DomainError("Gamma32 must be non-negative");
  if (!(gamma21 >= 0.0 && gamma32 >= 0.0 && gamma31 >= 0.0)) {
    throw DomainError("coherence decay rates must be non-negative");
  }
  if (!(Na >= 0.0)) throw DomainError("atomic density must be non-negative");
  if (!(lambda_p > 0.0)) throw DomainError("probe wavelength must be positive");
  if (!std::isfinite(C6)) throw DomainError("C6 must be finite");
}

double AtomParams::dipole_moment() const {
  // rad/us -> rad/s, um -> m
  return derive_dipole_moment(Gamma21 * 1e6, lambda_p * 1e-6);
}

double AtomParams::chi_prefactor() const {
  const double p = dipole_moment();
  const double na_si = Na * 1e18;  // um^-3 -> m^-3
  const double k_per_s = na_si * p * p / (si::kEpsilon0 * si::kHbar);
  return k_per_s * 1e-6;
}

DriveParams DriveParams::defaults() {
  DriveParams d;
  d.Omega_p = units::mhz_to_rad_per_us(0.75);
  d.Omega_c = units::mhz_to_rad_per_us(4.0);
  d.Delta2 = 0.0;
  d.Delta_c = units::mhz_to_rad_per_us(-0.1);
  return d;
}

void DriveParams::validate() const {
  if (!(Omega_p >= 0.0) || !(Omega_c >= 0.0)) {
    throw DomainError("Rabi frequencies must be real and non-negative");
  }
  if (!std::isfinite(Delta2) || !std::isfinite(Delta_c) || !std::isfinite(Omega_p) ||
      !std::isfinite(Omega_c)) {
    throw DomainError("drive parameters must be finite");
  }
}

ComplexDenominators ComplexDenominators::from(const DriveParams& drive, const AtomParams& atom) {
  const double D1 = 0.0;
  const double D2 = drive.Delta2;
  const double D3 = drive.Delta3();
  ComplexDenominators d;
  d.d21 = {D2 - D1, atom.gamma21};
  d.d31 = {D3 - D1, atom.gamma31};
  d.d32 = {D3 - D2, atom.gamma32};
  d.d13 = {D1 - D3, atom.gamma31};
  d.d12 = {D1 - D2, atom.gamma21};
  d.d23 = {D2 - D3, atom.gamma32};
  return d;
}

// --- closed forms -----------------------------------------------------------

double derive_dipole_moment(double Gamma21_rad_per_s, double lambda_m) {
  if (!(Gamma21_rad_per_s >= 0.0)) throw DomainError("Gamma21 must be non-negative");
  if (!(lambda_m > 0.0)) throw DomainError("wavelength must be positive");
  const double omega = kTwoPi * si::kC / lambda_m;
  const double c3 = si::kC * si::kC * si::kC;
  return std::sqrt(3.0 * kPi * si::kEpsilon0 * si::kHbar * c3 * Gamma21_rad_per_s /
                   (omega * omega * omega));
}

double blockade_radius(double Omega_c, double gamma21, double C6) {
  if (!(Omega_c > 0.0)) {
    throw DomainError("blockade radius diverges for Omega_c = 0");
  }
  if (!(gamma21 > 0.0)) throw DomainError("gamma21 must be positive");
  if (C6 == 0.0) throw DomainError("blockade radius undefined for C6 = 0");
  return std::pow(std::abs(C6) * gamma21 / (Omega_c * Omega_c), 1.0 / 6.0);
}

double vdw_potential(double C6, double r) {
  const double r2 = r * r;
  return C6 / (r2 * r2 * r2);
}

FirstOrder first_order_coherences(const DriveParams& drive, const AtomParams& atom) {
  const auto den = ComplexDenominators::from(drive, atom);
  // d21 rho21 + Omega_c rho31 = -1,  Omega_c rho21 + d31 rho31 = 0
  const cplx det = den.d21 * den.d31 - drive.Omega_c * drive.Omega_c;
  require_nonzero(det, drive, "first_order_coherences");
  return {-den.d31 / det, drive.Omega_c / det};
}

SecondOrderOneBody second_order_onebody(const DriveParams& drive, const AtomParams& atom) {
  const auto den = ComplexDenominators::from(drive, atom);
  const auto f = first_order_coherences(drive, atom);
  const cplx oc{drive.Omega_c};
  const cplx rho12 = std::conj(f.rho21);
  const cplx rho13 = std::conj(f.rho31);

  // Unknowns (rho22, rho33, rho32, rho23) at O(Omega_p^2). Rows: the rho11,
  // rho33 and rho32 equations plus the conjugate rho23 equation; the rho22
  // equation is redundant and replaced by the trace.
  Mat4 a = Mat4::Zero();
  Vec4 b;
  a(0, 0) = -kI * atom.Gamma21;
  b(0) = rho12 - f.rho21;
  a(1, 1) = kI * atom.Gamma32;
  a(1, 2) = -std::conj(oc);
  a(1, 3) = oc;
  b(1) = 0.0;
  a(2, 0) = oc;
  a(2, 1) = -oc;
  a(2, 2) = den.d32;
  b(2) = f.rho31;
  a(3, 0) = std::conj(oc);
  a(3, 1) = -std::conj(oc);
  a(3, 3) = -den.d23;
  b(3) = rho13;

  const auto sol = linalg::solve<cplx, 4>(a, b, "second_order_onebody at " + describe(drive));
  SecondOrderOneBody s;
  s.rho22 = sol.x(0);
  s.rho33 = sol.x(1);
  s.rho32 = sol.x(2);
  s.rho11 = -s.rho22 - s.rho33;
  s.residual = sol.residual;
  return s;
}

// --- solver -----------------------------------------------------------------

PerturbativeSolver::PerturbativeSolver(const DriveParams& drive, const AtomParams& atom)
    : drive_(drive), atom_(atom) {
  drive_.validate();
  atom_.validate();
  den_ = ComplexDenominators::from(drive_, atom_);
  first_ = first_order_coherences(drive_, atom_);
  second_ = second_order_onebody(drive_, atom_);

  const cplx oc{drive_.Omega_c};
  const cplx ocs = std::conj(oc);
  const cplx rho12 = std::conj(first_.rho21);
  const cplx rho13 = std::conj(first_.rho31);
  const auto& d = den_;

  // rr13,31; rr12,31; rr12,21; rr13,21
  Mat4 a;
  a << d.d13 + d.d31, -ocs, 0.0, oc,
       -oc, d.d12 + d.d31, oc, 0.0,
       0.0, ocs, d.d12 + d.d21, -oc,
       ocs, 0.0, -ocs, d.d13 + d.d21;
  Vec4 b;
  b << 0.0, first_.rho31, -rho12 + first_.rho21, -rho13;
  const auto sol =
      linalg::solve<cplx, 4>(a, b, "second_order_twobody (local block) at " + describe(drive_));
  for (int i = 0; i < 4; ++i) twobody_local_[static_cast<std::size_t>(i)] = sol.x(i);
  twobody_local_residual_ = sol.residual;
}

SecondOrderTwoBody PerturbativeSolver::twobody2_for_potential(double V) const {
  const cplx oc{drive_.Omega_c};
  const cplx ocs = std::conj(oc);
  const auto& d = den_;

  // rr31,31; rr21,31; rr21,21; rr31,21. Row 2 carries -rho31, matching row 4
  // of the same block; this is what makes the V = 0 solution factorize.
  Mat4 a;
  a << 2.0 * d.d31 - V, 2.0 * oc, 0.0, 0.0,
       ocs, d.d21 + d.d31, oc, 0.0,
       0.0, 0.0, 2.0 * d.d21, 2.0 * ocs,
       ocs, 0.0, oc, d.d21 + d.d31;
  Vec4 b;
  b << 0.0, -first_.rho31, -2.0 * first_.rho21, -first_.rho31;
  std::ostringstream what;
  what << "second_order_twobody at V = " << V << ", " << describe(drive_);
  const auto sol = linalg::solve<cplx, 4>(a, b, what.str());

  SecondOrderTwoBody out;
  for (std::size_t i = 0; i < 4; ++i) out.values[i] = twobody_local_[i];
  for (int i = 0; i < 4; ++i) out.values[static_cast<std::size_t>(4 + i)] = sol.x(i);
  out.residual = std::max(twobody_local_residual_, sol.residual);
  return out;
}

SecondOrderTwoBody PerturbativeSolver::twobody2(double r) const {
  if (!(r > 0.0)) throw DomainError("pair separation must be positive");
  return twobody2_for_potential(vdw_potential(atom_.C6, r));
}

ThirdOrderTwoBody PerturbativeSolver::twobody3_for_potential(double V) const {
  const auto t2 = twobody2_for_potential(V);
  const cplx oc{drive_.Omega_c};
  const cplx ocs = std::conj(oc);
  const auto& d = den_;
  const double G23 = atom_.Gamma32;
  const double G12 = atom_.Gamma21;

  Mat8 q;
  q << d.d31 + kI * G23 - V, oc, -ocs, oc, 0.0, 0.0, 0.0, 0.0,
       ocs, d.d23 + d.d31, 0.0, 0.0, -ocs, oc, 0.0, 0.0,
       -oc, 0.0, d.d31 + d.d32 - V, 0.0, oc, 0.0, oc, 0.0,
       ocs, 0.0, 0.0, d.d21 + kI * G23, 0.0, oc, -ocs, 0.0,
       0.0, -oc, ocs, 0.0, d.d31 + kI * G12, 0.0, 0.0, oc,
       0.0, ocs, 0.0, ocs, 0.0, d.d21 + d.d23, 0.0, -ocs,
       0.0, 0.0, ocs, -oc, 0.0, 0.0, d.d21 + d.d32, -ocs,
       0.0, 0.0, 0.0, 0.0, ocs, -oc, ocs, d.d21 + kI * G12;

  // Index-1 correlators enter as solved (no conjugation); rho23 = conj(rho32).
  const auto& s = second_;
  Vec8 rhs;
  rhs << 0.0,
         -t2.rr12_31(),
         t2.rr31_31(),
         -s.rho33,
         -t2.rr12_31() + t2.rr21_31(),
         -s.rho23() + t2.rr13_21(),
         -s.rho32 + t2.rr31_21(),
         -s.rho22 - t2.rr12_21() + t2.rr21_21();
  for (int i = 0; i < 8; ++i) {
    if (!finite(rhs(i))) {
      throw PropagationError("third_order_twobody: non-finite right-hand side from "
                             "second_order_onebody/second_order_twobody at " +
                             describe(drive_));
    }
  }

  std::ostringstream what;
  what << "third_order_twobody at V = " << V << ", " << describe(drive_);
  const auto sol = linalg::solve<cplx, 8>(q, rhs, what.str());
  ThirdOrderTwoBody out;
  for (int i = 0; i < 8; ++i) out.values[static_cast<std::size_t>(i)] = sol.x(i);
  out.residual = std::max(sol.residual, t2.residual);
  return out;
}

ThirdOrderTwoBody PerturbativeSolver::twobody3(double r) const {
  if (!(r > 0.0)) throw DomainError("pair separation must be positive");
  return twobody3_for_potential(vdw_potential(atom_.C6, r));
}

cplx PerturbativeSolver::nonlocal_integral(int nodes, double upper_factor) const {
  if (nodes < 2) throw DomainError("quadrature needs at least two nodes");
  if (!(upper_factor > 1.0)) throw DomainError("upper limit must exceed R_b");
  if (atom_.C6 == 0.0 || atom_.Na == 0.0) return 0.0;
  if (drive_.Omega_c == 0.0) return 0.0;  // R_b diverges; prefactor Omega_c kills the term

  const double rb = blockade_radius(drive_.Omega_c, atom_.gamma21, atom_.C6);
  // u = s^-3: s^2 V(s) ds = -(C6/3) du, so the kernel becomes flat in u.
  const double u_lo = std::pow(upper_factor * rb, -3.0);
  const double u_hi = std::pow(rb, -3.0);

  gsl_integration_glfixed_table* table =
      gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(nodes));
  if (table == nullptr) throw Error("failed to allocate Gauss-Legendre table");
  cplx acc = 0.0;
  try {
    for (int i = 0; i < nodes; ++i) {
      double u = 0.0;
      double w = 0.0;
      gsl_integration_glfixed_point(u_lo, u_hi, static_cast<std::size_t>(i), &u, &w, table);
      const double s = std::cbrt(1.0 / u);
      acc += w * twobody3(s).rr33_31();
    }
  } catch (...) {
    gsl_integration_glfixed_table_free(table);
    throw;
  }
  gsl_integration_glfixed_table_free(table);
  return atom_.Na * 4.0 * kPi * (atom_.C6 / 3.0) * acc;
}

cplx PerturbativeSolver::nonlocal_integral(const QuadratureOptions& opts) const {
  const cplx value = nonlocal_integral(opts.nodes, opts.upper_factor);
  if (opts.check_convergence) {
    const cplx refined = nonlocal_integral(2 * opts.nodes, opts.upper_factor);
    const double scale = std::abs(refined);
    const double diff = std::abs(refined - value);
    if (scale > 0.0 && diff > opts.tolerance * scale) {
      std::ostringstream os;
      os << "nonlocal_integral: doubling " << opts.nodes << " nodes changed the result by "
         << diff / scale << " (relative) at " << describe(drive_);
      throw ConvergenceError(os.str());
    }
  }
  return value;
}

cplx PerturbativeSolver::local_third_order() const {
  const cplx denom = eit_denominator(drive_, den_);
  require_nonzero(denom, drive_, "third_order_coherence");
  const auto& s = second_;
  return -(den_.d31 * (s.rho22 - s.rho11) - drive_.Omega_c * s.rho32) / denom;
}

cplx PerturbativeSolver::nonlocal_prefactor() const {
  const cplx denom = eit_denominator(drive_, den_);
  require_nonzero(denom, drive_, "third_order_coherence");
  return drive_.Omega_c / denom;
}

CorrelatorSet PerturbativeSolver::correlators(double r) const {
  CorrelatorSet c;
  c.rho21_1 = first_.rho21;
  c.rho31_1 = first_.rho31;
  c.rho11_2 = second_.rho11;
  c.rho22_2 = second_.rho22;
  c.rho33_2 = second_.rho33;
  c.rho32_2 = second_.rho32;
  c.r = r;
  c.twobody2 = twobody2(r).values;
  c.twobody3 = twobody3(r).values;
  return c;
}

// --- free functions -----------------------------------------------------------

SecondOrderTwoBody second_order_twobody(const DriveParams& drive, const AtomParams& atom,
                                        double r) {
  return PerturbativeSolver(drive, atom).twobody2(r);
}

ThirdOrderTwoBody third_order_twobody(const DriveParams& drive, const AtomParams& atom,
                                      double r) {
  return PerturbativeSolver(drive, atom).twobody3(r);
}

cplx nonlocal_integral(const DriveParams& drive, const AtomParams& atom,
                       const QuadratureOptions& opts) {
  return PerturbativeSolver(drive, atom).nonlocal_integral(opts);
}

ThirdOrderCoherence third_order_coherence(const DriveParams& drive, const AtomParams& atom,
                                          const QuadratureOptions& opts) {
  const PerturbativeSolver solver(drive, atom);
  ThirdOrderCoherence out;
  out.local = solver.local_third_order();
  out.nonlocal = solver.nonlocal_prefactor() * solver.nonlocal_integral(opts);
  return out;
}

SusceptibilityBreakdown susceptibility(const DriveParams& drive, const AtomParams& atom,
                                       const SusceptibilityOptions& opts) {
  const PerturbativeSolver solver(drive, atom);
  const double k = atom.chi_prefactor();
  const double op2 = drive.Omega_p * drive.Omega_p;

  SusceptibilityBreakdown chi;
  chi.chi1 = k * solver.first().rho21;
  chi.chi3_local_contrib = k * op2 * solver.local_third_order();
  if (opts.include_nonlocal && op2 != 0.0) {
    chi.chi3_nonlocal_contrib =
        k * op2 * solver.nonlocal_prefactor() * solver.nonlocal_integral(opts.quadrature);
  }
  chi.total = chi.chi1 + chi.chi3_local_contrib + chi.chi3_nonlocal_contrib;
  return chi;
}

nlohmann::json to_json(const CorrelatorSet& set) {
  auto z = [](cplx v) { return nlohmann::json::array({v.real(), v.imag()}); };
  nlohmann::json j;
  j["rho21_1"] = z(set.rho21_1);
  j["rho31_1"] = z(set.rho31_1);
  j["rho11_2"] = z(set.rho11_2);
  j["rho22_2"] = z(set.rho22_2);
  j["rho33_2"] = z(set.rho33_2);
  j["rho32_2"] = z(set.rho32_2);
  j["r_um"] = set.r;
  static const char* k2[] = {"13,31", "12,31", "12,21", "13,21",
                             "31,31", "21,31", "21,21", "31,21"};
  static const char* k3[] = {"33,31", "23,31", "32,31", "33,21",
                             "22,31", "23,21", "32,21", "22,21"};
  for (std::size_t i = 0; i < 8; ++i) {
    j["twobody2"][k2[i]] = z(set.twobody2[i]);
    j["twobody3"][k3[i]] = z(set.twobody3[i]);
  }
  return j;
}

}  // namespace rydpshe::response
