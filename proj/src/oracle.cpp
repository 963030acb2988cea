#include "rydpshe/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "rydpshe/errors.hpp"
#include "rydpshe/linalg.hpp"

namespace rydpshe::oracle {

using response::AtomParams;
using response::DriveParams;

double DensityMatrix3::hermiticity_error() const {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix3::trace_error() const { return std::abs(rho.trace() - 1.0); }

double DensityMatrix3::min_eigenvalue() const {
  const Eigen::Matrix3cd h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool DensityMatrix3::is_physical() const {
  return hermiticity_error() < 1e-12 && trace_error() < 1e-12 && min_eigenvalue() >= -1e-10;
}

namespace {

// d rho / dt for the ladder with H = -Delta2 s22 - Delta3 s33
// - (Omega_p |2><1| + Omega_c |3><2| + h.c.), spontaneous decay 3->2->1 and
// coherence damping at the configured gamma_ab.
Eigen::Matrix3cd bloch_rhs(const Eigen::Matrix3cd& rho, const DriveParams& drive,
                           const AtomParams& atom) {
  Eigen::Matrix3cd h = Eigen::Matrix3cd::Zero();
  h(1, 1) = -drive.Delta2;
  h(2, 2) = -drive.Delta3();
  h(1, 0) = h(0, 1) = -drive.Omega_p;
  h(2, 1) = h(1, 2) = -drive.Omega_c;

  const cplx i{0.0, 1.0};
  Eigen::Matrix3cd out = -i * (h * rho - rho * h);

  out(0, 0) += atom.Gamma21 * rho(1, 1);
  out(1, 1) += -atom.Gamma21 * rho(1, 1) + atom.Gamma32 * rho(2, 2);
  out(2, 2) += -atom.Gamma32 * rho(2, 2);

  const double g[3][3] = {{0.0, atom.gamma21, atom.gamma31},
                          {atom.gamma21, 0.0, atom.gamma32},
                          {atom.gamma31, atom.gamma32, 0.0}};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (a != b) out(a, b) -= g[a][b] * rho(a, b);
    }
  }
  return out;
}

// x = (rho22, rho33, Re rho21, Im rho21, Re rho31, Im rho31, Re rho32, Im rho32)
Eigen::Matrix3cd assemble(const Eigen::Matrix<double, 8, 1>& x) {
  const cplx i{0.0, 1.0};
  Eigen::Matrix3cd rho;
  rho(1, 1) = x(0);
  rho(2, 2) = x(1);
  rho(0, 0) = 1.0 - x(0) - x(1);
  rho(1, 0) = x(2) + i * x(3);
  rho(2, 0) = x(4) + i * x(5);
  rho(2, 1) = x(6) + i * x(7);
  rho(0, 1) = std::conj(rho(1, 0));
  rho(0, 2) = std::conj(rho(2, 0));
  rho(1, 2) = std::conj(rho(2, 1));
  return rho;
}

Eigen::Matrix<double, 8, 1> project(const Eigen::Matrix3cd& m) {
  Eigen::Matrix<double, 8, 1> r;
  r << m(1, 1).real(), m(2, 2).real(), m(1, 0).real(), m(1, 0).imag(), m(2, 0).real(),
      m(2, 0).imag(), m(2, 1).real(), m(2, 1).imag();
  return r;
}

}  // namespace

DensityMatrix3 full_local_bloch_steady_state(const DriveParams& drive, const AtomParams& atom) {
  drive.validate();
  atom.validate();
  using Vec8 = Eigen::Matrix<double, 8, 1>;
  using Mat8 = Eigen::Matrix<double, 8, 8>;

  // The map x -> project(bloch_rhs(assemble(x))) is affine; recover it column
  // by column from unit perturbations of the ground state.
  const Vec8 zero = Vec8::Zero();
  const Vec8 b0 = project(bloch_rhs(assemble(zero), drive, atom));
  Mat8 a;
  for (int k = 0; k < 8; ++k) {
    Vec8 e = Vec8::Zero();
    e(k) = 1.0;
    a.col(k) = project(bloch_rhs(assemble(e), drive, atom)) - b0;
  }
  const auto sol = linalg::solve<double, 8>(a, Vec8(-b0), "local Bloch steady state");
  DensityMatrix3 out;
  out.rho = assemble(sol.x);
  return out;
}

QuadratureReport quadrature_refine(const DriveParams& drive, const AtomParams& atom,
                                   const std::vector<int>& node_counts, int trapezoid_panels) {
  QuadratureReport rep;
  rep.node_counts = node_counts;
  rep.kernel_extension_analytic =
      (std::pow(3.0, -3) - std::pow(5.0, -3)) / (1.0 - std::pow(3.0, -3));

  const response::PerturbativeSolver solver(drive, atom);
  for (int n : node_counts) rep.values.push_back(solver.nonlocal_integral(n, 3.0));
  for (std::size_t i = 1; i < rep.values.size(); ++i) {
    const double scale = std::abs(rep.values[i]);
    rep.successive_rel_diff.push_back(scale > 0.0 ? std::abs(rep.values[i] - rep.values[i - 1]) / scale
                                                  : 0.0);
  }

  if (atom.C6 == 0.0 || atom.Na == 0.0 || drive.Omega_c == 0.0) {
    rep.trapezoid_reference = 0.0;
    rep.kernel_extension_numeric = rep.kernel_extension_analytic;
    return rep;
  }

  // Plain trapezoid in s, no substitution.
  const double rb = response::blockade_radius(drive.Omega_c, atom.gamma21, atom.C6);
  auto trapezoid = [rb](double s_hi, int panels, auto&& f) {
    const double h = (s_hi - rb) / panels;
    cplx acc = 0.5 * (f(rb) + f(s_hi));
    for (int k = 1; k < panels; ++k) acc += f(rb + k * h);
    return acc * h;
  };
  auto integrand = [&](double s) -> cplx {
    return s * s * response::vdw_potential(atom.C6, s) * solver.twobody3(s).rr33_31();
  };
  const double pre = atom.Na * 4.0 * kPi;
  rep.trapezoid_reference = pre * trapezoid(3.0 * rb, trapezoid_panels, integrand);
  if (!rep.values.empty()) {
    const double scale = std::abs(rep.trapezoid_reference);
    rep.default_vs_trapezoid = std::abs(rep.values.back() - rep.trapezoid_reference) / scale;
  }

  const cplx i3 = solver.nonlocal_integral(node_counts.empty() ? 64 : node_counts.back(), 3.0);
  const cplx i5 = solver.nonlocal_integral(node_counts.empty() ? 64 : node_counts.back(), 5.0);
  rep.upper_extension_rel_change = std::abs(i5 - i3) / std::abs(i3);

  // Pure kernel s^2 V(s) = C6 / s^4, integrated with the same trapezoid.
  auto kernel = [&](double s) -> cplx { return s * s * response::vdw_potential(atom.C6, s); };
  const int fine = std::max(trapezoid_panels, 200000);
  const cplx k3 = trapezoid(3.0 * rb, fine, kernel);
  const cplx k5 = trapezoid(5.0 * rb, fine, kernel);
  rep.kernel_extension_numeric = std::abs(k5 - k3) / std::abs(k3);
  return rep;
}

cplx airy_trilayer_reflection(double n1, cplx n2, double d2, double n3, double theta_i, double k0,
                              bool p_polarized) {
  const double s1 = n1 * std::sin(theta_i);
  auto cosine = [&](cplx n) {
    cplx c = std::sqrt(1.0 - (s1 / n) * (s1 / n));
    if ((n * c).imag() < 0.0) c = -c;
    return c;
  };
  auto imp = [&](cplx n) {
    const cplx c = cosine(n);
    return p_polarized ? n / c : n * c;
  };
  const cplx p1 = imp(n1);
  const cplx p2 = imp(n2);
  const cplx p3 = imp(n3);
  const cplx r12 = (p1 - p2) / (p1 + p2);
  const cplx r23 = (p2 - p3) / (p2 + p3);
  const cplx phase = std::exp(cplx{0.0, 2.0} * k0 * n2 * cosine(n2) * d2);
  return (r12 + r23 * phase) / (1.0 + r12 * r23 * phase);
}

}  // namespace rydpshe::oracle
