#include "rydpshe/multilayer.hpp"

#include <cmath>
#include <sstream>

#include "rydpshe/errors.hpp"

namespace rydpshe::optics {

LayerStack LayerStack::trilayer(double n1, cplx n2, double d2, double n3) {
  LayerStack s;
  s.n_in = n1;
  s.layers.push_back({n2, d2});
  s.n_out = n3;
  return s;
}

void LayerStack::validate() const {
  if (!(n_in > 0.0) || !(n_out > 0.0)) {
    throw DomainError("entry and exit indices must be positive");
  }
  for (const auto& l : layers) {
    if (!(l.d >= 0.0)) throw DomainError("layer thickness must be non-negative");
    if (!std::isfinite(l.n.real()) || !std::isfinite(l.n.imag())) {
      throw PropagationError("non-finite layer index");
    }
  }
}

cplx refraction_cosine(double n_in, double theta_i, cplx n_j) {
  const cplx s = n_in * std::sin(theta_i) / n_j;
  cplx c = std::sqrt(1.0 - s * s);
  if ((n_j * c).imag() < 0.0) c = -c;
  return c;
}

cplx impedance(cplx n, cplx cos_theta, Polarization pol) {
  if (pol == Polarization::S) return n * cos_theta;
  if (cos_theta == cplx{0.0, 0.0}) {
    throw SingularityError("p-impedance diverges at grazing refraction");
  }
  return n / cos_theta;
}

Eigen::Matrix2cd layer_matrix(const Layer& layer, double theta_i, double k0, double n_in,
                              Polarization pol) {
  const cplx c = refraction_cosine(n_in, theta_i, layer.n);
  const cplx p = impedance(layer.n, c, pol);
  if (p == cplx{0.0, 0.0}) throw SingularityError("zero layer impedance");
  const cplx delta = k0 * layer.n * layer.d * c;
  const cplx cd = std::cos(delta);
  const cplx sd = std::sin(delta);
  const cplx i{0.0, 1.0};
  Eigen::Matrix2cd m;
  m << cd, -i * sd / p, -i * p * sd, cd;
  return m;
}

Coefficients stack_fresnel(const LayerStack& stack, double theta_i, double k0, Polarization pol) {
  stack.validate();
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
  for (const auto& l : stack.layers) m = m * layer_matrix(l, theta_i, k0, stack.n_in, pol);

  const cplx p1 = impedance(stack.n_in, refraction_cosine(stack.n_in, theta_i, stack.n_in), pol);
  const cplx p3 = impedance(stack.n_out, refraction_cosine(stack.n_in, theta_i, stack.n_out), pol);
  const cplx a = (m(0, 0) + m(0, 1) * p3) * p1;
  const cplx b = m(1, 0) + m(1, 1) * p3;
  const cplx den = a + b;
  if (std::abs(den) == 0.0) {
    std::ostringstream os;
    os << "vanishing Fresnel denominator at theta = " << units::rad_to_deg(theta_i) << " deg";
    throw SingularityError(os.str());
  }
  return {(a - b) / den, 2.0 * p1 / den};
}

FresnelPair fresnel_pair(const LayerStack& stack, double theta_i, double k0) {
  const auto p = stack_fresnel(stack, theta_i, k0, Polarization::P);
  const auto s = stack_fresnel(stack, theta_i, k0, Polarization::S);
  return {p.r, s.r, p.t, s.t};
}

double energy_balance(const LayerStack& stack, double theta_i, Polarization pol,
                      const Coefficients& c) {
  const cplx p1 = impedance(stack.n_in, refraction_cosine(stack.n_in, theta_i, stack.n_in), pol);
  const cplx p3 = impedance(stack.n_out, refraction_cosine(stack.n_in, theta_i, stack.n_out), pol);
  return std::norm(c.r) + (p3.real() / p1.real()) * std::norm(c.t);
}

double brewster_angle(const LayerStack& stack, double k0, BrewsterSearch search) {
  const double lo = search.lo > 0.0 ? search.lo : units::deg_to_rad(20.0);
  const double hi = search.hi > 0.0 ? search.hi : units::deg_to_rad(50.0);
  if (!(lo < hi) || hi >= kPi / 2 || search.coarse < 3) {
    throw DomainError("invalid Brewster search window");
  }

  auto abs_rp = [&](double th) { return std::abs(stack_fresnel(stack, th, k0, Polarization::P).r); };
  auto ratio = [&](double th) {
    const auto f = fresnel_pair(stack, th, k0);
    const double rs = std::abs(f.rs);
    return rs > 0.0 ? std::abs(f.rp) / rs : std::abs(f.rp);
  };

  const double step = (hi - lo) / (search.coarse - 1);
  int best = 0;
  double best_val = ratio(lo);
  for (int i = 1; i < search.coarse; ++i) {
    const double v = ratio(lo + i * step);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  if (best == 0 || best == search.coarse - 1) {
    std::ostringstream os;
    os << "no interior |r_p| minimum in [" << units::rad_to_deg(lo) << ", "
       << units::rad_to_deg(hi) << "] deg";
    throw SearchError(os.str());
  }

  // golden section on |r_p| within the neighbouring coarse cells
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo + (best - 1) * step;
  double b = lo + (best + 1) * step;
  double x1 = b - g * (b - a);
  double x2 = a + g * (b - a);
  double f1 = abs_rp(x1);
  double f2 = abs_rp(x2);
  while (b - a > search.tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = abs_rp(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = abs_rp(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace rydpshe::optics
