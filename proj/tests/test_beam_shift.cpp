#include <doctest.h>

#include <cmath>
#include <random>

#include "rydpshe/beam_shift.hpp"
#include "rydpshe/errors.hpp"

using namespace rydpshe;
using namespace rydpshe::beam;

namespace {

BeamSpec spec(double theta_deg) {
  BeamSpec b;
  b.theta_i = units::deg_to_rad(theta_deg);
  return b;
}

}  // namespace

TEST_CASE("beam spec validation") {
  auto b = spec(30.0);
  CHECK_NOTHROW(b.validate());
  b.grid_n = 1000;
  CHECK_THROWS_AS(b.validate(), DomainError);
  b = spec(30.0);
  b.grid_span = 4.0;
  CHECK_THROWS_AS(b.validate(), DomainError);
  b = spec(0.0);
  CHECK_THROWS_AS(b.validate(), DomainError);
  b = spec(86.0);
  CHECK_THROWS_AS(b.validate(), DomainError);
}

TEST_CASE("incident spectrum") {
  const auto b = spec(30.0);
  const auto s = incident_spectrum(b);
  const std::size_t mid = s.k.size() / 2;
  CHECK(s.k[mid] == 0.0);
  for (const auto& v : s.values) CHECK(std::abs(v) <= std::abs(s.values[mid]));

  // e^-1 at k = 2/w0; the grid contains k = 2/w0 when span*N/2 divides evenly
  const std::size_t j = mid + static_cast<std::size_t>(std::lround(2.0 / b.w0 / s.dk));
  CHECK(s.k[j] == doctest::Approx(2.0 / b.w0).epsilon(1e-12));
  CHECK(std::abs(s.values[j]) / std::abs(s.values[mid]) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  // integral dk |E~|^2 = w0^2 pi * sqrt(2 pi) / w0
  double p = 0.0;
  for (const auto& v : s.values) p += std::norm(v) * s.dk;
  const double exact = b.w0 * kPi * std::sqrt(2.0 * kPi);
  CHECK(p == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("spin spectra symmetries") {
  const auto b = spec(33.0);
  const cplx rp{0.01, -0.02}, rs{-0.2, 0.05};

  const auto no_mix = reflected_spin_spectra(b, rp, -rp);
  for (std::size_t i = 0; i < no_mix.k.size(); ++i) CHECK(no_mix.plus[i] == no_mix.minus[i]);
  const auto r0 = compute_shifts(b, rp, -rp);
  CHECK(r0.delta_plus == 0.0);
  CHECK(r0.delta_minus == 0.0);

  const auto s = reflected_spin_spectra(b, rp, rs);
  const std::size_t mid = s.k.size() / 2;
  CHECK(s.plus[mid] == s.minus[mid]);
  // sigma swap equals k -> -k
  for (std::size_t i = 1; i < s.k.size(); ++i) {
    const std::size_t m = s.k.size() - i;
    CHECK(std::abs(s.plus[i] - s.minus[m]) <= 1e-15 * std::abs(s.plus[i]) + 1e-300);
  }
}

TEST_CASE("transform and centroid") {
  const auto b = spec(40.0);

  SUBCASE("identity reflection") {
    const auto f = reflected_field(reflected_spin_spectra(b, 1.0, -1.0));
    CHECK(std::abs(centroid(f.y_samples, f.e_plus)) < 1e-12);
    const std::size_t mid = f.y_samples.size() / 2;
    CHECK(f.y_samples[mid] == 0.0);
    // spectrum truncated at k = 8/w0, where it has fallen to e^-16
    CHECK(std::abs(f.e_plus[mid] - 1.0 / std::sqrt(2.0)) < 1e-7);
    CHECK(f.parseval_error < 1e-10);
  }

  SUBCASE("displaced Gaussian") {
    std::vector<double> y;
    std::vector<cplx> e;
    for (int i = -2000; i <= 2000; ++i) {
      y.push_back(0.1 * i);
      e.push_back(std::exp(-std::pow(0.1 * i - 3.0, 2) / 400.0));
    }
    CHECK(centroid(y, e) == doctest::Approx(3.0).epsilon(1e-9));
    std::vector<cplx> zero(y.size(), 0.0);
    CHECK_THROWS_AS(centroid(y, zero), DomainError);
  }

  SUBCASE("window guard") {
    auto tight = b;
    tight.grid_span = 400.0;
    tight.grid_n = 256;
    CHECK_THROWS_AS(reflected_field(reflected_spin_spectra(tight, 1.0, -1.0)), WindowError);
  }
}

TEST_CASE("analytic shift limits") {
  const auto b = spec(33.0);
  const auto a0 = analytic_gaussian_shift({0.1, 0.0}, {-0.1, 0.0}, b.theta_i, b);
  CHECK(a0.delta_plus == 0.0);
  const auto r0 = analytic_gaussian_shift({0.0, 0.0}, {-0.3, 0.1}, b.theta_i, b);
  CHECK(r0.delta_plus == 0.0);
  CHECK(r0.delta_minus == 0.0);
}

TEST_CASE("transform pipeline against the closed form") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    auto b = spec(20.0 + 40.0 * (u(rng) + 1.0) / 2.0);
    const cplx rp{0.3 * u(rng), 0.3 * u(rng)};
    const cplx rs{-0.2 + 0.1 * u(rng), 0.1 * u(rng)};
    if (std::abs(rp) < 0.05) continue;
    const auto fft = compute_shifts(b, rp, rs);
    const auto ana = analytic_gaussian_shift(rp, rs, b.theta_i, b);
    CHECK(fft.delta_plus == doctest::Approx(ana.delta_plus).epsilon(1e-6));
    CHECK(fft.delta_minus == doctest::Approx(-fft.delta_plus).epsilon(1e-12));
    CHECK(fft.power_plus == doctest::Approx(ana.power_plus).epsilon(1e-9));
  }
}

TEST_CASE("mixing options") {
  const auto b = spec(33.8);
  const cplx rp{1e-3, 2e-3}, rs{-0.3, 0.05};
  const auto base = compute_shifts(b, rp, rs);
  MixingOptions off;
  off.cross_sign = 0.0;
  const auto none = compute_shifts(b, rp, rs, off);
  CHECK(none.delta_plus == 0.0);
  CHECK(none.delta_minus == 0.0);
  MixingOptions flip;
  flip.cross_sign = -1.0;
  const auto f = compute_shifts(b, rp, rs, flip);
  CHECK(f.delta_plus == doctest::Approx(-base.delta_plus).epsilon(1e-9));
  CHECK(std::abs(f.delta_plus + f.delta_minus) < 1e-9);
}

TEST_CASE("shift never exceeds half the waist") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const auto b = spec(33.8);
    const cplx rp{1e-3 * u(rng), 1e-3 * u(rng)};
    const cplx rs{-0.3 + 0.05 * u(rng), 0.05 * u(rng)};
    const auto a = analytic_gaussian_shift(rp, rs, b.theta_i, b);
    CHECK(std::abs(a.delta_plus) <= 0.5 * b.w0 * (1.0 + 1e-12));
  }
}

TEST_CASE("grid independence") {
  auto b = spec(33.8);
  const cplx rp{2e-3, -1e-3}, rs{-0.3, 0.02};
  const auto r1 = compute_shifts(b, rp, rs);
  b.grid_n *= 2;
  const auto r2 = compute_shifts(b, rp, rs);
  CHECK(std::abs(r2.delta_plus - r1.delta_plus) < 1e-3 * std::abs(r1.delta_plus));
}

TEST_CASE("profile peaks and 2-D map") {
  auto b = spec(33.8);
  b.grid_span = 64.0;
  const cplx rp{2e-3, 0.0}, rs{-0.3, 0.0};
  const auto f = reflected_field(reflected_spin_spectra(b, rp, rs));
  const auto pk = profile_peaks(f);
  CHECK(pk.y_plus == doctest::Approx(-pk.y_minus).epsilon(1e-9));
  // sigma+ peak: maximum of (rp - 2 a y / w0^2) exp(-y^2/w0^2) with real rp, a
  const double a = (rp.real() + rs.real()) / std::tan(b.theta_i) / b.k0();
  const double w2 = b.w0 * b.w0;
  // derivative root of (rp - 2 a y / w2) exp(-y^2 / w2)
  const double c2 = 4.0 * a / (w2 * w2), c1 = -2.0 * rp.real() / w2, c0 = -2.0 * a / w2;
  const double disc = std::sqrt(c1 * c1 - 4.0 * c2 * c0);
  const double ya = (-c1 - disc) / (2.0 * c2), yb = (-c1 + disc) / (2.0 * c2);
  auto amp = [&](double y) { return std::abs((rp.real() - 2.0 * a * y / w2) * std::exp(-y * y / w2)); };
  const double expect = amp(ya) > amp(yb) ? ya : yb;
  CHECK(pk.y_plus == doctest::Approx(expect).epsilon(2e-2));

  BeamSpec b2 = spec(33.8);
  b2.grid_n = 256;
  b2.grid_span = 16.0;
  const auto m = intensity_map_2d(b2, rp, rs, 150.0);
  CHECK(m.plus.size() == m.x.size() * m.y.size());
  CHECK(m.peak_plus_y == doctest::Approx(-m.peak_minus_y).epsilon(1e-9));
  CHECK(std::abs(m.peak_plus_y - pk.y_plus) < b2.dy());
}
