#include "rydpshe/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include "rydpshe/beam_shift.hpp"
#include "rydpshe/config.hpp"
#include "rydpshe/errors.hpp"
#include "rydpshe/multilayer.hpp"
#include "rydpshe/oracle.hpp"
#include "rydpshe/pipeline.hpp"
#include "rydpshe/quantum_response.hpp"

namespace rydpshe::verify {

namespace {

using response::AtomParams;
using response::DriveParams;

struct Outcome {
  double measured;
  bool passed;
  std::string detail = {};
};

struct Check {
  std::string name;
  double threshold;
  std::function<Outcome()> run;
};

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

DriveParams drive_at(double delta2_mhz, double omega_p_mhz = 0.75) {
  auto d = DriveParams::defaults();
  d.Delta2 = units::mhz_to_rad_per_us(delta2_mhz);
  d.Omega_p = units::mhz_to_rad_per_us(omega_p_mhz);
  return d;
}

AtomParams local_atom() {
  auto a = AtomParams::rubidium_defaults();
  a.C6 = 0.0;
  return a;
}

double oracle_deviation(double omega_p_mhz) {
  const auto atom = local_atom();
  double worst = 0.0;
  for (int i = 0; i <= 40; ++i) {
    const auto d = drive_at(-10.0 + 0.5 * i, omega_p_mhz);
    const response::PerturbativeSolver s(d, atom);
    const double op = d.Omega_p;
    const cplx pert = op * s.first().rho21 + op * op * op * s.local_third_order();
    worst = std::max(worst, rel(pert, oracle::full_local_bloch_steady_state(d, atom)(2, 1)));
  }
  return worst;
}

beam::BeamSpec beam_at(double theta_deg) {
  beam::BeamSpec b;
  b.theta_i = units::deg_to_rad(theta_deg);
  return b;
}

optics::FresnelPair canonical_fresnel(double delta2_mhz, double theta_deg) {
  const auto chi = response::susceptibility(drive_at(delta2_mhz), AtomParams::rubidium_defaults());
  return pipeline::fresnel_for_chi(pipeline::Geometry{}, chi.total, units::deg_to_rad(theta_deg), 0.78);
}

std::vector<Check> build_checks() {
  std::vector<Check> c;

  c.push_back({"oracle_density_matrix_invariants", 0.0, [] {
                 std::mt19937_64 rng(12345);
                 std::uniform_real_distribution<double> u(0.0, 1.0);
                 double worst = 0.0;
                 for (int i = 0; i < 1000; ++i) {
                   auto a = AtomParams::from_decay_rates(units::mhz_to_rad_per_us(1.0 + 10.0 * u(rng)),
                                                         units::mhz_to_rad_per_us(0.01 * u(rng)), 0.0,
                                                         0.04, 0.78);
                   DriveParams d;
                   d.Omega_p = units::mhz_to_rad_per_us(5.0 * u(rng));
                   d.Omega_c = units::mhz_to_rad_per_us(10.0 * u(rng));
                   d.Delta2 = units::mhz_to_rad_per_us(40.0 * (u(rng) - 0.5));
                   d.Delta_c = units::mhz_to_rad_per_us(4.0 * (u(rng) - 0.5));
                   const auto rho = oracle::full_local_bloch_steady_state(d, a);
                   worst += rho.is_physical() ? 0.0 : 1.0;
                 }
                 return Outcome{worst, worst == 0.0, "non-physical draws out of 1000"};
               }});

  c.push_back({"perturbative_vs_oracle_0.1MHz", 1e-2, [] {
                 const double d = oracle_deviation(0.1);
                 return Outcome{d, d < 1e-2};
               }});

  c.push_back({"oracle_deviation_grows_with_omega_p", 0.0, [] {
                 const double a = oracle_deviation(0.1), b = oracle_deviation(0.2), e = oracle_deviation(0.4);
                 std::ostringstream os;
                 os << "0.1/0.2/0.4 MHz: " << a << " / " << b << " / " << e;
                 return Outcome{e, a < b && b < e, os.str()};
               }});

  c.push_back({"trace_order_by_order", 1e-12, [] {
                 std::mt19937_64 rng(7);
                 std::uniform_real_distribution<double> u(-1.0, 1.0);
                 double worst = 0.0;
                 for (int i = 0; i < 100; ++i) {
                   DriveParams d;
                   d.Omega_p = units::mhz_to_rad_per_us(1.0);
                   d.Omega_c = units::mhz_to_rad_per_us(5.0 + 4.0 * u(rng));
                   d.Delta2 = units::mhz_to_rad_per_us(20.0 * u(rng));
                   d.Delta_c = units::mhz_to_rad_per_us(u(rng));
                   const auto s = response::second_order_onebody(d, AtomParams::rubidium_defaults());
                   worst = std::max(worst, std::abs(s.rho11 + s.rho22 + s.rho33));
                 }
                 return Outcome{worst, worst < 1e-12};
               }});

  c.push_back({"solver_residuals", 1e-10, [] {
                 const auto atom = AtomParams::rubidium_defaults();
                 double worst = 0.0;
                 for (int i = 0; i <= 20; ++i) {
                   const auto d = drive_at(-10.0 + i);
                   const response::PerturbativeSolver s(d, atom);
                   worst = std::max(worst, s.second().residual);
                   const double rb = response::blockade_radius(d.Omega_c, atom.gamma21, atom.C6);
                   for (double f : {1.0, 1.5, 2.0, 2.5, 3.0}) worst = std::max(worst, s.twobody3(f * rb).residual);
                 }
                 return Outcome{worst, worst < 1e-10};
               }});

  c.push_back({"linear_passivity", -1e-12, [] {
                 double lo = 1.0;
                 for (int i = 0; i <= 400; ++i) {
                   const auto chi = response::susceptibility(drive_at(-20.0 + 0.1 * i), AtomParams::rubidium_defaults());
                   lo = std::min(lo, chi.chi1.imag());
                 }
                 return Outcome{lo, lo >= -1e-12};
               }});

  c.push_back({"density_squared_scaling", 1e-10, [] {
                 auto a = AtomParams::rubidium_defaults();
                 const auto c1 = response::susceptibility(drive_at(0.0), a);
                 a.Na *= 2.0;
                 const auto c2 = response::susceptibility(drive_at(0.0), a);
                 const cplx ratio = c2.chi3_nonlocal_contrib / c1.chi3_nonlocal_contrib;
                 const double dev = std::abs(ratio - 4.0) / 4.0;
                 std::ostringstream os;
                 os << "ratio " << ratio.real();
                 return Outcome{dev, dev < 1e-10, os.str()};
               }});

  c.push_back({"blockade_far_field_limit", 1e-6, [] {
                 const auto atom = AtomParams::rubidium_defaults();
                 const auto d = drive_at(0.0);
                 const response::PerturbativeSolver s(d, atom);
                 const double rb = response::blockade_radius(d.Omega_c, atom.gamma21, atom.C6);
                 const double dev = rel(s.twobody3(100.0 * rb).rr33_31(), s.twobody3_for_potential(0.0).rr33_31());
                 return Outcome{dev, dev < 1e-6};
               }});

  c.push_back({"twobody_factorization", 1e-6, [] {
                 const auto atom = AtomParams::rubidium_defaults();
                 const auto d = drive_at(0.4);
                 const response::PerturbativeSolver s(d, atom);
                 const double rb = response::blockade_radius(d.Omega_c, atom.gamma21, atom.C6);
                 const auto far = s.twobody2(100.0 * rb);
                 const cplx r21 = s.first().rho21, r31 = s.first().rho31;
                 const cplx r12 = std::conj(r21), r13 = std::conj(r31);
                 const cplx expect[8] = {r13 * r31, r12 * r31, r12 * r21, r13 * r21,
                                         r31 * r31, r21 * r31, r21 * r21, r31 * r21};
                 double worst = 0.0;
                 for (std::size_t i = 0; i < 8; ++i) worst = std::max(worst, rel(far.values[i], expect[i]));
                 return Outcome{worst, worst < 1e-6};
               }});

  c.push_back({"quadrature_nodes_32_to_64", 1e-8, [] {
                 const auto rep = oracle::quadrature_refine(drive_at(0.0), AtomParams::rubidium_defaults(), {32, 64}, 2);
                 return Outcome{rep.successive_rel_diff.at(0), rep.successive_rel_diff.at(0) < 1e-8};
               }});

  c.push_back({"quadrature_vs_trapezoid", 1e-6, [] {
                 double worst = 0.0;
                 for (int i = 0; i <= 20; ++i) {
                   const auto rep = oracle::quadrature_refine(drive_at(-10.0 + i), AtomParams::rubidium_defaults(), {64});
                   worst = std::max(worst, rep.default_vs_trapezoid);
                 }
                 return Outcome{worst, worst < 1e-6};
               }});

  c.push_back({"upper_limit_kernel_identity", 1e-8, [] {
                 const auto rep = oracle::quadrature_refine(drive_at(0.0), AtomParams::rubidium_defaults(), {64}, 2);
                 const double dev = std::abs(rep.kernel_extension_numeric - rep.kernel_extension_analytic);
                 std::ostringstream os;
                 os << "kernel ratio " << rep.kernel_extension_analytic << ", integral change 3Rb->5Rb "
                    << rep.upper_extension_rel_change;
                 return Outcome{dev, dev < 1e-8, os.str()};
               }});

  c.push_back({"airy_equivalence", 1e-12, [] {
                 std::mt19937_64 rng(2024);
                 std::uniform_real_distribution<double> u(0.0, 1.0);
                 const double k0 = kTwoPi / 0.78;
                 double worst = 0.0;
                 for (int i = 0; i < 100; ++i) {
                   const double n1 = 1.0 + u(rng), n3 = 1.0 + u(rng);
                   const cplx n2{0.8 + 1.5 * u(rng), 0.05 * u(rng)};
                   const double d = 200.0 * u(rng);
                   const double th = units::deg_to_rad(5.0 + 60.0 * u(rng));
                   const auto st = optics::LayerStack::trilayer(n1, n2, d, n3);
                   for (auto pol : {optics::Polarization::P, optics::Polarization::S}) {
                     const cplx r = optics::stack_fresnel(st, th, k0, pol).r;
                     const cplx ref = oracle::airy_trilayer_reflection(n1, n2, d, n3, th, k0, pol == optics::Polarization::P);
                     worst = std::max(worst, std::abs(r - ref));
                   }
                 }
                 return Outcome{worst, worst < 1e-12};
               }});

  c.push_back({"energy_conservation", 1e-10, [] {
                 std::mt19937_64 rng(99);
                 std::uniform_real_distribution<double> u(0.0, 1.0);
                 const double k0 = kTwoPi / 0.78;
                 double worst = 0.0;
                 for (int i = 0; i < 100; ++i) {
                   optics::LayerStack st;
                   st.n_in = 1.0 + u(rng);
                   st.n_out = 1.0 + u(rng);
                   const int nl = 1 + static_cast<int>(4 * u(rng));
                   for (int l = 0; l < nl; ++l) st.layers.push_back({{1.0 + 2.0 * u(rng), 0.0}, 5.0 * u(rng)});
                   const double th = std::asin(0.95 * std::min(1.0, st.n_out / st.n_in) * u(rng));
                   for (auto pol : {optics::Polarization::P, optics::Polarization::S}) {
                     const auto cf = optics::stack_fresnel(st, th, k0, pol);
                     worst = std::max(worst, std::abs(optics::energy_balance(st, th, pol, cf) - 1.0));
                   }
                 }
                 return Outcome{worst, worst < 1e-10};
               }});

  c.push_back({"unimodularity", 1e-12, [] {
                 const auto chi = response::susceptibility(drive_at(0.0), AtomParams::rubidium_defaults());
                 const optics::Layer slab{pipeline::slab_index(chi.total), 100.0};
                 double worst = 0.0;
                 // Below the critical angle; evanescent slabs overflow the determinant.
                 for (int i = 0; i <= 40; ++i) {
                   const double th = units::deg_to_rad(20.0 + 0.5 * i);
                   for (auto pol : {optics::Polarization::P, optics::Polarization::S}) {
                     const auto m = optics::layer_matrix(slab, th, kTwoPi / 0.78, 1.49, pol);
                     worst = std::max(worst, std::abs(m.determinant() - 1.0));
                   }
                 }
                 return Outcome{worst, worst < 1e-12};
               }});

  c.push_back({"normal_incidence_degeneracy", 1e-12, [] {
                 const auto chi = response::susceptibility(drive_at(0.0), AtomParams::rubidium_defaults());
                 const auto f = pipeline::fresnel_for_chi(pipeline::Geometry{}, chi.total, 0.0, 0.78);
                 const double d = std::abs(std::abs(f.rp) - std::abs(f.rs));
                 return Outcome{d, d < 1e-12};
               }});

  c.push_back({"brewster_angle_canonical_deg", 0.15, [] {
                 const auto chi = response::susceptibility(drive_at(0.0), AtomParams::rubidium_defaults());
                 const double tb = units::rad_to_deg(
                     optics::brewster_angle(pipeline::make_stack(pipeline::Geometry{}, chi.total), kTwoPi / 0.78));
                 std::ostringstream os;
                 os << "theta_B = " << tb << " deg";
                 return Outcome{std::abs(tb - 33.8), std::abs(tb - 33.8) <= 0.15, os.str()};
               }});

  c.push_back({"mirror_antisymmetry", 1e-9, [] {
                 const auto chi = response::susceptibility(drive_at(0.0), AtomParams::rubidium_defaults());
                 double worst = 0.0;
                 for (int i = 0; i <= 70; ++i) {
                   const auto r = pipeline::pshe_shifts(pipeline::Geometry{}, beam_at(33.5 + 0.01 * i), chi);
                   worst = std::max(worst, std::abs(r.shift.delta_plus + r.shift.delta_minus));
                 }
                 return Outcome{worst, worst < 1e-9};
               }});

  c.push_back({"shift_bound_over_w0", 0.525, [] {
                 const auto chi = response::susceptibility(drive_at(0.0), AtomParams::rubidium_defaults());
                 double worst = 0.0;
                 for (int i = 0; i <= 140; ++i) {
                   const auto r = pipeline::pshe_shifts(pipeline::Geometry{}, beam_at(33.5 + 0.005 * i), chi);
                   worst = std::max({worst, std::abs(r.shift.delta_plus) / 50.0, std::abs(r.shift.delta_minus) / 50.0});
                 }
                 return Outcome{worst, worst <= 0.525};
               }});

  c.push_back({"zero_mixing_null", 0.0, [] {
                 pipeline::Options o;
                 o.mixing.cross_sign = 0.0;
                 const auto chi = response::susceptibility(drive_at(0.0), AtomParams::rubidium_defaults());
                 double worst = 0.0;
                 for (double th : {20.0, 33.8, 33.87, 34.0, 45.0}) {
                   const auto r = pipeline::pshe_shifts(pipeline::Geometry{}, beam_at(th), chi, o);
                   worst = std::max({worst, std::abs(r.shift.delta_plus), std::abs(r.shift.delta_minus)});
                 }
                 return Outcome{worst, worst == 0.0};
               }});

  c.push_back({"transform_vs_analytic_shift", 2e-2, [] {
                 std::mt19937_64 rng(5);
                 std::uniform_real_distribution<double> u(-1.0, 1.0);
                 double worst = 0.0;
                 int used = 0;
                 auto compare = [&](cplx rp, cplx rs, const beam::BeamSpec& b) {
                   if (std::abs(rp) <= 0.05) return;
                   const auto fft = beam::compute_shifts(b, rp, rs);
                   const auto ana = beam::analytic_gaussian_shift(rp, rs, b.theta_i, b);
                   const double scale = std::max(std::abs(ana.delta_plus), 1e-12);
                   worst = std::max(worst, std::abs(fft.delta_plus - ana.delta_plus) / scale);
                   ++used;
                 };
                 for (int i = 0; i < 100; ++i) {
                   const auto b = beam_at(20.0 + 20.0 * (u(rng) + 1.0));
                   compare({0.3 * u(rng), 0.3 * u(rng)}, {-0.2 + 0.1 * u(rng), 0.1 * u(rng)}, b);
                 }
                 for (double th = 20.0; th <= 50.0; th += 1.0) {
                   const auto f = canonical_fresnel(0.0, th);
                   compare(f.rp, f.rs, beam_at(th));
                 }
                 return Outcome{worst, worst < 2e-2 && used > 0, std::to_string(used) + " points"};
               }});

  c.push_back({"grid_independence", 1e-3, [] {
                 const auto f = canonical_fresnel(0.0, 33.87);
                 auto b = beam_at(33.87);
                 const auto r1 = beam::compute_shifts(b, f.rp, f.rs);
                 b.grid_n *= 2;
                 const auto r2 = beam::compute_shifts(b, f.rp, f.rs);
                 const double d = std::abs(r2.delta_plus - r1.delta_plus) / std::abs(r1.delta_plus);
                 return Outcome{d, d < 1e-3};
               }});

  // Sign convention pin: sigma+ displaced towards negative y at +3.5 MHz.
  c.push_back({"orientation_sigma_plus_negative_at_3.5MHz", 0.0, [] {
                 const auto f = canonical_fresnel(3.5, 33.87);
                 const auto r = beam::compute_shifts(beam_at(33.87), f.rp, f.rs);
                 return Outcome{r.delta_plus, r.delta_plus < 0.0, "delta+ in um"};
               }});

  c.push_back({"mutation_flipped_cross_term_detected", 0.0, [] {
                 const auto f = canonical_fresnel(3.5, 33.87);
                 beam::MixingOptions flip;
                 flip.cross_sign = -1.0;
                 const auto r = beam::compute_shifts(beam_at(33.87), f.rp, f.rs, flip);
                 const bool antisym = std::abs(r.delta_plus + r.delta_minus) < 1e-9;
                 const bool orientation_fails = !(r.delta_plus < 0.0);
                 return Outcome{r.delta_plus, antisym && orientation_fails,
                                "antisymmetry kept, orientation check must fail under the mutation"};
               }});

  c.push_back({"config_defaults_round_trip", 0.0, [] {
                 const auto empty = config::parse_config("");
                 const std::string canon = config::serialize(config::RunConfig::defaults());
                 const bool same = config::serialize(empty) == canon &&
                                   config::serialize(config::parse_config(canon)) == canon;
                 return Outcome{same ? 0.0 : 1.0, same};
               }});

  return c;
}

}  // namespace

bool Report::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

nlohmann::json Report::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json j;
    j["check_name"] = c.check_name;
    j["status"] = c.passed ? "pass" : "fail";
    j["measured"] = std::isfinite(c.measured) ? nlohmann::json(c.measured) : nlohmann::json(nullptr);
    j["threshold"] = c.threshold;
    j["runtime_ms"] = c.runtime_ms;
    if (!c.detail.empty()) j["detail"] = c.detail;
    arr.push_back(std::move(j));
  }
  return {{"checks", arr}, {"passed", all_passed()}};
}

std::string Report::summary() const {
  std::ostringstream os;
  int failed = 0;
  for (const auto& c : checks) {
    os << (c.passed ? "PASS " : "FAIL ") << c.check_name << "  measured=" << c.measured
       << "  threshold=" << c.threshold << "  (" << static_cast<long>(c.runtime_ms) << " ms)";
    if (!c.detail.empty()) os << "  " << c.detail;
    os << "\n";
    failed += c.passed ? 0 : 1;
  }
  os << (checks.size() - static_cast<std::size_t>(failed)) << "/" << checks.size() << " checks passed\n";
  return os.str();
}

Report verify_suite(int threads) {
  const auto checks = build_checks();
  Report rep;
  rep.checks.resize(checks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < checks.size(); i = next++) {
      CheckResult& r = rep.checks[i];
      r.check_name = checks[i].name;
      r.threshold = checks[i].threshold;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const Outcome o = checks[i].run();
        r.measured = o.measured;
        r.passed = o.passed;
        r.detail = o.detail;
      } catch (const std::exception& e) {
        r.passed = false;
        r.measured = std::nan("");
        r.detail = std::string("exception: ") + e.what();
      }
      r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(checks.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rep;
}

}  // namespace rydpshe::verify
