#include "rydpshe/beam_shift.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include <fftw3.h>

#include "rydpshe/errors.hpp"

namespace rydpshe::beam {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (data == nullptr) throw Error("fftw_malloc failed");
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;

  fftw_complex* data;
};

class Plan {
 public:
  Plan(int n, fftw_complex* buf) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (plan_ == nullptr) throw Error("FFTW plan creation failed");
  }
  Plan(int n0, int n1, fftw_complex* buf) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_dft_2d(n0, n1, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (plan_ == nullptr) throw Error("FFTW plan creation failed");
  }
  ~Plan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  void run() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_ = nullptr;
};

// Centred grids: k_j = (j - N/2) dk and y_m = (m - N/2) dy with dk dy = 2 pi / N.
// Then exp(i k_j y_m) = (-1)^j (-1)^m exp(2 pi i j m / N) for N divisible by 4,
// so the centred inverse transform is a backward DFT between two sign flips.
std::vector<cplx> centred_inverse(const std::vector<cplx>& spec, double dk) {
  const std::size_t n = spec.size();
  FftwBuffer buf(n);
  Plan plan(static_cast<int>(n), buf.data);
  for (std::size_t j = 0; j < n; ++j) {
    const cplx v = (j % 2 == 0) ? spec[j] : -spec[j];
    buf.data[j][0] = v.real();
    buf.data[j][1] = v.imag();
  }
  plan.run();
  std::vector<cplx> out(n);
  const double scale = dk / kTwoPi;
  for (std::size_t m = 0; m < n; ++m) {
    const cplx v{buf.data[m][0], buf.data[m][1]};
    out[m] = (m % 2 == 0 ? scale : -scale) * v;
  }
  return out;
}

cplx cross_factor(const BeamSpec& beam, cplx rp, cplx rs) {
  return (rp + rs) / std::tan(beam.theta_i) / beam.k0();
}

double peak_location(const std::vector<double>& y, const std::vector<double>& intensity) {
  const auto it = std::max_element(intensity.begin(), intensity.end());
  const std::size_t i = static_cast<std::size_t>(it - intensity.begin());
  if (i == 0 || i + 1 == intensity.size()) return y[i];
  const double a = intensity[i - 1], b = intensity[i], c = intensity[i + 1];
  const double den = a - 2.0 * b + c;
  if (den == 0.0) return y[i];
  const double off = 0.5 * (a - c) / den;
  return y[i] + off * (y[i + 1] - y[i]);
}

}  // namespace

void BeamSpec::validate() const {
  if (!(w0 > 0.0)) throw DomainError("beam waist must be positive");
  if (!(lambda_p > 0.0)) throw DomainError("wavelength must be positive");
  if (grid_n < 256 || (grid_n & (grid_n - 1)) != 0) {
    throw DomainError("grid_n must be a power of two >= 256");
  }
  if (!(grid_span >= 6.0)) throw DomainError("grid_span must be >= 6");
  const double lo = units::deg_to_rad(5.0);
  const double hi = units::deg_to_rad(85.0);
  if (!(theta_i >= lo - 1e-12 && theta_i <= hi + 1e-12)) {
    throw DomainError("incidence angle outside [5, 85] deg");
  }
}

Spectrum incident_spectrum(const BeamSpec& beam) {
  beam.validate();
  Spectrum s;
  const std::size_t n = static_cast<std::size_t>(beam.grid_n);
  s.dk = beam.dk();
  s.k.resize(n);
  s.values.resize(n);
  const double amp = beam.w0 * std::sqrt(kPi);
  for (std::size_t j = 0; j < n; ++j) {
    const double k = (static_cast<double>(j) - static_cast<double>(n / 2)) * s.dk;
    s.k[j] = k;
    s.values[j] = amp * std::exp(-k * k * beam.w0 * beam.w0 / 4.0);
  }
  return s;
}

SpinSpectra reflected_spin_spectra(const BeamSpec& beam, cplx rp, cplx rs, const MixingOptions& mix) {
  const auto inc = incident_spectrum(beam);
  const cplx a = mix.cross_sign * cross_factor(beam, rp, rs);
  const cplx i{0.0, 1.0};
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  SpinSpectra out;
  out.k = inc.k;
  out.dk = inc.dk;
  out.plus.resize(inc.k.size());
  out.minus.resize(inc.k.size());
  for (std::size_t j = 0; j < inc.k.size(); ++j) {
    const cplx eh = rp * inc.values[j];
    const cplx ev = -inc.k[j] * a * inc.values[j];
    out.plus[j] = (eh - i * ev) * inv_sqrt2;
    out.minus[j] = (eh + i * ev) * inv_sqrt2;
  }
  return out;
}

SpinFields reflected_field(const SpinSpectra& spectra) {
  const std::size_t n = spectra.k.size();
  if (n < 4 || n % 4 != 0) throw DomainError("spectral grid size must be a multiple of 4");
  SpinFields f;
  const double dy = kTwoPi / (static_cast<double>(n) * spectra.dk);
  f.y_samples.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    f.y_samples[m] = (static_cast<double>(m) - static_cast<double>(n / 2)) * dy;
  }
  f.e_plus = centred_inverse(spectra.plus, spectra.dk);
  f.e_minus = centred_inverse(spectra.minus, spectra.dk);

  const std::size_t edge = std::max<std::size_t>(1, n / 20);
  auto check = [&](const std::vector<cplx>& spec, const std::vector<cplx>& field, const char* name) {
    double ps = 0.0, py = 0.0, outer = 0.0;
    for (const auto& v : spec) ps += std::norm(v);
    ps *= spectra.dk / kTwoPi;
    for (std::size_t m = 0; m < n; ++m) {
      const double p = std::norm(field[m]);
      py += p;
      if (m < edge || m >= n - edge) outer += p;
    }
    py *= dy;
    outer *= dy;
    if (py > 0.0 && outer > 1e-6 * py) {
      std::ostringstream os;
      os << name << " field leaks into the window edge (fraction " << outer / py
         << "); increase grid_n or decrease grid_span";
      throw WindowError(os.str());
    }
    const double err = std::max(ps, py) > 0.0 ? std::abs(ps - py) / std::max(ps, py) : 0.0;
    f.parseval_error = std::max(f.parseval_error, err);
  };
  check(spectra.plus, f.e_plus, "sigma+");
  check(spectra.minus, f.e_minus, "sigma-");
  if (f.parseval_error > 1e-10) {
    throw PropagationError("Parseval mismatch after inverse transform");
  }
  return f;
}

double centroid(const std::vector<double>& y, const std::vector<cplx>& field) {
  if (y.size() != field.size()) throw DomainError("centroid: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = std::norm(field[i]);
    num += y[i] * p;
    den += p;
  }
  if (!(den > 0.0)) throw DomainError("centroid undefined for zero power");
  return num / den;
}

ShiftResult analytic_gaussian_shift(cplx rp, cplx rs, double theta_i, const BeamSpec& beam) {
  BeamSpec b = beam;
  b.theta_i = theta_i;
  b.validate();
  const cplx a = cross_factor(b, rp, rs);
  const double w = b.w0;
  const double den = std::norm(rp) + std::norm(a) / (w * w);
  if (!(den > 0.0)) throw DomainError("analytic shift undefined: no reflected power");
  ShiftResult r;
  const double cross = (std::conj(rp) * a).real();
  r.delta_plus = cross == 0.0 ? 0.0 : -cross / den;
  r.delta_minus = -r.delta_plus;
  r.power_plus = r.power_minus = 0.5 * den;
  return r;
}

ShiftResult compute_shifts(const BeamSpec& beam, cplx rp, cplx rs, const MixingOptions& mix) {
  const auto spectra = reflected_spin_spectra(beam, rp, rs, mix);
  const auto f = reflected_field(spectra);
  ShiftResult r;
  // Without the cross term both components are r_p G / sqrt 2, even in y.
  if (mix.cross_sign * (rp + rs) != cplx{0.0, 0.0}) {
    r.delta_plus = centroid(f.y_samples, f.e_plus);
    r.delta_minus = centroid(f.y_samples, f.e_minus);
  }

  // incident power of exp(-y^2/w0^2) is w0 sqrt(pi/2)
  const double inc = beam.w0 * std::sqrt(kPi / 2.0);
  const double dy = f.y_samples[1] - f.y_samples[0];
  double pp = 0.0, pm = 0.0;
  for (std::size_t i = 0; i < f.y_samples.size(); ++i) {
    pp += std::norm(f.e_plus[i]);
    pm += std::norm(f.e_minus[i]);
  }
  r.power_plus = pp * dy / inc;
  r.power_minus = pm * dy / inc;
  return r;
}

ProfilePeaks profile_peaks(const SpinFields& fields) {
  std::vector<double> ip(fields.e_plus.size()), im(fields.e_minus.size());
  for (std::size_t i = 0; i < ip.size(); ++i) {
    ip[i] = std::norm(fields.e_plus[i]);
    im[i] = std::norm(fields.e_minus[i]);
  }
  return {peak_location(fields.y_samples, ip), peak_location(fields.y_samples, im)};
}

IntensityMap intensity_map_2d(const BeamSpec& beam, cplx rp, cplx rs, double crop,
                              const MixingOptions& mix) {
  beam.validate();
  if (!(crop > 0.0)) throw DomainError("crop half-width must be positive");
  const std::size_t n = static_cast<std::size_t>(beam.grid_n);
  const double dk = beam.dk();
  const double dy = kTwoPi / (static_cast<double>(n) * dk);
  const cplx a = mix.cross_sign * cross_factor(beam, rp, rs);
  const cplx i{0.0, 1.0};
  const double w2 = beam.w0 * beam.w0;
  const double amp = w2 * kPi;  // transform of exp(-(x^2 + y^2)/w0^2)
  const double scale = dk * dk / (kTwoPi * kTwoPi);

  auto transform = [&](double spin) {
    FftwBuffer buf(n * n);
    Plan plan(static_cast<int>(n), static_cast<int>(n), buf.data);
    for (std::size_t jx = 0; jx < n; ++jx) {
      const double kx = (static_cast<double>(jx) - static_cast<double>(n / 2)) * dk;
      for (std::size_t jy = 0; jy < n; ++jy) {
        const double ky = (static_cast<double>(jy) - static_cast<double>(n / 2)) * dk;
        const double g = amp * std::exp(-(kx * kx + ky * ky) * w2 / 4.0);
        const cplx eh = rp * g;
        const cplx ev = -ky * a * g;
        cplx v = (eh - spin * i * ev) / std::sqrt(2.0);
        if ((jx + jy) % 2 == 1) v = -v;
        buf.data[jx * n + jy][0] = v.real();
        buf.data[jx * n + jy][1] = v.imag();
      }
    }
    plan.run();
    std::vector<double> out(n * n);
    for (std::size_t k = 0; k < n * n; ++k) {
      out[k] = scale * scale * (buf.data[k][0] * buf.data[k][0] + buf.data[k][1] * buf.data[k][1]);
    }
    return out;  // sign flips (-1)^(mx+my) drop out of |.|^2
  };
  const auto full_plus = transform(1.0);
  const auto full_minus = transform(-1.0);

  IntensityMap map;
  std::vector<std::size_t> keep;
  for (std::size_t m = 0; m < n; ++m) {
    const double y = (static_cast<double>(m) - static_cast<double>(n / 2)) * dy;
    if (std::abs(y) <= crop) {
      keep.push_back(m);
      map.x.push_back(y);
    }
  }
  map.y = map.x;
  for (std::size_t mx : keep) {
    for (std::size_t my : keep) {
      map.plus.push_back(full_plus[mx * n + my]);
      map.minus.push_back(full_minus[mx * n + my]);
    }
  }

  // peak along the x = 0 line
  const std::size_t cx = n / 2;
  std::vector<double> line_p(n), line_m(n), ys(n);
  for (std::size_t my = 0; my < n; ++my) {
    ys[my] = (static_cast<double>(my) - static_cast<double>(n / 2)) * dy;
    line_p[my] = full_plus[cx * n + my];
    line_m[my] = full_minus[cx * n + my];
  }
  map.peak_plus_y = peak_location(ys, line_p);
  map.peak_minus_y = peak_location(ys, line_m);
  return map;
}

}  // namespace rydpshe::beam
