#pragma once

#include <complex>
#include <numbers>

namespace rydpshe {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// CODATA 2018, SI.
namespace si {
inline constexpr double kEpsilon0 = 8.8541878128e-12;  // F/m
inline constexpr double kHbar = 1.054571817e-34;       // J s
inline constexpr double kC = 299792458.0;              // m/s
}  // namespace si

// Internal unit system: angular frequencies in rad/us, lengths in um.
// Conversions below are the only place the 2*pi factor is applied.
namespace units {

/// Frequency quoted as f/2pi in MHz -> angular frequency in rad/us.
constexpr double mhz_to_rad_per_us(double f_mhz) { return kTwoPi * f_mhz; }
constexpr double rad_per_us_to_mhz(double w) { return w / kTwoPi; }

/// Number density mm^-3 -> um^-3.
constexpr double per_mm3_to_per_um3(double n) { return n * 1e-9; }
constexpr double per_um3_to_per_mm3(double n) { return n * 1e9; }

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace units

}  // namespace rydpshe
