#pragma once

// Sectioned key-value run configuration.
//
//   [atom]     Gamma21 Gamma32 gamma21 gamma32 gamma31 C6 Na lambda_p
//   [drive]    Omega_p Omega_c Delta2 Delta_c
//   [geometry] n1 d2 n3
//   [beam]     w0 theta_i grid_n grid_span method
//   [sweep]    x x_min x_max x_steps y y_min y_max y_steps nonlocal quad_nodes
//   [output]   path format precision
//
// Values may carry a unit after the number. Bare numbers are read as MHz
// (frequencies quoted as f/2pi), um, mm^-3, deg, and MHz um^6 for C6. The
// struct stores these user-facing units; the *_params() accessors convert to
// the internal rad/us and um^-3 system.

#include <cstdint>
#include <optional>
#include <string>

#include "rydpshe/beam_shift.hpp"
#include "rydpshe/pipeline.hpp"
#include "rydpshe/quantum_response.hpp"

namespace rydpshe::config {

enum class Format { Csv, Json };

enum class Variable { Delta2, ThetaI, Na, OmegaC, OmegaP, D2 };

std::optional<Variable> variable_from_name(const std::string& name);
std::string variable_name(Variable v);
/// Column label including the unit, e.g. "delta2_MHz".
std::string variable_column(Variable v);
/// True when changing the variable changes the susceptibility.
bool affects_susceptibility(Variable v);

struct Axis {
  Variable variable = Variable::Delta2;
  double min = 0.0;  // user-facing units
  double max = 0.0;
  int steps = 2;

  double value(int i) const;
};

struct RunConfig {
  // [atom]
  double Gamma21_MHz = 6.0;
  double Gamma32_MHz = 3e-3;
  std::optional<double> gamma21_MHz, gamma32_MHz, gamma31_MHz;
  double C6_MHz_um6 = 1.4e5;
  double Na_per_mm3 = 4e7;
  double lambda_um = 0.78;
  // [drive]
  double Omega_p_MHz = 0.75;
  double Omega_c_MHz = 4.0;
  double Delta2_MHz = 0.0;
  double Delta_c_MHz = -0.1;
  // [geometry]
  double n1 = 1.49;
  double d2_um = 100.0;
  double n3 = 1.49;
  // [beam]
  double w0_um = 50.0;
  double theta_deg = 33.87;
  int grid_n = 2048;
  double grid_span = 8.0;
  pipeline::ShiftMethod method = pipeline::ShiftMethod::Transform;
  // [sweep]
  std::optional<Axis> x, y;
  bool nonlocal = true;
  int quad_nodes = 64;
  // [output]
  std::string path;  // empty: standard output
  Format format = Format::Csv;
  int precision = 12;

  static RunConfig defaults() { return {}; }

  response::AtomParams atom_params() const;
  response::DriveParams drive_params() const;
  pipeline::Geometry geometry() const;
  beam::BeamSpec beam_spec() const;
  pipeline::Options pipeline_options() const;

  /// Copy with one sweep variable set (user-facing units).
  RunConfig with(Variable v, double value) const;

  /// Throws DomainError naming the offending key.
  void validate() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize(c)) reproduces c exactly.
std::string serialize(const RunConfig& c);

/// FNV-1a over the canonical text.
std::uint64_t config_hash(const RunConfig& c);

}  // namespace rydpshe::config
