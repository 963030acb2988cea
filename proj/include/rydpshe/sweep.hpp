#pragma once

// Grid evaluation of the physics chain and plot-ready output.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rydpshe/config.hpp"

namespace rydpshe::sweep {

inline constexpr const char* kVersion = "0.1.0";

enum class Stage { Chi, Fresnel, Shift, Profile };

std::string stage_name(Stage s);

struct SweepResult {
  Stage stage = Stage::Chi;
  std::vector<std::string> columns;
  std::vector<std::string> units;  // one per column
  std::vector<std::vector<double>> rows;
  std::vector<std::string> errors;  // per row; empty when the row is valid
  std::vector<std::pair<std::string, double>> metadata;
  std::string version = kVersion;
  std::uint64_t config_hash = 0;
  double wall_time_s = 0.0;  // reported on stderr only, never emitted
};

/// Evaluates `stage` on the config's x (and optional y) axis; without an axis
/// a single row at the configured operating point is produced. Row index is
/// ix * ny + iy. Failures at single points are recorded in `errors` and the
/// row is filled with NaN.
SweepResult run_sweep(const config::RunConfig& cfg, Stage stage, int threads = 1);

/// Transverse intensity of the reflected spin components at the configured
/// operating point, from a full 2-D transform (grid 512 x 512, span 32/w0),
/// cropped to |x|, |y| <= 3 w0. Peak positions from a fine 1-D profile are
/// attached as metadata.
SweepResult run_profile(const config::RunConfig& cfg);

void emit(const SweepResult& r, config::Format format, int precision, std::ostream& os);
/// Writes to `path`, or standard output when empty. Throws IoError.
void emit_to_path(const SweepResult& r, config::Format format, int precision, const std::string& path);

/// Reads back the JSON form written by emit.
SweepResult parse_json(const std::string& text);

}  // namespace rydpshe::sweep
