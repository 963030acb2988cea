#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace rydpshe::verify {

struct CheckResult {
  std::string check_name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  double runtime_ms = 0.0;
  std::string detail;
};

struct Report {
  std::vector<CheckResult> checks;

  bool all_passed() const;
  nlohmann::json to_json() const;
  std::string summary() const;
};

/// Runs the invariant and oracle checks on fixed seeds and the canonical
/// configuration. Failures are report content, never exceptions.
Report verify_suite(int threads = 1);

}  // namespace rydpshe::verify
