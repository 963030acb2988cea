#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rydpshe/config.hpp"
#include "rydpshe/errors.hpp"
#include "rydpshe/sweep.hpp"

using namespace rydpshe;
using config::RunConfig;
using config::Variable;

TEST_CASE("empty config gives the defaults") {
  const auto c = config::parse_config("");
  CHECK(config::serialize(c) == config::serialize(RunConfig::defaults()));
  CHECK(c.theta_deg == 33.87);
  CHECK(c.atom_params().Na == doctest::Approx(0.04).epsilon(1e-15));
  CHECK(c.drive_params().Omega_c == doctest::Approx(units::mhz_to_rad_per_us(4.0)).epsilon(1e-15));
}

TEST_CASE("range violations report the offending line") {
  try {
    config::parse_config("# density\n[atom]\nNa = -1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("Na") != std::string::npos);
  }
  CHECK_THROWS_AS(config::parse_config("[atom]\nNa = 1\nNa = 2\n"), ParseError);
  CHECK_THROWS_AS(config::parse_config("[atoms]\n"), ParseError);
  CHECK_THROWS_AS(config::parse_config("[atom]\nfoo = 1\n"), ParseError);
  CHECK_THROWS_AS(config::parse_config("[drive]\nOmega_c = 4 furlongs\n"), ParseError);
  CHECK_THROWS_AS(config::parse_config("[drive]\nOmega_c = four\n"), ParseError);
  CHECK_THROWS_AS(config::parse_config("[sweep]\nx = Delta2\nx_min = 5\nx_max = -5\nx_steps = 1\n"), ParseError);
  CHECK_NOTHROW(config::parse_config("[sweep]\nx = Delta2\nx_min = 5\nx_max = -5\nx_steps = 3\n"));
}

TEST_CASE("frequency units are not confused") {
  const auto mhz = config::parse_config("[drive]\nOmega_c = 4 MHz\n");
  const auto rad = config::parse_config("[drive]\nOmega_c = 25.132741228718345 rad/us\n");
  const auto bare = config::parse_config("[drive]\nOmega_c = 4\n");
  CHECK(mhz.drive_params().Omega_c == doctest::Approx(rad.drive_params().Omega_c).epsilon(1e-14));
  CHECK(bare.drive_params().Omega_c == mhz.drive_params().Omega_c);
  const auto dens = config::parse_config("[atom]\nNa = 0.04 um^-3\n");
  CHECK(dens.Na_per_mm3 == doctest::Approx(4e7).epsilon(1e-14));
  const auto ang = config::parse_config("[beam]\ntheta_i = 0.5911430176504794 rad\n");
  CHECK(ang.theta_deg == doctest::Approx(33.87).epsilon(1e-14));
}

TEST_CASE("serialization round trip") {
  auto c = RunConfig::defaults();
  c.Delta2_MHz = 3.5;
  c.Na_per_mm3 = 2e7;
  c.x = config::Axis{Variable::ThetaI, 33.5, 34.2, 11};
  c.y = config::Axis{Variable::Delta2, -5.0, 5.0, 3};
  c.format = config::Format::Json;
  const std::string s = config::serialize(c);
  const auto back = config::parse_config(s);
  CHECK(config::serialize(back) == s);
  CHECK(config::config_hash(back) == config::config_hash(c));
  CHECK(config::config_hash(back) != config::config_hash(RunConfig::defaults()));
}

namespace {
RunConfig small_chi_scan() {
  auto c = RunConfig::defaults();
  c.x = config::Axis{Variable::Delta2, -2.0, 2.0, 5};
  return c;
}
}  // namespace

TEST_CASE("chi CSV layout") {
  const auto r = sweep::run_sweep(small_chi_scan(), sweep::Stage::Chi);
  std::ostringstream os;
  sweep::emit(r, config::Format::Csv, 12, os);
  std::istringstream in(os.str());
  std::string line, header;
  int data = 0;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) continue;
    if (header.empty()) {
      header = line;
      continue;
    }
    ++data;
  }
  CHECK(header ==
        "delta2_MHz, re_chi1, im_chi1, re_chi3_local, im_chi3_local, re_chi3_nonlocal, im_chi3_nonlocal");
  CHECK(data == 5);
  CHECK(os.str().rfind("# rydpshe ", 0) == 0);
}

TEST_CASE("JSON output round trip and determinism") {
  const auto cfg = small_chi_scan();
  const auto a = sweep::run_sweep(cfg, sweep::Stage::Chi, 1);
  const auto b = sweep::run_sweep(cfg, sweep::Stage::Chi, 3);
  std::ostringstream sa, sb;
  sweep::emit(a, config::Format::Json, 12, sa);
  sweep::emit(b, config::Format::Json, 12, sb);
  CHECK(sa.str() == sb.str());

  const auto back = sweep::parse_json(sa.str());
  CHECK(back.columns == a.columns);
  CHECK(back.config_hash == a.config_hash);
  REQUIRE(back.rows.size() == a.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    for (std::size_t j = 0; j < a.rows[i].size(); ++j) {
      CHECK(back.rows[i][j] == doctest::Approx(a.rows[i][j]).epsilon(1e-11));
    }
  }
}

TEST_CASE("degenerate two-dimensional sweep repeats one point") {
  auto c = RunConfig::defaults();
  c.x = config::Axis{Variable::ThetaI, 33.87, 33.87, 2};
  c.y = config::Axis{Variable::Delta2, 1.0, 1.0, 2};
  const auto r = sweep::run_sweep(c, sweep::Stage::Shift, 2);
  REQUIRE(r.rows.size() == 4);
  for (const auto& row : r.rows) CHECK(row == r.rows.front());
  CHECK(std::isfinite(r.rows.front()[2]));
}

TEST_CASE("single point without an axis") {
  const auto r = sweep::run_sweep(RunConfig::defaults(), sweep::Stage::Fresnel);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.columns.front() == "re_rp");
}

TEST_CASE("unwritable output and missing config are IO errors") {
  const auto r = sweep::run_sweep(RunConfig::defaults(), sweep::Stage::Chi);
  CHECK_THROWS_AS(sweep::emit_to_path(r, config::Format::Csv, 12, "/nonexistent-dir/out.csv"), IoError);
  CHECK_THROWS_AS(config::load_config("/nonexistent-dir/run.cfg"), IoError);

  const auto path = std::filesystem::temp_directory_path() / "rydpshe_test_out.json";
  sweep::emit_to_path(r, config::Format::Json, 12, path.string());
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(sweep::parse_json(ss.str()).rows.size() == 1);
  std::filesystem::remove(path);
}
