// rydpshe: susceptibility, Fresnel and spin-shift sweeps from the command line.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rydpshe/config.hpp"
#include "rydpshe/errors.hpp"
#include "rydpshe/sweep.hpp"
#include "rydpshe/verify.hpp"

namespace {

using rydpshe::config::Axis;
using rydpshe::config::RunConfig;
using rydpshe::config::Variable;

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kNumerical = 3, kIo = 4 };

struct Common {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::string> format;
  int threads = 1;
  std::optional<double> delta2_min, delta2_max, theta_min, theta_max;
  std::optional<int> delta2_steps, theta_steps;
  std::optional<double> delta2, theta;
  std::optional<double> density, omega_c, omega_p, d2, w0;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "Run configuration file");
  app->add_option("--out", c.out, "Output path ('-' for standard output)");
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  app->add_option("--delta2-min", c.delta2_min, "Probe detuning sweep start [MHz]");
  app->add_option("--delta2-max", c.delta2_max, "Probe detuning sweep end [MHz]");
  app->add_option("--delta2-steps", c.delta2_steps, "Probe detuning sweep points")->check(CLI::Range(2, 1000000));
  app->add_option("--theta-min", c.theta_min, "Incidence angle sweep start [deg]");
  app->add_option("--theta-max", c.theta_max, "Incidence angle sweep end [deg]");
  app->add_option("--theta-steps", c.theta_steps, "Incidence angle sweep points")->check(CLI::Range(2, 1000000));
  app->add_option("--delta2", c.delta2, "Probe detuning at the operating point [MHz]");
  app->add_option("--theta", c.theta, "Incidence angle at the operating point [deg]");
  app->add_option("--density", c.density, "Atomic density [mm^-3]");
  app->add_option("--omega-c", c.omega_c, "Coupling Rabi frequency [MHz]");
  app->add_option("--omega-p", c.omega_p, "Probe Rabi frequency [MHz]");
  app->add_option("--d2", c.d2, "Vapour layer thickness [um]");
  app->add_option("--w0", c.w0, "Beam waist [um]");
}

struct AxisDefault {
  Variable variable;
  double min, max;
  int steps;
};

// Resolves an axis: flags first, then a config axis on the same variable, then the default.
Axis resolve_axis(const RunConfig& cfg, const Common& c, const AxisDefault& d) {
  Axis a{d.variable, d.min, d.max, d.steps};
  for (const auto& ca : {cfg.x, cfg.y}) {
    if (ca && ca->variable == d.variable) a = *ca;
  }
  const bool det = d.variable == Variable::Delta2;
  if (const auto& v = det ? c.delta2_min : c.theta_min) a.min = *v;
  if (const auto& v = det ? c.delta2_max : c.theta_max) a.max = *v;
  if (const auto& v = det ? c.delta2_steps : c.theta_steps) a.steps = *v;
  return a;
}

RunConfig load(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig::defaults() : rydpshe::config::load_config(c.config_path);
  if (c.out) cfg.path = *c.out;
  if (c.format) cfg.format = *c.format == "json" ? rydpshe::config::Format::Json : rydpshe::config::Format::Csv;
  if (c.delta2) cfg.Delta2_MHz = *c.delta2;
  if (c.theta) cfg.theta_deg = *c.theta;
  if (c.density) cfg.Na_per_mm3 = *c.density;
  if (c.omega_c) cfg.Omega_c_MHz = *c.omega_c;
  if (c.omega_p) cfg.Omega_p_MHz = *c.omega_p;
  if (c.d2) cfg.d2_um = *c.d2;
  if (c.w0) cfg.w0_um = *c.w0;
  return cfg;
}

int finish(const rydpshe::sweep::SweepResult& r, const RunConfig& cfg) {
  rydpshe::sweep::emit_to_path(r, cfg.format, cfg.precision, cfg.path);
  std::size_t failed = 0;
  for (const auto& e : r.errors) failed += e.empty() ? 0 : 1;
  std::fprintf(stderr, "%s: %zu rows in %.3f s\n", rydpshe::sweep::stage_name(r.stage).c_str(), r.rows.size(),
               r.wall_time_s);
  if (failed) {
    std::fprintf(stderr, "%zu rows failed\n", failed);
    return kNumerical;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rydberg EIT trilayer: susceptibility, Fresnel coefficients and photonic spin Hall shifts"};
  app.require_subcommand(1);

  Common common;
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {{"chi", "Susceptibility versus probe detuning"},
                      {"fresnel", "Reflection and transmission coefficients versus incidence angle"},
                      {"shift-angle", "Spin-dependent shifts versus incidence angle"},
                      {"shift-detuning", "Spin-dependent shifts versus probe detuning"},
                      {"map", "Spin shift over incidence angle and probe detuning"},
                      {"profile", "Transverse intensity of the reflected spin components"},
                      {"verify", "Run the invariant and oracle checks"},
                      {"defaults", "Print the default configuration"}};
  std::vector<CLI::App*> cmds;
  for (const auto& s : subs) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    if (std::string(s.name) != "defaults") add_common(cmd, common);
    cmds.push_back(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "defaults") {
      std::cout << rydpshe::config::serialize(RunConfig::defaults());
      return kOk;
    }
    if (name == "verify") {
      const auto t0 = std::chrono::steady_clock::now();
      const auto rep = rydpshe::verify::verify_suite(common.threads);
      const bool json = common.format && *common.format == "json";
      const std::string text = json ? rep.to_json().dump(1) + "\n" : rep.summary();
      if (!common.out || *common.out == "-") {
        std::cout << text;
      } else {
        std::FILE* f = std::fopen(common.out->c_str(), "w");
        if (!f || std::fputs(text.c_str(), f) < 0 || std::fclose(f) != 0)
          throw rydpshe::IoError("cannot write '" + *common.out + "'");
      }
      std::fprintf(stderr, "verify: %.3f s\n",
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      return rep.all_passed() ? kOk : kNumerical;
    }

    RunConfig cfg = load(common);
    using rydpshe::sweep::Stage;
    if (name == "profile") {
      cfg.x.reset();
      cfg.y.reset();
      return finish(rydpshe::sweep::run_profile(cfg), cfg);
    }
    Stage stage = Stage::Shift;
    if (name == "chi") {
      cfg.x = resolve_axis(cfg, common, {Variable::Delta2, -10.0, 10.0, 201});
      cfg.y.reset();
      stage = Stage::Chi;
    } else if (name == "fresnel") {
      cfg.x = resolve_axis(cfg, common, {Variable::ThetaI, 20.0, 50.0, 301});
      cfg.y.reset();
      stage = Stage::Fresnel;
    } else if (name == "shift-angle") {
      cfg.x = resolve_axis(cfg, common, {Variable::ThetaI, 33.5, 34.2, 500});
      cfg.y.reset();
    } else if (name == "shift-detuning") {
      cfg.x = resolve_axis(cfg, common, {Variable::Delta2, -5.0, 5.0, 201});
      cfg.y.reset();
    } else {
      const Axis x = resolve_axis(cfg, common, {Variable::ThetaI, 33.5, 34.2, 141});
      const Axis y = resolve_axis(cfg, common, {Variable::Delta2, -5.0, 5.0, 101});
      cfg.x = x;
      cfg.y = y;
    }
    return finish(rydpshe::sweep::run_sweep(cfg, stage, common.threads), cfg);
  } catch (const rydpshe::ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const rydpshe::DomainError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const rydpshe::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kIo;
  } catch (const rydpshe::Error& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumerical;
  }
}
