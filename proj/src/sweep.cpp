#include "rydpshe/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rydpshe/errors.hpp"

namespace rydpshe::sweep {

namespace {

using config::RunConfig;
using config::Variable;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename F>
void parallel_for(std::size_t n, int threads, F&& fn) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string variable_unit(Variable v) {
  switch (v) {
    case Variable::Delta2:
    case Variable::OmegaC:
    case Variable::OmegaP: return "MHz";
    case Variable::ThetaI: return "deg";
    case Variable::Na: return "mm^-3";
    case Variable::D2: return "um";
  }
  return "";
}

struct StageColumns {
  std::vector<std::string> names;
  std::vector<std::string> units;
};

StageColumns stage_columns(Stage s) {
  switch (s) {
    case Stage::Chi:
      return {{"re_chi1", "im_chi1", "re_chi3_local", "im_chi3_local", "re_chi3_nonlocal", "im_chi3_nonlocal"},
              std::vector<std::string>(6, "1")};
    case Stage::Fresnel:
      return {{"re_rp", "im_rp", "re_rs", "im_rs", "abs_rp", "abs_rs", "re_tp", "im_tp", "re_ts", "im_ts"},
              std::vector<std::string>(10, "1")};
    case Stage::Shift:
      return {{"delta_plus_um", "delta_minus_um", "power_plus", "power_minus", "abs_rp", "abs_rs"},
              {"um", "um", "1", "1", "1", "1"}};
    case Stage::Profile:
      return {{"intensity_plus", "intensity_minus"}, {"1", "1"}};
  }
  return {};
}

struct ChiEntry {
  std::optional<response::SusceptibilityBreakdown> chi;
  std::string error;
};

std::string format_double(double v, int precision) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

double rounded(double v, int precision) {
  if (!std::isfinite(v)) return v;
  return std::stod(format_double(v, precision));
}

std::string hex(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string stage_name(Stage s) {
  switch (s) {
    case Stage::Chi: return "chi";
    case Stage::Fresnel: return "fresnel";
    case Stage::Shift: return "shift";
    case Stage::Profile: return "profile";
  }
  return "?";
}

SweepResult run_sweep(const RunConfig& cfg, Stage stage, int threads) {
  if (stage == Stage::Profile) return run_profile(cfg);
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  SweepResult res;
  res.stage = stage;
  res.config_hash = config::config_hash(cfg);
  const int nx = cfg.x ? cfg.x->steps : 1;
  const int ny = cfg.y ? cfg.y->steps : 1;
  if (cfg.x) {
    res.columns.push_back(config::variable_column(cfg.x->variable));
    res.units.push_back(variable_unit(cfg.x->variable));
  }
  if (cfg.y) {
    res.columns.push_back(config::variable_column(cfg.y->variable));
    res.units.push_back(variable_unit(cfg.y->variable));
  }
  const auto sc = stage_columns(stage);
  res.columns.insert(res.columns.end(), sc.names.begin(), sc.names.end());
  res.units.insert(res.units.end(), sc.units.begin(), sc.units.end());

  auto point_config = [&](int ix, int iy) {
    RunConfig c = cfg;
    if (cfg.x) c = c.with(cfg.x->variable, cfg.x->value(ix));
    if (cfg.y) c = c.with(cfg.y->variable, cfg.y->value(iy));
    return c;
  };

  // Susceptibility only depends on some axes; evaluate it once per distinct value.
  const bool xa = cfg.x && config::affects_susceptibility(cfg.x->variable);
  const bool ya = cfg.y && config::affects_susceptibility(cfg.y->variable);
  const int cx = xa ? nx : 1;
  const int cy = ya ? ny : 1;
  std::vector<ChiEntry> chis(static_cast<std::size_t>(cx * cy));
  parallel_for(chis.size(), threads, [&](std::size_t k) {
    const int ix = static_cast<int>(k) / cy;
    const int iy = static_cast<int>(k) % cy;
    const RunConfig c = point_config(ix, iy);
    try {
      chis[k].chi = response::susceptibility(c.drive_params(), c.atom_params(),
                                             c.pipeline_options().susceptibility);
    } catch (const Error& e) {
      chis[k].error = e.what();
    }
  });

  const std::size_t n = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  res.rows.assign(n, {});
  res.errors.assign(n, {});
  parallel_for(n, threads, [&](std::size_t i) {
    const int ix = static_cast<int>(i) / ny;
    const int iy = static_cast<int>(i) % ny;
    std::vector<double> row;
    if (cfg.x) row.push_back(cfg.x->value(ix));
    if (cfg.y) row.push_back(cfg.y->value(iy));
    const ChiEntry& ce = chis[static_cast<std::size_t>((xa ? ix : 0) * cy + (ya ? iy : 0))];
    try {
      if (!ce.chi) throw PropagationError(ce.error);
      const auto& chi = *ce.chi;
      if (stage == Stage::Chi) {
        for (cplx z : {chi.chi1, chi.chi3_local_contrib, chi.chi3_nonlocal_contrib}) {
          row.push_back(z.real());
          row.push_back(z.imag());
        }
      } else {
        const RunConfig c = point_config(ix, iy);
        const auto b = c.beam_spec();
        const auto f = pipeline::fresnel_for_chi(c.geometry(), chi.total, b.theta_i, b.lambda_p);
        if (stage == Stage::Fresnel) {
          for (cplx z : {f.rp, f.rs}) {
            row.push_back(z.real());
            row.push_back(z.imag());
          }
          row.push_back(std::abs(f.rp));
          row.push_back(std::abs(f.rs));
          for (cplx z : {f.tp, f.ts}) {
            row.push_back(z.real());
            row.push_back(z.imag());
          }
        } else {
          const auto s = pipeline::shifts_for_fresnel(f, b, c.pipeline_options());
          row.insert(row.end(), {s.delta_plus, s.delta_minus, s.power_plus, s.power_minus,
                                 std::abs(f.rp), std::abs(f.rs)});
        }
      }
      for (double v : row) {
        if (!std::isfinite(v)) throw PropagationError("non-finite value in result row");
      }
    } catch (const Error& e) {
      row.resize((cfg.x ? 1 : 0) + (cfg.y ? 1 : 0));
      row.resize(res.columns.size(), kNaN);
      res.errors[i] = e.what();
    }
    res.rows[i] = std::move(row);
  });

  res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

SweepResult run_profile(const RunConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  SweepResult res;
  res.stage = Stage::Profile;
  res.config_hash = config::config_hash(cfg);
  res.columns = {"x_um", "y_um", "intensity_plus", "intensity_minus"};
  res.units = {"um", "um", "1", "1"};

  const auto chi = response::susceptibility(cfg.drive_params(), cfg.atom_params(),
                                            cfg.pipeline_options().susceptibility);
  auto b = cfg.beam_spec();
  const auto f = pipeline::fresnel_for_chi(cfg.geometry(), chi.total, b.theta_i, b.lambda_p);

  beam::BeamSpec fine = b;
  fine.grid_n = 4096;
  fine.grid_span = 64.0;
  const auto fields = beam::reflected_field(beam::reflected_spin_spectra(fine, f.rp, f.rs));
  const auto peaks = beam::profile_peaks(fields);

  beam::BeamSpec coarse = b;
  coarse.grid_n = 512;
  coarse.grid_span = 32.0;
  const auto map = beam::intensity_map_2d(coarse, f.rp, f.rs, 3.0 * b.w0);

  res.metadata = {{"delta2_MHz", cfg.Delta2_MHz},
                  {"theta_deg", cfg.theta_deg},
                  {"peak_plus_y_um", peaks.y_plus},
                  {"peak_minus_y_um", peaks.y_minus},
                  {"centroid_plus_um", beam::centroid(fields.y_samples, fields.e_plus)},
                  {"centroid_minus_um", beam::centroid(fields.y_samples, fields.e_minus)},
                  {"abs_rp", std::abs(f.rp)},
                  {"abs_rs", std::abs(f.rs)}};

  const std::size_t ny = map.y.size();
  for (std::size_t ix = 0; ix < map.x.size(); ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      res.rows.push_back({map.x[ix], map.y[iy], map.plus[ix * ny + iy], map.minus[ix * ny + iy]});
      res.errors.emplace_back();
    }
  }
  res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

void emit(const SweepResult& r, config::Format format, int precision, std::ostream& os) {
  if (format == config::Format::Csv) {
    os << "# rydpshe " << r.version << "\n";
    os << "# stage: " << stage_name(r.stage) << "\n";
    os << "# config_hash: " << hex(r.config_hash) << "\n";
    os << "# units:";
    for (std::size_t i = 0; i < r.columns.size(); ++i) {
      os << (i ? ", " : " ") << r.columns[i] << " [" << r.units[i] << "]";
    }
    os << "\n";
    for (const auto& [k, v] : r.metadata) os << "# " << k << " = " << format_double(v, precision) << "\n";
    for (std::size_t i = 0; i < r.columns.size(); ++i) os << (i ? ", " : "") << r.columns[i];
    os << "\n";
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      for (std::size_t j = 0; j < r.rows[i].size(); ++j) {
        os << (j ? ", " : "") << format_double(r.rows[i][j], precision);
      }
      os << "\n";
      if (i < r.errors.size() && !r.errors[i].empty()) os << "# error row " << i << ": " << r.errors[i] << "\n";
    }
    return;
  }

  nlohmann::ordered_json j;
  j["version"] = r.version;
  j["stage"] = stage_name(r.stage);
  j["config_hash"] = hex(r.config_hash);
  j["columns"] = r.columns;
  j["units"] = r.units;
  j["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.metadata) j["metadata"][k] = rounded(v, precision);
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    auto jr = nlohmann::ordered_json::array();
    for (double v : row) {
      if (std::isfinite(v)) jr.push_back(rounded(v, precision));
      else jr.push_back(nullptr);
    }
    rows.push_back(std::move(jr));
  }
  j["rows"] = std::move(rows);
  auto errs = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.errors.size(); ++i) {
    if (!r.errors[i].empty()) errs.push_back({{"row", i}, {"message", r.errors[i]}});
  }
  j["errors"] = std::move(errs);
  os << j.dump(1) << "\n";
}

void emit_to_path(const SweepResult& r, config::Format format, int precision, const std::string& path) {
  if (path.empty() || path == "-") {
    emit(r, format, precision, std::cout);
    std::cout.flush();
    if (!std::cout) throw IoError("failed writing to standard output");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file '" + path + "'");
  emit(r, format, precision, out);
  out.flush();
  if (!out) throw IoError("failed writing output file '" + path + "'");
}

SweepResult parse_json(const std::string& text) {
  const auto j = nlohmann::ordered_json::parse(text);
  SweepResult r;
  r.version = j.at("version").get<std::string>();
  const auto st = j.at("stage").get<std::string>();
  for (Stage s : {Stage::Chi, Stage::Fresnel, Stage::Shift, Stage::Profile}) {
    if (stage_name(s) == st) r.stage = s;
  }
  r.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
  r.columns = j.at("columns").get<std::vector<std::string>>();
  r.units = j.at("units").get<std::vector<std::string>>();
  for (const auto& [k, v] : j.at("metadata").items()) r.metadata.emplace_back(k, v.get<double>());
  for (const auto& row : j.at("rows")) {
    std::vector<double> vals;
    for (const auto& v : row) vals.push_back(v.is_null() ? kNaN : v.get<double>());
    r.rows.push_back(std::move(vals));
  }
  r.errors.assign(r.rows.size(), {});
  for (const auto& e : j.at("errors")) {
    r.errors.at(e.at("row").get<std::size_t>()) = e.at("message").get<std::string>();
  }
  return r;
}

}  // namespace rydpshe::sweep
