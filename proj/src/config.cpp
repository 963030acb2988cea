#include "rydpshe/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "rydpshe/errors.hpp"

namespace rydpshe::config {

namespace {

enum class Kind { Frequency, Length, Density, Angle, C6, Number, Integer, Bool, Text };

struct KeySpec {
  const char* section;
  const char* key;
  Kind kind;
};

constexpr KeySpec kKeys[] = {
    {"atom", "Gamma21", Kind::Frequency},   {"atom", "Gamma32", Kind::Frequency},
    {"atom", "gamma21", Kind::Frequency},   {"atom", "gamma32", Kind::Frequency},
    {"atom", "gamma31", Kind::Frequency},   {"atom", "C6", Kind::C6},
    {"atom", "Na", Kind::Density},          {"atom", "lambda_p", Kind::Length},
    {"drive", "Omega_p", Kind::Frequency},  {"drive", "Omega_c", Kind::Frequency},
    {"drive", "Delta2", Kind::Frequency},   {"drive", "Delta_c", Kind::Frequency},
    {"geometry", "n1", Kind::Number},       {"geometry", "d2", Kind::Length},
    {"geometry", "n3", Kind::Number},       {"beam", "w0", Kind::Length},
    {"beam", "theta_i", Kind::Angle},       {"beam", "grid_n", Kind::Integer},
    {"beam", "grid_span", Kind::Number},    {"beam", "method", Kind::Text},
    {"sweep", "x", Kind::Text},             {"sweep", "x_min", Kind::Text},
    {"sweep", "x_max", Kind::Text},         {"sweep", "x_steps", Kind::Integer},
    {"sweep", "y", Kind::Text},             {"sweep", "y_min", Kind::Text},
    {"sweep", "y_max", Kind::Text},         {"sweep", "y_steps", Kind::Integer},
    {"sweep", "nonlocal", Kind::Bool},      {"sweep", "quad_nodes", Kind::Integer},
    {"output", "path", Kind::Text},         {"output", "format", Kind::Text},
    {"output", "precision", Kind::Integer},
};

const KeySpec* find_key(const std::string& section, const std::string& key) {
  for (const auto& k : kKeys) {
    if (section == k.section && key == k.key) return &k;
  }
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  for (std::size_t i = 0; i < line.size(); ++i) {
    if ((line[i] == '#' || line[i] == ';') && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
      return line.substr(0, i);
    }
  }
  return line;
}

double frequency_factor(const std::string& unit) {
  if (unit.empty() || unit == "MHz") return 1.0;
  if (unit == "Hz") return 1e-6;
  if (unit == "kHz") return 1e-3;
  if (unit == "GHz") return 1e3;
  if (unit == "rad/us") return 1.0 / kTwoPi;
  if (unit == "rad/s") return 1e-6 / kTwoPi;
  return NAN;
}

double length_factor(const std::string& unit) {
  if (unit.empty() || unit == "um") return 1.0;
  if (unit == "nm") return 1e-3;
  if (unit == "mm") return 1e3;
  if (unit == "m") return 1e6;
  return NAN;
}

double density_factor(const std::string& unit) {
  if (unit.empty() || unit == "mm^-3") return 1.0;
  if (unit == "um^-3") return 1e9;
  if (unit == "cm^-3") return 1e-3;
  if (unit == "m^-3") return 1e-9;
  return NAN;
}

double angle_factor(const std::string& unit) {
  if (unit.empty() || unit == "deg") return 1.0;
  if (unit == "rad") return 180.0 / kPi;
  return NAN;
}

double c6_factor(std::string unit) {
  if (unit.empty()) return 1.0;
  for (const char* suffix : {"*um^6", " um^6", "um^6"}) {
    const std::string s(suffix);
    if (unit.size() >= s.size() && unit.compare(unit.size() - s.size(), s.size(), s) == 0) {
      unit = trim(unit.substr(0, unit.size() - s.size()));
      return unit.empty() ? NAN : frequency_factor(unit);
    }
  }
  return NAN;
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Frequency: return "frequency";
    case Kind::Length: return "length";
    case Kind::Density: return "density";
    case Kind::Angle: return "angle";
    case Kind::C6: return "C6";
    default: return "dimensionless";
  }
}

double unit_factor(Kind kind, const std::string& unit) {
  switch (kind) {
    case Kind::Frequency: return frequency_factor(unit);
    case Kind::Length: return length_factor(unit);
    case Kind::Density: return density_factor(unit);
    case Kind::Angle: return angle_factor(unit);
    case Kind::C6: return c6_factor(unit);
    default: return unit.empty() ? 1.0 : NAN;
  }
}

Kind variable_kind(Variable v) {
  switch (v) {
    case Variable::Delta2:
    case Variable::OmegaC:
    case Variable::OmegaP: return Kind::Frequency;
    case Variable::ThetaI: return Kind::Angle;
    case Variable::Na: return Kind::Density;
    case Variable::D2: return Kind::Length;
  }
  return Kind::Number;
}

// Number followed by an optional unit, converted to the user-facing unit.
double parse_quantity(const std::string& text, Kind kind, int line, const std::string& key) {
  const char* b = text.data();
  const char* e = b + text.size();
  double v = 0.0;
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || !std::isfinite(v)) {
    throw ParseError(line, key + ": expected a number, got '" + text + "'");
  }
  const std::string unit = trim(std::string(res.ptr, e));
  const double f = unit_factor(kind, unit);
  if (std::isnan(f)) {
    throw ParseError(line, key + ": unit '" + unit + "' is not a " + kind_name(kind) + " unit");
  }
  return v * f;
}

int parse_int(const std::string& text, int line, const std::string& key) {
  int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ParseError(line, key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& text, int line, const std::string& key) {
  if (text == "true" || text == "on" || text == "1") return true;
  if (text == "false" || text == "off" || text == "0") return false;
  throw ParseError(line, key + ": expected true or false, got '" + text + "'");
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Violation {
  std::string key;
  std::string message;
};

std::optional<Violation> first_violation(const RunConfig& c) {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  auto nonneg = [](double v) { return v >= 0.0 && std::isfinite(v); };
  if (!positive(c.Gamma21_MHz)) return Violation{"Gamma21", "must be positive"};
  if (!nonneg(c.Gamma32_MHz)) return Violation{"Gamma32", "must be non-negative"};
  if (c.gamma21_MHz && !nonneg(*c.gamma21_MHz)) return Violation{"gamma21", "must be non-negative"};
  if (c.gamma32_MHz && !nonneg(*c.gamma32_MHz)) return Violation{"gamma32", "must be non-negative"};
  if (c.gamma31_MHz && !nonneg(*c.gamma31_MHz)) return Violation{"gamma31", "must be non-negative"};
  if (!std::isfinite(c.C6_MHz_um6)) return Violation{"C6", "must be finite"};
  if (!nonneg(c.Na_per_mm3)) return Violation{"Na", "must be non-negative"};
  if (!positive(c.lambda_um)) return Violation{"lambda_p", "must be positive"};
  if (!nonneg(c.Omega_p_MHz)) return Violation{"Omega_p", "must be non-negative"};
  if (!nonneg(c.Omega_c_MHz)) return Violation{"Omega_c", "must be non-negative"};
  if (!std::isfinite(c.Delta2_MHz)) return Violation{"Delta2", "must be finite"};
  if (!std::isfinite(c.Delta_c_MHz)) return Violation{"Delta_c", "must be finite"};
  if (!positive(c.n1)) return Violation{"n1", "must be positive"};
  if (!positive(c.n3)) return Violation{"n3", "must be positive"};
  if (!nonneg(c.d2_um)) return Violation{"d2", "must be non-negative"};
  if (!positive(c.w0_um)) return Violation{"w0", "must be positive"};
  if (!(c.theta_deg >= 5.0 && c.theta_deg <= 85.0)) return Violation{"theta_i", "must lie in [5, 85] deg"};
  if (c.grid_n < 256 || (c.grid_n & (c.grid_n - 1)) != 0) {
    return Violation{"grid_n", "must be a power of two >= 256"};
  }
  if (!(c.grid_span >= 6.0) || !std::isfinite(c.grid_span)) return Violation{"grid_span", "must be >= 6"};
  if (c.quad_nodes < 2 || c.quad_nodes > 4096) return Violation{"quad_nodes", "must lie in [2, 4096]"};
  if (c.precision < 1 || c.precision > 17) return Violation{"precision", "must lie in [1, 17]"};
  for (const auto* ax : {&c.x, &c.y}) {
    if (!ax->has_value()) continue;
    const std::string p = ax == &c.x ? "x" : "y";
    const Axis& a = **ax;
    if (!std::isfinite(a.min) || !std::isfinite(a.max)) return Violation{p + "_min", "range must be finite"};
    if (a.steps < 2) return Violation{p + "_steps", "must be >= 2"};
    if (a.variable == Variable::ThetaI && (std::min(a.min, a.max) < 5.0 || std::max(a.min, a.max) > 85.0)) {
      return Violation{p + "_min", "incidence angle range must lie in [5, 85] deg"};
    }
    if ((a.variable == Variable::Na || a.variable == Variable::OmegaC || a.variable == Variable::OmegaP ||
         a.variable == Variable::D2) &&
        std::min(a.min, a.max) < 0.0) {
      return Violation{p + "_min", "range must be non-negative for " + variable_name(a.variable)};
    }
  }
  if (c.x && c.y && c.x->variable == c.y->variable) return Violation{"y", "must differ from x"};
  if (c.y && !c.x) return Violation{"y", "requires x"};
  return std::nullopt;
}

}  // namespace

std::optional<Variable> variable_from_name(const std::string& name) {
  if (name == "Delta2") return Variable::Delta2;
  if (name == "theta_i") return Variable::ThetaI;
  if (name == "Na") return Variable::Na;
  if (name == "Omega_c") return Variable::OmegaC;
  if (name == "Omega_p") return Variable::OmegaP;
  if (name == "d2") return Variable::D2;
  return std::nullopt;
}

std::string variable_name(Variable v) {
  switch (v) {
    case Variable::Delta2: return "Delta2";
    case Variable::ThetaI: return "theta_i";
    case Variable::Na: return "Na";
    case Variable::OmegaC: return "Omega_c";
    case Variable::OmegaP: return "Omega_p";
    case Variable::D2: return "d2";
  }
  return "?";
}

std::string variable_column(Variable v) {
  switch (v) {
    case Variable::Delta2: return "delta2_MHz";
    case Variable::ThetaI: return "theta_deg";
    case Variable::Na: return "na_per_mm3";
    case Variable::OmegaC: return "omega_c_MHz";
    case Variable::OmegaP: return "omega_p_MHz";
    case Variable::D2: return "d2_um";
  }
  return "?";
}

bool affects_susceptibility(Variable v) {
  return v == Variable::Delta2 || v == Variable::Na || v == Variable::OmegaC || v == Variable::OmegaP;
}

double Axis::value(int i) const {
  if (i == steps - 1) return max;
  return min + (max - min) * static_cast<double>(i) / static_cast<double>(steps - 1);
}

response::AtomParams RunConfig::atom_params() const {
  auto a = response::AtomParams::from_decay_rates(
      units::mhz_to_rad_per_us(Gamma21_MHz), units::mhz_to_rad_per_us(Gamma32_MHz),
      units::mhz_to_rad_per_us(C6_MHz_um6), units::per_mm3_to_per_um3(Na_per_mm3), lambda_um);
  if (gamma21_MHz) a.gamma21 = units::mhz_to_rad_per_us(*gamma21_MHz);
  if (gamma32_MHz) a.gamma32 = units::mhz_to_rad_per_us(*gamma32_MHz);
  if (gamma31_MHz) a.gamma31 = units::mhz_to_rad_per_us(*gamma31_MHz);
  return a;
}

response::DriveParams RunConfig::drive_params() const {
  response::DriveParams d;
  d.Omega_p = units::mhz_to_rad_per_us(Omega_p_MHz);
  d.Omega_c = units::mhz_to_rad_per_us(Omega_c_MHz);
  d.Delta2 = units::mhz_to_rad_per_us(Delta2_MHz);
  d.Delta_c = units::mhz_to_rad_per_us(Delta_c_MHz);
  return d;
}

pipeline::Geometry RunConfig::geometry() const { return {n1, d2_um, n3}; }

beam::BeamSpec RunConfig::beam_spec() const {
  beam::BeamSpec b;
  b.w0 = w0_um;
  b.theta_i = units::deg_to_rad(theta_deg);
  b.lambda_p = lambda_um;
  b.grid_n = grid_n;
  b.grid_span = grid_span;
  return b;
}

pipeline::Options RunConfig::pipeline_options() const {
  pipeline::Options o;
  o.susceptibility.include_nonlocal = nonlocal;
  o.susceptibility.quadrature.nodes = quad_nodes;
  o.method = method;
  return o;
}

RunConfig RunConfig::with(Variable v, double value) const {
  RunConfig c = *this;
  switch (v) {
    case Variable::Delta2: c.Delta2_MHz = value; break;
    case Variable::ThetaI: c.theta_deg = value; break;
    case Variable::Na: c.Na_per_mm3 = value; break;
    case Variable::OmegaC: c.Omega_c_MHz = value; break;
    case Variable::OmegaP: c.Omega_p_MHz = value; break;
    case Variable::D2: c.d2_um = value; break;
  }
  return c;
}

void RunConfig::validate() const {
  if (const auto v = first_violation(*this)) throw DomainError(v->key + ": " + v->message);
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::map<std::string, int> seen;  // key -> line
  std::map<std::string, std::string> raw_axis;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(lineno, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      bool known = false;
      for (const auto& k : kKeys) known = known || section == k.section;
      if (!known) throw ParseError(lineno, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (section.empty()) throw ParseError(lineno, "key '" + key + "' outside of any section");
    const KeySpec* spec = find_key(section, key);
    if (spec == nullptr) throw ParseError(lineno, "unknown key '" + key + "' in [" + section + "]");
    if (seen.count(key)) throw ParseError(lineno, "duplicate key '" + key + "'");
    seen[key] = lineno;
    if (value.empty() && key != "path") throw ParseError(lineno, key + ": missing value");

    auto q = [&] { return parse_quantity(value, spec->kind, lineno, key); };
    if (key == "Gamma21") c.Gamma21_MHz = q();
    else if (key == "Gamma32") c.Gamma32_MHz = q();
    else if (key == "gamma21") c.gamma21_MHz = q();
    else if (key == "gamma32") c.gamma32_MHz = q();
    else if (key == "gamma31") c.gamma31_MHz = q();
    else if (key == "C6") c.C6_MHz_um6 = q();
    else if (key == "Na") c.Na_per_mm3 = q();
    else if (key == "lambda_p") c.lambda_um = q();
    else if (key == "Omega_p") c.Omega_p_MHz = q();
    else if (key == "Omega_c") c.Omega_c_MHz = q();
    else if (key == "Delta2") c.Delta2_MHz = q();
    else if (key == "Delta_c") c.Delta_c_MHz = q();
    else if (key == "n1") c.n1 = q();
    else if (key == "d2") c.d2_um = q();
    else if (key == "n3") c.n3 = q();
    else if (key == "w0") c.w0_um = q();
    else if (key == "theta_i") c.theta_deg = q();
    else if (key == "grid_n") c.grid_n = parse_int(value, lineno, key);
    else if (key == "grid_span") c.grid_span = q();
    else if (key == "method") {
      if (value == "transform") c.method = pipeline::ShiftMethod::Transform;
      else if (value == "analytic") c.method = pipeline::ShiftMethod::Analytic;
      else throw ParseError(lineno, "method: expected transform or analytic");
    } else if (key == "x_steps" || key == "y_steps" || key == "quad_nodes" || key == "precision") {
      const int v = parse_int(value, lineno, key);
      if (key == "quad_nodes") c.quad_nodes = v;
      else if (key == "precision") c.precision = v;
      else raw_axis[key] = value;
    } else if (key == "nonlocal") c.nonlocal = parse_bool(value, lineno, key);
    else if (key == "path") c.path = value;
    else if (key == "format") {
      if (value == "csv") c.format = Format::Csv;
      else if (value == "json") c.format = Format::Json;
      else throw ParseError(lineno, "format: expected csv or json");
    } else raw_axis[key] = value;  // x, y, *_min, *_max
  }

  // Axis ranges are read in the unit of their variable, known only at the end.
  for (const char* p : {"x", "y"}) {
    const std::string ps(p);
    const bool any = raw_axis.count(ps) || raw_axis.count(ps + "_min") || raw_axis.count(ps + "_max") ||
                     raw_axis.count(ps + "_steps");
    if (!any) continue;
    for (const char* part : {"", "_min", "_max", "_steps"}) {
      const std::string k = ps + part;
      if (!raw_axis.count(k)) {
        const int at = seen.count(ps) ? seen[ps] : 0;
        throw ParseError(at, "sweep axis '" + ps + "' is missing '" + k + "'");
      }
    }
    const auto var = variable_from_name(raw_axis[ps]);
    if (!var) {
      throw ParseError(seen[ps], ps + ": unknown sweep variable '" + raw_axis[ps] +
                                     "' (expected Delta2, theta_i, Na, Omega_c, Omega_p or d2)");
    }
    Axis a;
    a.variable = *var;
    const Kind kind = variable_kind(*var);
    a.min = parse_quantity(raw_axis[ps + "_min"], kind, seen[ps + "_min"], ps + "_min");
    a.max = parse_quantity(raw_axis[ps + "_max"], kind, seen[ps + "_max"], ps + "_max");
    a.steps = parse_int(raw_axis[ps + "_steps"], seen[ps + "_steps"], ps + "_steps");
    (ps == "x" ? c.x : c.y) = a;
  }

  if (const auto v = first_violation(c)) {
    const auto it = seen.find(v->key);
    throw ParseError(it == seen.end() ? 0 : it->second, v->key + ": " + v->message);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading config file '" + path + "'");
  return parse_config(ss.str());
}

std::string serialize(const RunConfig& c) {
  std::ostringstream os;
  os << "[atom]\n";
  os << "Gamma21 = " << fmt(c.Gamma21_MHz) << " MHz\n";
  os << "Gamma32 = " << fmt(c.Gamma32_MHz) << " MHz\n";
  if (c.gamma21_MHz) os << "gamma21 = " << fmt(*c.gamma21_MHz) << " MHz\n";
  if (c.gamma32_MHz) os << "gamma32 = " << fmt(*c.gamma32_MHz) << " MHz\n";
  if (c.gamma31_MHz) os << "gamma31 = " << fmt(*c.gamma31_MHz) << " MHz\n";
  os << "C6 = " << fmt(c.C6_MHz_um6) << " MHz um^6\n";
  os << "Na = " << fmt(c.Na_per_mm3) << " mm^-3\n";
  os << "lambda_p = " << fmt(c.lambda_um) << " um\n";
  os << "\n[drive]\n";
  os << "Omega_p = " << fmt(c.Omega_p_MHz) << " MHz\n";
  os << "Omega_c = " << fmt(c.Omega_c_MHz) << " MHz\n";
  os << "Delta2 = " << fmt(c.Delta2_MHz) << " MHz\n";
  os << "Delta_c = " << fmt(c.Delta_c_MHz) << " MHz\n";
  os << "\n[geometry]\n";
  os << "n1 = " << fmt(c.n1) << "\n";
  os << "d2 = " << fmt(c.d2_um) << " um\n";
  os << "n3 = " << fmt(c.n3) << "\n";
  os << "\n[beam]\n";
  os << "w0 = " << fmt(c.w0_um) << " um\n";
  os << "theta_i = " << fmt(c.theta_deg) << " deg\n";
  os << "grid_n = " << c.grid_n << "\n";
  os << "grid_span = " << fmt(c.grid_span) << "\n";
  os << "method = " << (c.method == pipeline::ShiftMethod::Analytic ? "analytic" : "transform") << "\n";
  os << "\n[sweep]\n";
  auto axis = [&](const char* p, const std::optional<Axis>& a) {
    if (!a) return;
    const Kind k = variable_kind(a->variable);
    const char* unit = k == Kind::Frequency ? " MHz"
                       : k == Kind::Angle   ? " deg"
                       : k == Kind::Density ? " mm^-3"
                                            : " um";
    os << p << " = " << variable_name(a->variable) << "\n";
    os << p << "_min = " << fmt(a->min) << unit << "\n";
    os << p << "_max = " << fmt(a->max) << unit << "\n";
    os << p << "_steps = " << a->steps << "\n";
  };
  axis("x", c.x);
  axis("y", c.y);
  os << "nonlocal = " << (c.nonlocal ? "true" : "false") << "\n";
  os << "quad_nodes = " << c.quad_nodes << "\n";
  os << "\n[output]\n";
  if (!c.path.empty()) os << "path = " << c.path << "\n";
  os << "format = " << (c.format == Format::Json ? "json" : "csv") << "\n";
  os << "precision = " << c.precision << "\n";
  return os.str();
}

std::uint64_t config_hash(const RunConfig& c) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : serialize(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace rydpshe::config
