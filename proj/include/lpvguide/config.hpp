#pragma once

// Run configuration: a sectioned key = value text format with every default
// embedded. Unknown sections or keys are errors. Any key can be overridden
// from the environment as LPVGUIDE_<SECTION>_<KEY> (dots become underscores,
// upper case), e.g. LPVGUIDE_SYNTHESIS_DYNAMIC_DECAY=5.

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "lpv_models.hpp"
#include "planner.hpp"
#include "synthesis.hpp"
#include "vehicle.hpp"

namespace lpvguide {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  VehicleParams vehicle;
  ActuatorLimits limits;
  LpvConfig lpv;
  SchedulingBounds dynamic_bounds = SchedulingBounds::dynamic_default();
  SchedulingBounds kinematic_bounds = SchedulingBounds::kinematic_default();
  SynthesisConfig dynamic_synthesis = SynthesisConfig::dynamic_default();
  SynthesisConfig kinematic_synthesis = SynthesisConfig::kinematic_default();

  PlannerConstraints planner;
  bool closed = true;
  bool stop_at_end = true;
  double circuit_spacing = 5.0;   // waypoint spacing of the built-in circuit [m]
  std::string waypoints_file;     // empty: inline waypoints, or the built-in circuit if none
  std::vector<Waypoint> waypoints;

  double ts_kin = 0.1;
  double ts_dyn = 0.01;
  int substeps = 20;
  double v_floor = 0.05;
  double horizon = 0.0;           // 0: whole trajectory

  std::string output_dir = "out";

  bool operator==(const RunConfig&) const = default;

  void validate() const {
    try {
      vehicle.validate();
      limits.validate();
      lpv.validate();
      dynamic_bounds.validate();
      kinematic_bounds.validate();
      dynamic_synthesis.validate();
      kinematic_synthesis.validate();
      planner.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (dynamic_bounds.size() != 2 || kinematic_bounds.size() != 3) {
      throw ConfigError("scheduling bounds: expected (v, sigma) and (v_d, omega, theta_e)");
    }
    if (!(dynamic_bounds.variables[0].lower > 0.0) || !(kinematic_bounds.variables[0].lower > 0.0)) {
      throw ConfigError("scheduling bounds: speed intervals must be positive");
    }
    if (dynamic_synthesis.q.size() != 6 || dynamic_synthesis.r.size() != 2) {
      throw ConfigError("synthesis.dynamic: q needs 6 entries and r 2");
    }
    if (kinematic_synthesis.q.size() != 3 || kinematic_synthesis.r.size() != 2) {
      throw ConfigError("synthesis.kinematic: q needs 3 entries and r 2");
    }
    if (!(ts_dyn > 0.0) || !(ts_kin > 0.0)) throw ConfigError("simulation: sample periods must be positive");
    const double ratio = ts_kin / ts_dyn;
    if (std::round(ratio) < 1.0 || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
      throw ConfigError("simulation: ts_kin must be an integer multiple of ts_dyn");
    }
    if (substeps < 1) throw ConfigError("simulation: substeps must be >= 1");
    if (!(v_floor > 0.0)) throw ConfigError("simulation: v_floor must be positive");
    if (!(horizon >= 0.0)) throw ConfigError("simulation: horizon must be >= 0");
    if (!(circuit_spacing > 0.0)) throw ConfigError("planner: circuit_spacing must be positive");
    if (!waypoints_file.empty() && !waypoints.empty()) {
      throw ConfigError("planner: give either waypoints or waypoints_file, not both");
    }
    if (!waypoints.empty() && waypoints.size() < 2) throw ConfigError("planner: at least 2 waypoints are required");
  }

  /// Waypoints from the file, the inline list, or the built-in circuit.
  std::vector<Waypoint> resolve_waypoints() const {
    if (!waypoints_file.empty()) return read_waypoints_file(waypoints_file);
    if (!waypoints.empty()) return waypoints;
    return default_circuit(circuit_spacing);
  }
};

namespace config_detail {

using Number = double;
using List = std::vector<double>;
using Table = std::vector<std::vector<double>>;
using Value = std::variant<Number, bool, std::string, List, Table>;

struct Field {
  std::string section;
  std::string key;
  std::function<Value()> get;
  std::function<void(const Value&)> set;
};

inline std::string type_name(const Value& v) {
  switch (v.index()) {
    case 0: return "number";
    case 1: return "boolean";
    case 2: return "string";
    case 3: return "list";
    default: return "table";
  }
}

template <class T>
const T& expect(const Value& v, const char* what) {
  if (const T* p = std::get_if<T>(&v)) return *p;
  throw ConfigError(std::string("expected ") + what + ", got " + type_name(v));
}

inline double number(const Value& v) { return expect<Number>(v, "a number"); }

inline int integer(const Value& v) {
  const double d = number(v);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError("expected an integer");
  return static_cast<int>(d);
}

inline List list(const Value& v) {
  if (const Table* t = std::get_if<Table>(&v); t && t->empty()) return {};
  return expect<List>(v, "a list of numbers");
}

inline Eigen::VectorXd vec(const Value& v) {
  const List l = list(v);
  return Eigen::Map<const Eigen::VectorXd>(l.data(), static_cast<Eigen::Index>(l.size()));
}

inline List to_list(const Eigen::VectorXd& v) { return List(v.data(), v.data() + v.size()); }

inline void add_number(std::vector<Field>& f, const std::string& s, const std::string& k, double& ref) {
  f.push_back({s, k, [&ref] { return Value(ref); }, [&ref](const Value& v) { ref = number(v); }});
}

inline void add_integer(std::vector<Field>& f, const std::string& s, const std::string& k, int& ref) {
  f.push_back({s, k, [&ref] { return Value(static_cast<double>(ref)); },
               [&ref](const Value& v) { ref = integer(v); }});
}

inline void add_bool(std::vector<Field>& f, const std::string& s, const std::string& k, bool& ref) {
  f.push_back({s, k, [&ref] { return Value(ref); }, [&ref](const Value& v) { ref = expect<bool>(v, "true/false"); }});
}

inline void add_string(std::vector<Field>& f, const std::string& s, const std::string& k, std::string& ref) {
  f.push_back({s, k, [&ref] { return Value(ref); },
               [&ref](const Value& v) { ref = expect<std::string>(v, "a quoted string"); }});
}

inline void add_vector(std::vector<Field>& f, const std::string& s, const std::string& k, Eigen::VectorXd& ref) {
  f.push_back({s, k, [&ref] { return Value(to_list(ref)); }, [&ref](const Value& v) { ref = vec(v); }});
}

inline void add_interval(std::vector<Field>& f, const std::string& s, SchedulingVariable& var) {
  f.push_back({s, var.name, [&var] { return Value(List{var.lower, var.upper}); },
               [&var](const Value& v) {
                 const List l = list(v);
                 if (l.size() != 2) throw ConfigError("expected [lower, upper]");
                 var.lower = l[0];
                 var.upper = l[1];
               }});
}

template <class E>
void add_enum(std::vector<Field>& f, const std::string& s, const std::string& k, E& ref,
              std::vector<std::pair<E, std::string>> names) {
  f.push_back({s, k,
               [&ref, names] {
                 for (const auto& [e, n] : names) {
                   if (e == ref) return Value(n);
                 }
                 return Value(std::string{});
               },
               [&ref, names](const Value& v) {
                 const auto& str = expect<std::string>(v, "a quoted string");
                 for (const auto& [e, n] : names) {
                   if (n == str) {
                     ref = e;
                     return;
                   }
                 }
                 std::string allowed;
                 for (const auto& [e, n] : names) allowed += (allowed.empty() ? "" : ", ") + n;
                 throw ConfigError("'" + str + "' is not one of " + allowed);
               }});
}

inline void add_synthesis(std::vector<Field>& f, const std::string& s, SynthesisConfig& c) {
  add_vector(f, s, "q", c.q);
  add_vector(f, s, "r", c.r);
  add_number(f, s, "gamma_bound", c.gamma_bound);
  add_number(f, s, "decay", c.decay);
  add_number(f, s, "tol", c.tol);
  add_integer(f, s, "max_iter", c.max_iter);
  add_number(f, s, "gap", c.gap);
  add_number(f, s, "trace_cap", c.trace_cap);
}

inline std::vector<Field> fields(RunConfig& c) {
  std::vector<Field> f;
  add_number(f, "vehicle", "a", c.vehicle.a);
  add_number(f, "vehicle", "b", c.vehicle.b);
  add_number(f, "vehicle", "mass", c.vehicle.mass);
  add_number(f, "vehicle", "inertia", c.vehicle.inertia);
  add_number(f, "vehicle", "drag_coefficient", c.vehicle.drag_coefficient);
  add_number(f, "vehicle", "frontal_area", c.vehicle.frontal_area);
  add_number(f, "vehicle", "air_density", c.vehicle.air_density);
  add_number(f, "vehicle", "friction", c.vehicle.friction);
  add_number(f, "vehicle", "tire_stiffness", c.vehicle.tire_stiffness);
  add_number(f, "vehicle", "gravity", c.vehicle.gravity);

  add_number(f, "limits", "force_max", c.limits.force_max);
  add_number(f, "limits", "steering_max", c.limits.steering_max);

  add_number(f, "lpv", "epsilon", c.lpv.epsilon);
  add_number(f, "lpv", "filter_gain", c.lpv.filter_gain);
  add_enum(f, "lpv", "steering_evaluation", c.lpv.steering_evaluation,
           {{SteeringEvaluation::Sigma, "sigma"}, {SteeringEvaluation::Delta, "delta"}});
  add_enum(f, "lpv", "slip_row", c.lpv.slip_row, {{SlipRow::Derived, "derived"}, {SlipRow::Literal, "literal"}});

  for (auto& var : c.dynamic_bounds.variables) add_interval(f, "bounds.dynamic", var);
  for (auto& var : c.kinematic_bounds.variables) add_interval(f, "bounds.kinematic", var);

  add_synthesis(f, "synthesis.dynamic", c.dynamic_synthesis);
  add_synthesis(f, "synthesis.kinematic", c.kinematic_synthesis);

  add_number(f, "planner", "a_max", c.planner.a_max);
  add_number(f, "planner", "decel_max", c.planner.decel_max);
  add_number(f, "planner", "v_max", c.planner.v_max);
  add_number(f, "planner", "v_min", c.planner.v_min);
  add_number(f, "planner", "a_lat_max", c.planner.a_lat_max);
  add_number(f, "planner", "omega_max", c.planner.omega_max);
  add_number(f, "planner", "sample_period", c.planner.sample_period);
  add_number(f, "planner", "grid_step", c.planner.grid_step);
  add_bool(f, "planner", "closed", c.closed);
  add_bool(f, "planner", "stop_at_end", c.stop_at_end);
  add_number(f, "planner", "circuit_spacing", c.circuit_spacing);
  add_string(f, "planner", "waypoints_file", c.waypoints_file);
  f.push_back({"planner", "waypoints",
               [&c] {
                 Table t;
                 for (const auto& w : c.waypoints) {
                   t.push_back(w.speed ? List{w.x, w.y, *w.speed} : List{w.x, w.y});
                 }
                 return Value(t);
               },
               [&c](const Value& v) {
                 if (const List* l = std::get_if<List>(&v); l && l->empty()) {
                   c.waypoints.clear();
                   return;
                 }
                 const Table& t = expect<Table>(v, "a list of [x, y] or [x, y, speed]");
                 c.waypoints.clear();
                 for (const auto& row : t) {
                   if (row.size() != 2 && row.size() != 3) throw ConfigError("waypoint needs [x, y] or [x, y, speed]");
                   Waypoint w{row[0], row[1], std::nullopt};
                   if (row.size() == 3) w.speed = row[2];
                   c.waypoints.push_back(w);
                 }
               }});

  add_number(f, "simulation", "ts_kin", c.ts_kin);
  add_number(f, "simulation", "ts_dyn", c.ts_dyn);
  add_integer(f, "simulation", "substeps", c.substeps);
  add_number(f, "simulation", "v_floor", c.v_floor);
  add_number(f, "simulation", "horizon", c.horizon);

  add_string(f, "output", "directory", c.output_dir);
  return f;
}

inline void skip_space(const std::string& s, std::size_t& i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
}

inline double parse_number_token(const std::string& s, std::size_t& i) {
  const char* begin = s.c_str() + i;
  char* end = nullptr;
  const double d = std::strtod(begin, &end);
  if (end == begin) throw ConfigError("expected a number at '" + s.substr(i) + "'");
  i += static_cast<std::size_t>(end - begin);
  return d;
}

inline Value parse_value(const std::string& text) {
  std::size_t i = 0;
  skip_space(text, i);
  if (i >= text.size()) throw ConfigError("missing value");
  Value out;
  if (text[i] == '"') {
    std::string str;
    ++i;
    while (i < text.size() && text[i] != '"') {
      if (text[i] == '\\' && i + 1 < text.size()) ++i;
      str += text[i++];
    }
    if (i >= text.size()) throw ConfigError("unterminated string");
    ++i;
    out = str;
  } else if (text.compare(i, 4, "true") == 0) {
    i += 4;
    out = true;
  } else if (text.compare(i, 5, "false") == 0) {
    i += 5;
    out = false;
  } else if (text[i] == '[') {
    ++i;
    skip_space(text, i);
    if (i < text.size() && text[i] == '[') {
      Table table;
      while (true) {
        skip_space(text, i);
        if (i >= text.size() || text[i] != '[') throw ConfigError("expected '[' in table");
        ++i;
        List row;
        skip_space(text, i);
        while (i < text.size() && text[i] != ']') {
          row.push_back(parse_number_token(text, i));
          skip_space(text, i);
          if (i < text.size() && text[i] == ',') ++i;
          skip_space(text, i);
        }
        if (i >= text.size()) throw ConfigError("unterminated list");
        ++i;
        table.push_back(row);
        skip_space(text, i);
        if (i < text.size() && text[i] == ',') ++i;
        skip_space(text, i);
        if (i < text.size() && text[i] == ']') {
          ++i;
          break;
        }
      }
      out = table;
    } else {
      List l;
      while (i < text.size() && text[i] != ']') {
        l.push_back(parse_number_token(text, i));
        skip_space(text, i);
        if (i < text.size() && text[i] == ',') ++i;
        skip_space(text, i);
      }
      if (i >= text.size()) throw ConfigError("unterminated list");
      ++i;
      out = l;
    }
  } else {
    out = parse_number_token(text, i);
  }
  skip_space(text, i);
  if (i != text.size()) throw ConfigError("trailing characters '" + text.substr(i) + "'");
  return out;
}

// Shortest text that parses back to the same double.
inline std::string format_number(double d) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, res.ptr);
}

inline std::string format_list(const List& l) {
  std::string s = "[";
  for (std::size_t i = 0; i < l.size(); ++i) s += (i ? ", " : "") + format_number(l[i]);
  return s + "]";
}

inline std::string format_value(const Value& v) {
  switch (v.index()) {
    case 0: return format_number(std::get<Number>(v));
    case 1: return std::get<bool>(v) ? "true" : "false";
    case 2: {
      std::string s = "\"";
      for (char ch : std::get<std::string>(v)) {
        if (ch == '"' || ch == '\\') s += '\\';
        s += ch;
      }
      return s + "\"";
    }
    case 3: return format_list(std::get<List>(v));
    default: {
      const Table& t = std::get<Table>(v);
      if (t.empty()) return "[]";
      std::string s = "[";
      for (std::size_t i = 0; i < t.size(); ++i) s += (i ? ", " : "") + format_list(t[i]);
      return s + "]";
    }
  }
}

inline std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string env_name(const std::string& section, const std::string& key) {
  std::string name = "LPVGUIDE_" + section + "_" + key;
  for (char& ch : name) {
    ch = ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  }
  return name;
}

}  // namespace config_detail

/// Parses on top of the defaults; keys not mentioned keep their default.
inline RunConfig parse_config(std::istream& in, const std::string& source = "config") {
  using namespace config_detail;
  RunConfig cfg;
  auto table = fields(cfg);
  std::string section;
  std::string line;
  int lineno = 0;
  const auto fail = [&](const std::string& msg) {
    throw ConfigError(source + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(strip_comment(line));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') fail("malformed section header");
      section = trim(text.substr(1, text.size() - 2));
      bool known = false;
      for (const auto& f : table) known = known || f.section == section;
      if (!known) fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(text.substr(0, eq));
    if (section.empty()) fail("key '" + key + "' outside a section");
    Field* field = nullptr;
    for (auto& f : table) {
      if (f.section == section && f.key == key) field = &f;
    }
    if (!field) fail("unknown key '" + key + "' in [" + section + "]");
    try {
      field->set(parse_value(text.substr(eq + 1)));
    } catch (const ConfigError& e) {
      fail(key + ": " + e.what());
    }
  }
  cfg.lpv.steering_max = cfg.limits.steering_max;
  cfg.validate();
  return cfg;
}

inline RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  return parse_config(in, path);
}

/// Applies LPVGUIDE_<SECTION>_<KEY> variables. `lookup` defaults to getenv.
inline void apply_env_overrides(RunConfig& cfg,
                                const std::function<const char*(const std::string&)>& lookup =
                                    [](const std::string& name) { return std::getenv(name.c_str()); }) {
  using namespace config_detail;
  auto table = fields(cfg);
  for (auto& f : table) {
    const std::string name = env_name(f.section, f.key);
    const char* value = lookup(name);
    if (!value) continue;
    try {
      f.set(parse_value(value));
    } catch (const ConfigError& e) {
      throw ConfigError(name + ": " + e.what());
    }
  }
  cfg.lpv.steering_max = cfg.limits.steering_max;
  cfg.validate();
}

inline void write_config(const RunConfig& cfg, std::ostream& out) {
  using namespace config_detail;
  RunConfig copy = cfg;
  const auto table = fields(copy);
  std::string section;
  for (const auto& f : table) {
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << format_value(f.get()) << '\n';
  }
}

inline std::string config_to_string(const RunConfig& cfg) {
  std::ostringstream os;
  write_config(cfg, os);
  return os.str();
}

}  // namespace lpvguide
