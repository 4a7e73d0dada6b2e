#pragma once
// Run configuration: flat `key = value` text with sectioned keys
//   suite.id, suite.seed, suite.out, suite.<param>
//   target.id
//   grid.n
//   tol.<name>
//   convention.<name>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fueterlab/errors.hpp"
#include "fueterlab/io.hpp"
#include "fueterlab/spheremaps/map.hpp"
#include "fueterlab/targets/core.hpp"

namespace fueterlab::cli {

using Json = nlohmann::ordered_json;

constexpr const char* kVersion = "1.0.0";

// bad flags, unknown ids, malformed config: exit status 2
struct UsageError : Error {
  using Error::Error;
};

struct RunConfig {
  std::string suite;
  std::string target;  // empty: suite default
  int grid = 0;        // 0: suite default
  std::uint64_t seed = 1;
  std::string out;
  std::map<std::string, double> tol;
  std::map<std::string, double> params;
  std::map<std::string, std::string> convention;
};

inline std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw UsageError("'" + key + "' expects a number, got '" + v + "'");
  return x;
}

inline std::uint64_t parse_seed(const std::string& v) {
  std::size_t used = 0;
  std::uint64_t x = 0;
  try {
    if (!v.empty() && v[0] != '-') x = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw UsageError("seed expects a non-negative integer, got '" + v + "'");
  return x;
}

inline int parse_grid(const std::string& v) {
  double x = parse_double("grid", v);
  if (x < 1 || x != static_cast<int>(x)) throw UsageError("grid expects a positive integer, got '" + v + "'");
  return static_cast<int>(x);
}

// Apply one sectioned key. Later assignments win, so flags given after
// --config override the file.
inline void apply_key(RunConfig& c, const std::string& key, const std::string& value) {
  auto dot = key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == key.size())
    throw UsageError("config key '" + key + "' is not of the form section.name");
  const std::string sec = key.substr(0, dot), name = key.substr(dot + 1);
  if (sec == "suite") {
    if (name == "id")
      c.suite = value;
    else if (name == "seed")
      c.seed = parse_seed(value);
    else if (name == "out")
      c.out = value;
    else
      c.params[name] = parse_double(key, value);
  } else if (sec == "target") {
    if (name != "id") throw UsageError("unknown key '" + key + "'");
    c.target = value;
  } else if (sec == "grid") {
    if (name != "n") throw UsageError("unknown key '" + key + "'");
    c.grid = parse_grid(value);
  } else if (sec == "tol") {
    double t = parse_double(key, value);
    if (!(t > 0)) throw UsageError("tolerance '" + key + "' must be positive");
    c.tol[name] = t;
  } else if (sec == "convention") {
    c.convention[name] = value;
  } else {
    throw UsageError("unknown config section '" + sec + "'");
  }
}

inline void read_config(RunConfig& c, std::istream& is, const std::string& origin = "config") {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    apply_key(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

inline void read_config_file(RunConfig& c, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config file '" + path + "'");
  read_config(c, f, path);
}

// Sphere-map convention selected by convention.sigma / convention.side; the
// remaining table entries are fixed at build time and may only be restated.
inline SphereConvention sphere_convention(const RunConfig& c) {
  SphereConvention s;
  if (auto it = c.convention.find("sigma"); it != c.convention.end()) {
    double v = parse_double("convention.sigma", it->second);
    if (v != 1 && v != -1) throw UsageError("convention.sigma must be +1 or -1");
    s.sigma = static_cast<int>(v);
  }
  if (auto it = c.convention.find("side"); it != c.convention.end()) {
    if (it->second == "left")
      s.side = MultSide::left;
    else if (it->second == "right")
      s.side = MultSide::right;
    else
      throw UsageError("convention.side must be left or right");
  }
  return s;
}

inline Json fixed_conventions() {
  Json j;
  j["version"] = Conventions::version;
  j["permuting_sign"] = Conventions::permuting_sign;
  j["fiber_period"] = Conventions::fiber_period;
  j["lambda_sign"] = Conventions::lambda_sign;
  j["iota_sign"] = Conventions::iota_sign;
  j["triholo_sigma"] = Conventions::triholo_sigma;
  return j;
}

inline void validate_conventions(const RunConfig& c) {
  const Json fixed = fixed_conventions();
  for (auto& [k, v] : c.convention) {
    if (k == "sigma" || k == "side") continue;
    if (!fixed.contains(k)) throw UsageError("unknown convention '" + k + "'");
    double want = fixed[k].get<double>();
    if (parse_double("convention." + k, v) != want) {
      std::ostringstream os;
      os << "convention." << k << " is fixed at " << want << " in this build";
      throw UsageError(os.str());
    }
  }
  sphere_convention(c);
}

inline Json convention_table(const RunConfig& c) {
  Json j = fixed_conventions();
  SphereConvention s = sphere_convention(c);
  j["sphere_sigma"] = s.sigma;
  j["sphere_side"] = s.side == MultSide::left ? "left" : "right";
  return j;
}

inline Json config_echo(const RunConfig& c) {
  Json j;
  j["suite.id"] = c.suite;
  j["suite.seed"] = c.seed;
  j["target.id"] = c.target;
  j["grid.n"] = c.grid;
  for (auto& [k, v] : c.params) j["suite." + k] = v;
  for (auto& [k, v] : c.tol) j["tol." + k] = v;
  for (auto& [k, v] : c.convention) j["convention." + k] = v;
  return j;
}

inline Json version_table() {
  Json j;
  j["fueterlab"] = kVersion;
  j["convention_table"] = Conventions::version;
  j["file_format"] = io::kFormatVersion;
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
#if defined(__clang__)
  j["compiler"] = "clang " __clang_version__;
#elif defined(__GNUC__)
  j["compiler"] = "gcc " __VERSION__;
#endif
  return j;
}

}  // namespace fueterlab::cli
