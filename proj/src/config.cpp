#include "ringbif/config.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace ringbif {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& v, const std::string& where) {
  size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a number, got '" + v + "'");
  }
  if (used != v.size())
    throw ConfigError(where + ": trailing characters after number in '" + v + "'");
  return x;
}

long parse_long(const std::string& v, const std::string& where) {
  size_t used = 0;
  long x = 0;
  try {
    x = std::stol(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected an integer, got '" + v + "'");
  }
  if (used != v.size())
    throw ConfigError(where + ": trailing characters after integer in '" + v + "'");
  return x;
}

}  // namespace

const char* to_string(ProblemKind kind) {
  return kind == ProblemKind::satellite ? "satellite" : "nbody";
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open configuration file");

  RunConfig cfg;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> schema = {
      {"schema_version",
       [&](const std::string& v, const std::string& w) {
         if (parse_long(v, w) != 1)
           throw ConfigError(w + ": unsupported schema_version '" + v + "'");
       }},
      {"problem",
       [&](const std::string& v, const std::string& w) {
         if (v == "satellite")
           cfg.problem = ProblemKind::satellite;
         else if (v == "nbody")
           cfg.problem = ProblemKind::nbody;
         else
           throw ConfigError(w + ": problem must be 'satellite' or 'nbody', got '" +
                             v + "'");
       }},
      {"n", [&](const std::string& v, const std::string& w) { cfg.n = static_cast<int>(parse_long(v, w)); }},
      {"mu", [&](const std::string& v, const std::string& w) { cfg.mu = parse_double(v, w); }},
      {"nu_min", [&](const std::string& v, const std::string& w) { cfg.nu_min = parse_double(v, w); }},
      {"nu_max", [&](const std::string& v, const std::string& w) { cfg.nu_max = parse_double(v, w); }},
      {"nu_step", [&](const std::string& v, const std::string& w) { cfg.nu_step = parse_double(v, w); }},
      {"refine_tol", [&](const std::string& v, const std::string& w) { cfg.refine_tol = parse_double(v, w); }},
      {"L", [&](const std::string& v, const std::string& w) { cfg.L = static_cast<int>(parse_long(v, w)); }},
      {"newton_tol", [&](const std::string& v, const std::string& w) { cfg.newton_tol = parse_double(v, w); }},
      {"eps0", [&](const std::string& v, const std::string& w) { cfg.eps0 = parse_double(v, w); }},
      {"h0", [&](const std::string& v, const std::string& w) { cfg.h0 = parse_double(v, w); }},
      {"steps", [&](const std::string& v, const std::string& w) { cfg.steps = static_cast<int>(parse_long(v, w)); }},
      {"event", [&](const std::string& v, const std::string& w) { cfg.event = static_cast<int>(parse_long(v, w)); }},
      {"dt", [&](const std::string& v, const std::string& w) { cfg.dt = parse_double(v, w); }},
      {"closure_dt", [&](const std::string& v, const std::string& w) { cfg.closure_dt = parse_double(v, w); }},
      {"seed",
       [&](const std::string& v, const std::string& w) {
         const long s = parse_long(v, w);
         if (s < 0) throw ConfigError(w + ": seed must be non-negative");
         cfg.seed = static_cast<unsigned>(s);
       }},
      {"grid_radial", [&](const std::string& v, const std::string& w) { cfg.grid.radial = static_cast<int>(parse_long(v, w)); }},
      {"grid_angular", [&](const std::string& v, const std::string& w) { cfg.grid.angular = static_cast<int>(parse_long(v, w)); }},
      {"grid_rmin", [&](const std::string& v, const std::string& w) { cfg.grid.rmin = parse_double(v, w); }},
      {"grid_rmax", [&](const std::string& v, const std::string& w) { cfg.grid.rmax = parse_double(v, w); }},
      {"mu_sweep_min", [&](const std::string& v, const std::string& w) { cfg.mu_sweep_min = parse_double(v, w); }},
      {"mu_sweep_max", [&](const std::string& v, const std::string& w) { cfg.mu_sweep_max = parse_double(v, w); }},
      {"mu_sweep_count", [&](const std::string& v, const std::string& w) { cfg.mu_sweep_count = static_cast<int>(parse_long(v, w)); }},
      {"out", [&](const std::string& v, const std::string&) { cfg.out = v; }},
  };

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": missing key before '='");
    const auto it = schema.find(key);
    if (it == schema.end())
      throw ConfigError(where + ": unknown key '" + key + "'");
    it->second(value, where);
  }

  validate(cfg, path);
  return cfg;
}

void validate(const RunConfig& cfg, const std::string& path) {
  const auto fail = [&](const std::string& msg) { throw ConfigError(path + ": " + msg); };
  if (cfg.n < 2) fail("n must be at least 2");
  if (cfg.mu < 0.0) fail("mu must be non-negative");
  if (cfg.nu_min <= 0.0) fail("nu_min must be positive");
  if (cfg.nu_max < 0.0) fail("nu_max must be zero (auto) or positive");
  if (cfg.nu_max > 0.0 && cfg.nu_max <= cfg.nu_min)
    fail("empty frequency range: nu_max must exceed nu_min");
  if (cfg.nu_step <= 0.0) fail("nu_step must be positive");
  if (cfg.refine_tol <= 0.0) fail("refine_tol must be positive");
  if (cfg.L < 0) fail("L must be non-negative (0 = family default)");
  if (cfg.L > 64) fail("L beyond 64 is not supported");
  if (cfg.newton_tol <= 0.0) fail("newton_tol must be positive");
  if (cfg.eps0 < 1e-4 || cfg.eps0 > 1e-2)
    fail("eps0 must lie in [1e-4, 1e-2]");
  if (cfg.h0 <= 0.0) fail("h0 must be positive");
  if (cfg.steps < 0) fail("steps must be non-negative");
  if (cfg.event < 0) fail("event must be non-negative");
  if (cfg.dt <= 0.0) fail("dt must be positive");
  if (cfg.closure_dt <= 0.0) fail("closure_dt must be positive");
  if (cfg.grid.radial < 1 || cfg.grid.angular < 1)
    fail("grid counts must be at least 1");
  if (cfg.grid.rmin <= 0.0 || cfg.grid.rmax <= cfg.grid.rmin)
    fail("grid radii must satisfy 0 < rmin < rmax");
  if (cfg.mu_sweep_count < 0) fail("mu_sweep_count must be non-negative");
  if (cfg.mu_sweep_count > 0 &&
      (cfg.mu_sweep_min <= 0.0 || cfg.mu_sweep_max <= cfg.mu_sweep_min))
    fail("mu sweep needs 0 < mu_sweep_min < mu_sweep_max");
  if (cfg.out.empty()) fail("out must not be empty");
}

int effective_L(const RunConfig& cfg) {
  if (cfg.L > 0) return cfg.L;
  return cfg.problem == ProblemKind::satellite ? 16 : 12;
}

}  // namespace ringbif
