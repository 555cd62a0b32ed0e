#pragma once

// Run configuration in flat "key = value" text form with '#' comments.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kcmc/errors.hpp"
#include "kcmc/exhaustion.hpp"
#include "kcmc/solver.hpp"

namespace kcmc {

struct RunConfig {
  double theta = 0.0;
  double H = 0.0;
  BoundaryTrace::Kind boundary_kind = BoundaryTrace::Kind::Constant;
  std::vector<double> boundary_params{0.0};
  int n_alpha = 64;
  int n_beta = 128;
  int k_max = 5;
  double cauchy_tol = 1e-6;
  double cauchy_radius = 2.0;
  Ramp ramp = Ramp::SinSquared;
  double solver_tol = 1e-9;
  int max_newton = 50;
  double dH = 0.1;
  LinearSolver linear = LinearSolver::Direct;
  std::string output_dir = "kcmc_out";

  bool operator==(const RunConfig&) const = default;

  ModelSpec model() const { return ModelSpec(KillingMotion(theta), H); }
  BoundaryTrace boundary() const { return BoundaryTrace::from_params(boundary_kind, boundary_params); }

  ExhaustionConfig exhaustion() const {
    ExhaustionConfig cfg;
    cfg.n_alpha = n_alpha;
    cfg.n_beta = n_beta;
    cfg.k_max = k_max;
    cfg.cauchy_tol = cauchy_tol;
    cfg.cauchy_radius = cauchy_radius;
    cfg.ramp = ramp;
    cfg.solver.tol = solver_tol;
    cfg.solver.max_newton = max_newton;
    cfg.solver.dH = dH;
    cfg.solver.linear = linear;
    return cfg;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline ConfigError config_error(const std::string& msg, std::optional<int> line,
                                std::optional<std::string> key) {
  std::ostringstream os;
  if (line) os << "line " << *line << ": ";
  if (key) os << key->c_str() << ": ";
  os << msg;
  ConfigError err(os.str());
  err.line = line;
  err.key = std::move(key);
  return err;
}

inline double parse_real(const std::string& text, int line, const std::string& key) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw config_error("expected a finite number, got '" + text + "'", line, key);
  return v;
}

inline int parse_int(const std::string& text, int line, const std::string& key) {
  int v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw config_error("expected an integer, got '" + text + "'", line, key);
  return v;
}

inline std::vector<double> parse_list(const std::string& text, int line, const std::string& key) {
  std::vector<double> out;
  std::string item;
  std::istringstream is(text);
  while (is >> item) {
    while (!item.empty() && item.back() == ',') item.pop_back();
    if (!item.empty()) out.push_back(parse_real(item, line, key));
  }
  return out;
}

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Checks value ranges; errors name the offending key.
inline void validate(const RunConfig& c) {
  using detail::config_error;
  if (!std::isfinite(c.H) || !(std::abs(c.H) < 1.0)) {
    ConstraintViolation err("model.H: mean curvature must satisfy |H| < 1 (curvature bound alpha = 1), got " +
                            detail::format_real(c.H));
    err.key = "model.H";
    err.H = c.H;
    throw err;
  }
  if (!std::isfinite(c.theta)) throw config_error("must be finite", std::nullopt, "model.theta");
  if (c.n_alpha < 16) throw config_error("must be >= 16", std::nullopt, "grid.n_alpha");
  if (c.n_beta < 16) throw config_error("must be >= 16", std::nullopt, "grid.n_beta");
  if (c.k_max < 3) throw config_error("must be >= 3", std::nullopt, "exhaustion.k_max");
  if (!(c.cauchy_tol > 0.0)) throw config_error("must be > 0", std::nullopt, "exhaustion.cauchy_tol");
  if (!(c.cauchy_radius > 0.0)) throw config_error("must be > 0", std::nullopt, "exhaustion.cauchy_radius");
  if (!(c.solver_tol > 0.0)) throw config_error("must be > 0", std::nullopt, "solver.tol");
  if (c.max_newton < 1) throw config_error("must be >= 1", std::nullopt, "solver.max_newton");
  if (!(c.dH > 0.0)) throw config_error("must be > 0", std::nullopt, "solver.dH");
  if (c.output_dir.empty()) throw config_error("must not be empty", std::nullopt, "output.dir");
  try {
    (void)c.boundary();
  } catch (const InvalidInput& e) {
    throw config_error(e.what(), std::nullopt, "boundary.params");
  }
}

inline RunConfig parse_config_text(const std::string& text) {
  using detail::config_error;
  RunConfig c;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = detail::trim(std::string_view(raw).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw config_error("expected 'key = value'", line, std::nullopt);
    const std::string key = detail::trim(std::string_view(body).substr(0, eq));
    const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw config_error("missing key before '='", line, std::nullopt);
    if (!seen.insert(key).second) throw config_error("duplicate key", line, key);
    if (value.empty()) throw config_error("missing value", line, key);

    if (key == "model.theta") c.theta = detail::parse_real(value, line, key);
    else if (key == "model.H") c.H = detail::parse_real(value, line, key);
    else if (key == "boundary.kind") {
      if (value == "constant") c.boundary_kind = BoundaryTrace::Kind::Constant;
      else if (value == "fourier") c.boundary_kind = BoundaryTrace::Kind::Fourier;
      else if (value == "samples") c.boundary_kind = BoundaryTrace::Kind::Samples;
      else throw config_error("expected constant, fourier or samples, got '" + value + "'", line, key);
    } else if (key == "boundary.params") c.boundary_params = detail::parse_list(value, line, key);
    else if (key == "grid.n_alpha") c.n_alpha = detail::parse_int(value, line, key);
    else if (key == "grid.n_beta") c.n_beta = detail::parse_int(value, line, key);
    else if (key == "exhaustion.k_max") c.k_max = detail::parse_int(value, line, key);
    else if (key == "exhaustion.cauchy_tol") c.cauchy_tol = detail::parse_real(value, line, key);
    else if (key == "exhaustion.cauchy_radius") c.cauchy_radius = detail::parse_real(value, line, key);
    else if (key == "exhaustion.ramp") {
      if (value == "sin2") c.ramp = Ramp::SinSquared;
      else if (value == "smoothstep") c.ramp = Ramp::Smoothstep;
      else throw config_error("expected sin2 or smoothstep, got '" + value + "'", line, key);
    } else if (key == "solver.tol") c.solver_tol = detail::parse_real(value, line, key);
    else if (key == "solver.max_newton") c.max_newton = detail::parse_int(value, line, key);
    else if (key == "solver.dH") c.dH = detail::parse_real(value, line, key);
    else if (key == "solver.linear") {
      if (value == "direct") c.linear = LinearSolver::Direct;
      else if (value == "iterative") c.linear = LinearSolver::Iterative;
      else throw config_error("expected direct or iterative, got '" + value + "'", line, key);
    } else if (key == "output.dir") c.output_dir = value;
    else throw config_error("unknown key", line, key);
  }
  for (const char* required : {"model.H", "model.theta", "boundary.kind", "boundary.params"})
    if (!seen.count(required)) throw config_error("required key is missing", std::nullopt, required);
  validate(c);
  return c;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read config file " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return parse_config_text(os.str());
}

inline std::string serialize(const RunConfig& c) {
  using detail::format_real;
  std::ostringstream os;
  os << "model.theta = " << format_real(c.theta) << '\n';
  os << "model.H = " << format_real(c.H) << '\n';
  os << "boundary.kind = " << to_string(c.boundary_kind) << '\n';
  os << "boundary.params =";
  for (double p : c.boundary_params) os << ' ' << format_real(p);
  os << '\n';
  os << "grid.n_alpha = " << c.n_alpha << '\n';
  os << "grid.n_beta = " << c.n_beta << '\n';
  os << "exhaustion.k_max = " << c.k_max << '\n';
  os << "exhaustion.cauchy_tol = " << format_real(c.cauchy_tol) << '\n';
  os << "exhaustion.cauchy_radius = " << format_real(c.cauchy_radius) << '\n';
  os << "exhaustion.ramp = " << (c.ramp == Ramp::SinSquared ? "sin2" : "smoothstep") << '\n';
  os << "solver.tol = " << format_real(c.solver_tol) << '\n';
  os << "solver.max_newton = " << c.max_newton << '\n';
  os << "solver.dH = " << format_real(c.dH) << '\n';
  os << "solver.linear = " << (c.linear == LinearSolver::Direct ? "direct" : "iterative") << '\n';
  os << "output.dir = " << c.output_dir << '\n';
  return os.str();
}

}  // namespace kcmc
