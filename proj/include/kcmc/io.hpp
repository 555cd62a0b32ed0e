#pragma once

// Artifact output: OBJ meshes, the per-k CSV table and JSON run records.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "kcmc/config.hpp"
#include "kcmc/errors.hpp"
#include "kcmc/exhaustion.hpp"
#include "kcmc/mesh.hpp"
#include "kcmc/operator.hpp"

namespace kcmc {

using Json = nlohmann::ordered_json;

/// OBJ of the graph of u, vertices in node order (pole, then alpha-major).
inline void export_mesh(const GraphField& u, const std::string& path, int ring = -1) {
  if (!u.all_finite()) throw InvalidInput("export_mesh: non-finite field values");
  write_obj(embed_graph(u, ring), path);
}

inline void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir);
}

namespace detail {

inline std::string csv_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

inline Json json_real(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << text;
  if (!os) throw IoError("failed writing " + path);
}

inline std::size_t radius_slot(const ExhaustionReport& r, double radius) {
  for (std::size_t i = 0; i < r.gradient_radii.size(); ++i)
    if (r.gradient_radii[i] == radius) return i;
  return r.gradient_radii.size();
}

}  // namespace detail

inline std::string report_csv(const ExhaustionReport& report) {
  std::string out =
      "k,alpha_max,newton_iters,residual_inf,inf_u,sup_u,sup_grad_B1,cauchy_delta_B2,oracle_mc_max_err\n";
  const std::size_t b1 = detail::radius_slot(report, 1.0);
  for (const auto& s : report.steps) {
    out += std::to_string(s.k) + ',' + detail::csv_real(s.alpha_ring) + ',' +
           std::to_string(s.solve.total_newton_iterations) + ',' + detail::csv_real(s.solve.final_residual()) +
           ',' + detail::csv_real(s.inf_u) + ',' + detail::csv_real(s.sup_u) + ',' +
           detail::csv_real(b1 < s.sup_gradient.size() ? s.sup_gradient[b1] : std::nan("")) + ',' +
           detail::csv_real(s.cauchy_delta) + ',' + detail::csv_real(s.oracle_mc_max_err) + '\n';
  }
  return out;
}

inline void write_report_csv(const ExhaustionReport& report, const std::string& path) {
  detail::write_text(path, report_csv(report));
}

inline Json config_json(const RunConfig& c) {
  Json j;
  j["model"] = {{"theta", c.theta}, {"H", c.H}};
  j["boundary"] = {{"kind", to_string(c.boundary_kind)}, {"params", c.boundary_params}};
  j["grid"] = {{"n_alpha", c.n_alpha}, {"n_beta", c.n_beta}};
  j["exhaustion"] = {{"k_max", c.k_max},
                     {"cauchy_tol", c.cauchy_tol},
                     {"cauchy_radius", c.cauchy_radius},
                     {"ramp", c.ramp == Ramp::SinSquared ? "sin2" : "smoothstep"}};
  j["solver"] = {{"tol", c.solver_tol},
                 {"max_newton", c.max_newton},
                 {"dH", c.dH},
                 {"linear", c.linear == LinearSolver::Direct ? "direct" : "iterative"}};
  j["output"] = {{"dir", c.output_dir}};
  return j;
}

/// Run summary: config echo, verdicts and monitor extrema. No timings, so
/// identical runs give identical files.
inline Json summary_json(const RunConfig& c, const ExhaustionReport& r) {
  Json j;
  j["status"] = r.all_converged ? "converged" : "not_converged";
  j["config"] = config_json(c);
  j["barrier"] = {{"lower", r.barrier.lower}, {"upper", r.barrier.upper}};

  double inf_u = INFINITY, sup_u = -INFINITY, worst_res = 0.0, worst_mc = 0.0;
  int newton = 0;
  for (const auto& s : r.steps) {
    inf_u = std::min(inf_u, s.inf_u);
    sup_u = std::max(sup_u, s.sup_u);
    worst_res = std::max(worst_res, s.solve.final_residual());
    if (std::isfinite(s.oracle_mc_max_err)) worst_mc = std::max(worst_mc, s.oracle_mc_max_err);
    newton += s.solve.total_newton_iterations;
  }
  const bool barrier_ok = inf_u >= r.barrier.lower - 1e-8 && sup_u <= r.barrier.upper + 1e-8;
  const GradientVerdict grad = gradient_monitor(r, 1.0);

  j["verdicts"] = {{"all_converged", r.all_converged},
                   {"barrier_respected", barrier_ok},
                   {"cauchy_converged", r.cauchy_converged},
                   {"gradient_bounded", grad.passed()}};
  j["monitors"] = {{"inf_u", inf_u},
                   {"sup_u", sup_u},
                   {"max_final_residual", worst_res},
                   {"max_oracle_mc_err", worst_mc},
                   {"final_cauchy_delta", detail::json_real(r.final_cauchy_delta)},
                   {"total_newton_iterations", newton},
                   {"gradient_B1_max", grad.max},
                   {"gradient_B1_median", grad.median}};
  Json steps = Json::array();
  for (const auto& s : r.steps) {
    Json row;
    row["k"] = s.k;
    row["ring"] = s.ring;
    row["alpha_max"] = s.alpha_ring;
    row["newton_iters"] = s.solve.total_newton_iterations;
    row["residual_inf"] = s.solve.final_residual();
    row["inf_u"] = s.inf_u;
    row["sup_u"] = s.sup_u;
    row["sup_gradient"] = s.sup_gradient;
    row["cauchy_delta"] = detail::json_real(s.cauchy_delta);
    row["oracle_mc_max_err"] = detail::json_real(s.oracle_mc_max_err);
    row["boundary_trace_error"] = s.boundary_trace_error;
    row["warm_start_residual"] = s.warm_start_residual;
    row["cold_start_residual"] = s.cold_start_residual;
    row["used_warm_start"] = s.used_warm_start;
    row["min_ellipticity"] = s.solve.min_ellipticity;
    steps.push_back(row);
  }
  j["steps"] = steps;
  return j;
}

inline Json error_json(const Error& e) {
  Json j;
  j["status"] = "error";
  j["kind"] = to_string(e.kind());
  j["message"] = e.what();
  if (e.H) j["H"] = *e.H;
  if (e.k) j["k"] = *e.k;
  if (e.line) j["line"] = *e.line;
  if (e.key) j["key"] = *e.key;
  return j;
}

inline void write_json(const Json& j, const std::string& path) { detail::write_text(path, j.dump(2) + "\n"); }

}  // namespace kcmc
