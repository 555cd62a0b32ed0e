// kcmc: solve | verify | oracle | export-mesh --config <path> [--out <dir>]

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "kcmc/kcmc.hpp"

namespace {

using namespace kcmc;

std::string output_dir(const std::string& flag, const RunConfig& cfg) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("KCMC_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return cfg.output_dir;
}

// Error record goes to <dir>/error.json when a directory is known, and to
// stderr in every case.
int fail(const Error& e, const std::string& dir) {
  const Json j = error_json(e);
  std::cerr << j.dump() << '\n';
  if (!dir.empty()) {
    try {
      ensure_directory(dir);
      write_json(j, dir + "/error.json");
    } catch (const Error&) {
    }
  }
  return 2;
}

struct ConfigCheck {
  std::string name;
  bool passed;
  std::string detail;
};

std::vector<ConfigCheck> check_run(const ExhaustionResult& res, const BoundaryTrace& phi, double H) {
  const ExhaustionReport& r = res.report;
  std::vector<ConfigCheck> out;
  out.push_back({"all solves converged", r.all_converged, ""});

  const Barrier b = barrier_bounds(phi, H);
  double excess = -INFINITY, mc = 0.0;
  for (const auto& s : r.steps) {
    excess = std::max({excess, b.lower - s.inf_u, s.sup_u - b.upper});
    mc = std::max(mc, s.oracle_mc_max_err);
  }
  out.push_back({"heights inside barrier", excess <= tolerance::height_slack,
                 detail::fmt("largest excess %.3e", excess)});
  const double h = res.u.grid().d_alpha();
  out.push_back({"curvature oracle", mc <= tolerance::curvature_per_spacing * h,
                 detail::fmt("max |H_mesh - H| = %.3e, limit %.3e", mc, tolerance::curvature_per_spacing * h)});
  const GradientVerdict g = gradient_monitor(r, 1.0);
  out.push_back({"gradient bounded on B_1", g.passed(), detail::fmt("max %.4f median %.4f", g.max, g.median)});
  return out;
}

int cmd_solve(const RunConfig& cfg, const std::string& dir) {
  ensure_directory(dir);
  const ExhaustionResult res = exhaustion_solve(cfg.boundary(), cfg.model(), cfg.exhaustion());
  write_report_csv(res.report, dir + "/report.csv");
  write_json(summary_json(cfg, res.report), dir + "/summary.json");
  export_mesh(res.u, dir + "/solution.obj");
  for (const auto& s : res.report.steps)
    std::printf("k=%d alpha=%.6f newton=%d residual=%.3e u in [%.6f, %.6f] cauchy=%.3e\n", s.k, s.alpha_ring,
                s.solve.total_newton_iterations, s.solve.final_residual(), s.inf_u, s.sup_u, s.cauchy_delta);
  const auto checks = check_run(res, cfg.boundary(), cfg.H);
  std::printf("cauchy converged (tol %.1e): %s\n", cfg.cauchy_tol, res.report.cauchy_converged ? "yes" : "no");
  std::printf("artifacts written to %s\n", dir.c_str());
  return checks[0].passed && checks[1].passed ? 0 : 1;
}

int cmd_verify(const RunConfig& cfg, const std::string& dir) {
  ensure_directory(dir);
  Json j;
  j["config"] = config_json(cfg);
  bool ok = true;

  Json config_checks = Json::array();
  try {
    const ExhaustionResult res = exhaustion_solve(cfg.boundary(), cfg.model(), cfg.exhaustion());
    for (const auto& c : check_run(res, cfg.boundary(), cfg.H)) {
      std::printf("[%s] config run: %s %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
      config_checks.push_back({{"check", c.name}, {"passed", c.passed}, {"detail", c.detail}});
      ok = ok && c.passed;
    }
  } catch (const Error& e) {
    std::printf("[FAIL] config run: %s\n", e.what());
    config_checks.push_back(error_json(e));
    ok = false;
  }
  j["config_run"] = config_checks;

  AcceptanceSuite suite;
  Json criteria = Json::array();
  for (int id = 1; id <= 9; ++id) {
    const CriterionResult r = suite.criterion(id);
    std::printf("%s\n", format_result(r).c_str());
    std::fflush(stdout);
    criteria.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    ok = ok && r.passed;
  }
  j["criteria"] = criteria;
  j["status"] = ok ? "verified" : "failed";
  write_json(j, dir + "/verify.json");
  return ok ? 0 : 1;
}

int cmd_oracle(const RunConfig& cfg, const std::string& dir) {
  ensure_directory(dir);
  const BoundaryTrace phi = cfg.boundary();
  if (phi.osc() != 0.0)
    std::printf("note: oracle profiles are rotationally symmetric; using the mean %.6f of the trace\n", phi.mean());
  const double c = phi.mean();
  const double alpha_max = ball_alpha(cfg.k_max);
  const EquivariantProfile prof = equivariant_ode_solve(cfg.theta, cfg.H, c, alpha_max);
  const CapSolution ring_cap = CapSolution::through_ring(cfg.H, alpha_max, c);
  const CapSolution asym = CapSolution::through_ring(cfg.H, std::numbers::pi / 2, c);

  std::string csv = "alpha,u_ode,u_cap_ring,u_cap_asymptotic,cap_gradient\n";
  const int rows = 256;
  for (int i = 0; i <= rows; ++i) {
    const double a = alpha_max * i / rows;
    csv += detail::fmt("%.10e,%.10e,%.10e,%.10e,%.10e\n", a, prof(a), ring_cap(a), asym(a), ring_cap.gradient_norm(a));
  }
  std::FILE* f = std::fopen((dir + "/oracle_profile.csv").c_str(), "wb");
  if (f == nullptr) throw IoError("cannot open " + dir + "/oracle_profile.csv for writing");
  std::fputs(csv.c_str(), f);
  std::fclose(f);

  const Barrier b = barrier_bounds(phi, cfg.H);
  Json j;
  j["config"] = config_json(cfg);
  j["alpha_max"] = alpha_max;
  j["ode_u0"] = prof.u.front();
  j["cap_u0"] = ring_cap(0.0);
  j["barrier"] = {{"lower", b.lower}, {"upper", b.upper}, {"half_width", std::atanh(std::abs(cfg.H))}};
  write_json(j, dir + "/oracle.json");
  std::printf("ode u(0)=%.10f  cap u(0)=%.10f  barrier [%.6f, %.6f]\n", prof.u.front(), ring_cap(0.0), b.lower,
              b.upper);
  return 0;
}

int cmd_export_mesh(const RunConfig& cfg, const std::string& dir) {
  ensure_directory(dir);
  const auto grid = SectionGrid::make(cfg.n_alpha, cfg.n_beta, ball_alpha(cfg.k_max), KillingMotion(cfg.theta));
  const GraphField F = extend_boundary(cfg.boundary(), grid, cfg.ramp);
  export_mesh(F, dir + "/extension.obj");
  std::printf("wrote %s/extension.obj (%d vertices)\n", dir.c_str(), grid->node_count());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constant mean curvature Killing graphs in hyperbolic space"};
  app.require_subcommand(1);
  std::string config_path, out;
  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "configuration file (key = value)")->required();
    sub->add_option("--out", out, "output directory (overrides KCMC_OUTPUT_DIR and output.dir)");
    return sub;
  };
  CLI::App* solve = add("solve", "run the exhaustion scheme and write report.csv, summary.json, solution.obj");
  CLI::App* verify = add("verify", "run the acceptance suite and the checks on the configured run");
  CLI::App* oracle = add("oracle", "tabulate the equivariant ODE profile and umbilic caps");
  CLI::App* mesh = add("export-mesh", "write the graph of the boundary extension F as OBJ");
  CLI11_PARSE(app, argc, argv);

  RunConfig cfg;
  try {
    cfg = parse_config(config_path);
  } catch (const Error& e) {
    const char* env = std::getenv("KCMC_OUTPUT_DIR");
    return fail(e, !out.empty() ? out : (env != nullptr ? env : ""));
  }
  const std::string dir = output_dir(out, cfg);
  try {
    if (solve->parsed()) return cmd_solve(cfg, dir);
    if (verify->parsed()) return cmd_verify(cfg, dir);
    if (oracle->parsed()) return cmd_oracle(cfg, dir);
    if (mesh->parsed()) return cmd_export_mesh(cfg, dir);
  } catch (const Error& e) {
    return fail(e, dir);
  }
  return 1;
}
