#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "kcmc/config.hpp"
#include "kcmc/io.hpp"

using namespace kcmc;

namespace {

const char* kMinimal =
    "model.theta = 1\n"
    "model.H = 0.5\n"
    "boundary.kind = constant\n"
    "boundary.params = 0\n";

std::string read_file(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

template <class E>
E expect_error(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const E& e) {
    return e;
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return E("unreachable");
}

std::filesystem::path temp_dir(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Config, Defaults) {
  const RunConfig c = parse_config_text(kMinimal);
  EXPECT_EQ(c.theta, 1.0);
  EXPECT_EQ(c.H, 0.5);
  EXPECT_EQ(c.n_alpha, 64);
  EXPECT_EQ(c.n_beta, 128);
  EXPECT_EQ(c.k_max, 5);
  EXPECT_EQ(c.cauchy_tol, 1e-6);
  EXPECT_EQ(c.ramp, Ramp::SinSquared);
  EXPECT_EQ(c.linear, LinearSolver::Direct);
  EXPECT_EQ(c.boundary().kind(), BoundaryTrace::Kind::Constant);
}

TEST(Config, CommentsListsAndEnums) {
  const RunConfig c = parse_config_text(
      "# comment\n"
      "model.theta = -0.5   # trailing\n"
      "model.H = -0.3\n"
      "\n"
      "boundary.kind = fourier\n"
      "boundary.params = 0.1, 0.2 0.0\t0.05\n"
      "exhaustion.ramp = smoothstep\n"
      "solver.linear = iterative\n"
      "output.dir = some/where\n");
  EXPECT_EQ(c.boundary_params, (std::vector<double>{0.1, 0.2, 0.0, 0.05}));
  EXPECT_EQ(c.ramp, Ramp::Smoothstep);
  EXPECT_EQ(c.linear, LinearSolver::Iterative);
  EXPECT_EQ(c.output_dir, "some/where");
  EXPECT_EQ(c.exhaustion().solver.linear, LinearSolver::Iterative);
}

TEST(Config, SubcriticalHIsAConstraintViolation) {
  for (const char* h : {"1", "-1", "1.5"}) {
    const ConstraintViolation e = expect_error<ConstraintViolation>(
        std::string("model.theta = 0\nmodel.H = ") + h + "\nboundary.kind = constant\nboundary.params = 0\n");
    ASSERT_TRUE(e.key.has_value());
    EXPECT_EQ(*e.key, "model.H");
    EXPECT_EQ(e.kind(), ErrorKind::ConstraintViolation);
  }
}

TEST(Config, ErrorsCarryLineAndKey) {
  {
    const ConfigError e = expect_error<ConfigError>(std::string(kMinimal) + "grid.n_alpha = many\n");
    EXPECT_EQ(e.line, 5);
    EXPECT_EQ(e.key, "grid.n_alpha");
  }
  {
    const ConfigError e = expect_error<ConfigError>(std::string(kMinimal) + "model.colour = red\n");
    EXPECT_EQ(e.line, 5);
    EXPECT_EQ(e.key, "model.colour");
  }
  {
    const ConfigError e = expect_error<ConfigError>(std::string(kMinimal) + "model.H = 0.1\n");
    EXPECT_EQ(e.line, 5);
    EXPECT_EQ(e.key, "model.H");
  }
  {
    const ConfigError e = expect_error<ConfigError>("model.theta = 1\njust words\n");
    EXPECT_EQ(e.line, 2);
    EXPECT_FALSE(e.key.has_value());
  }
  {
    const ConfigError e = expect_error<ConfigError>("model.theta = 1\nmodel.H = 0\nboundary.kind = constant\n");
    EXPECT_EQ(e.key, "boundary.params");
  }
  {
    const ConfigError e = expect_error<ConfigError>(std::string(kMinimal) + "exhaustion.ramp = cubic\n");
    EXPECT_EQ(e.key, "exhaustion.ramp");
  }
  {
    const ConfigError e = expect_error<ConfigError>(std::string(kMinimal) + "exhaustion.k_max = 2\n");
    EXPECT_EQ(e.key, "exhaustion.k_max");
  }
  {
    const ConfigError e = expect_error<ConfigError>(std::string(kMinimal) + "grid.n_beta = 8\n");
    EXPECT_EQ(e.key, "grid.n_beta");
  }
  {
    const ConfigError e = expect_error<ConfigError>(
        "model.theta = 1\nmodel.H = 0\nboundary.kind = samples\nboundary.params = 1 2 3\n");
    EXPECT_EQ(e.key, "boundary.params");
  }
}

TEST(Config, RoundTrip) {
  RunConfig c = parse_config_text(
      "model.theta = 0.1\nmodel.H = -0.2\nboundary.kind = samples\nboundary.params = 0.1 0.3 -0.2 0.05 1e-3\n"
      "grid.n_alpha = 48\nexhaustion.ramp = smoothstep\nsolver.tol = 1e-10\n");
  const RunConfig back = parse_config_text(serialize(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(serialize(back), serialize(c));
}

TEST(Config, MissingFileIsIoError) {
  EXPECT_THROW(parse_config("/nonexistent/kcmc.conf"), IoError);
}

TEST(Io, ReportCsv) {
  ExhaustionConfig cfg;
  cfg.n_alpha = 24;
  cfg.n_beta = 32;
  cfg.k_max = 3;
  const ExhaustionResult r = exhaustion_solve(BoundaryTrace::constant(0.0), ModelSpec(KillingMotion(1.0), 0.3), cfg);
  const std::string csv = report_csv(r.report);
  std::istringstream is(csv);
  std::string header, row;
  std::getline(is, header);
  EXPECT_EQ(header, "k,alpha_max,newton_iters,residual_inf,inf_u,sup_u,sup_grad_B1,cauchy_delta_B2,oracle_mc_max_err");
  int rows = 0;
  while (std::getline(is, row)) {
    ++rows;
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), 8);
  }
  EXPECT_EQ(rows, 2);
  EXPECT_NE(csv.find(",nan,"), std::string::npos);  // no Cauchy delta at k = 2
  EXPECT_EQ(csv.find('\r'), std::string::npos);

  RunConfig rc;
  rc.H = 0.3;
  rc.theta = 1.0;
  const Json j = summary_json(rc, r.report);
  EXPECT_EQ(j["status"], "converged");
  EXPECT_EQ(j["steps"].size(), 2u);
  EXPECT_TRUE(j["steps"][0]["cauchy_delta"].is_null());
  EXPECT_EQ(j["config"]["model"]["H"], 0.3);
}

TEST(Io, MeshExportIsDeterministic) {
  const auto dir = temp_dir("kcmc_test_io");
  const auto g = SectionGrid::make(20, 32, ball_alpha(3), KillingMotion(1.0));
  const GraphField F = extend_boundary(BoundaryTrace::fourier(0.0, {0.3}, {}), g);
  export_mesh(F, (dir / "a.obj").string());
  export_mesh(F, (dir / "b.obj").string());
  const std::string a = read_file(dir / "a.obj");
  EXPECT_EQ(a, read_file(dir / "b.obj"));
  int vertices = 0;
  std::istringstream is(a);
  std::string line;
  while (std::getline(is, line))
    if (line.rfind("v ", 0) == 0) ++vertices;
  EXPECT_EQ(vertices, 20 * 32 - (32 - 1));

  GraphField bad = F;
  bad[3] = NAN;
  EXPECT_THROW(export_mesh(bad, (dir / "c.obj").string()), InvalidInput);
  std::filesystem::remove_all(dir);
}

TEST(Io, ErrorJson) {
  ConstraintViolation e("bad H");
  e.H = 1.0;
  e.key = "model.H";
  const Json j = error_json(e);
  EXPECT_EQ(j["status"], "error");
  EXPECT_EQ(j["kind"], "ConstraintViolation");
  EXPECT_EQ(j["key"], "model.H");
  EXPECT_EQ(j["H"], 1.0);
  EXPECT_FALSE(j.contains("line"));

  ConfigError c("unknown key");
  c.line = 4;
  EXPECT_EQ(error_json(c)["line"], 4);
  EXPECT_EQ(error_json(c)["kind"], "ConfigError");
}

TEST(Io, EnsureDirectory) {
  const auto dir = temp_dir("kcmc_test_dirs");
  EXPECT_NO_THROW(ensure_directory((dir / "a/b/c").string()));
  EXPECT_TRUE(std::filesystem::is_directory(dir / "a/b/c"));
  std::ofstream((dir / "file").string()) << "x";
  EXPECT_THROW(ensure_directory((dir / "file").string()), IoError);
  std::filesystem::remove_all(dir);
}
