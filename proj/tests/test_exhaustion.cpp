#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kcmc/exhaustion.hpp"
#include "kcmc/oracles.hpp"

using namespace kcmc;

namespace {

constexpr double pi = std::numbers::pi;

ExhaustionConfig small(int k_max = 4) {
  ExhaustionConfig cfg;
  cfg.n_alpha = 32;
  cfg.n_beta = 64;
  cfg.k_max = k_max;
  cfg.curvature_monitor = false;
  return cfg;
}

BoundaryTrace twist() { return BoundaryTrace::fourier(0.0, {0.3}, {0.0, 0.1}); }

}  // namespace

TEST(BoundaryTrace, Constant) {
  const BoundaryTrace c = BoundaryTrace::constant(0.7);
  EXPECT_EQ(c.kind(), BoundaryTrace::Kind::Constant);
  EXPECT_EQ(c(1.0), 0.7);
  EXPECT_EQ(c.mean(), 0.7);
  EXPECT_EQ(c.osc(), 0.0);
  EXPECT_STREQ(to_string(c.kind()), "constant");
  EXPECT_THROW(BoundaryTrace::from_params(BoundaryTrace::Kind::Constant, {1, 2}), InvalidInput);
  EXPECT_THROW(BoundaryTrace::constant(NAN), InvalidInput);
}

TEST(BoundaryTrace, Fourier) {
  const BoundaryTrace f = BoundaryTrace::fourier(0.1, {0.3}, {0.0, 0.2});
  EXPECT_EQ(f.params(), (std::vector<double>{0.1, 0.3, 0.0, 0.0, 0.2}));
  for (double b = 0; b < 2 * pi; b += 0.3)
    EXPECT_NEAR(f(b), 0.1 + 0.3 * std::cos(b) + 0.2 * std::sin(2 * b), 1e-15);
  EXPECT_EQ(f.mean(), 0.1);
  const BoundaryTrace cosine = BoundaryTrace::fourier(0.0, {1.0}, {});
  EXPECT_NEAR(cosine.sup(), 1.0, 1e-12);
  EXPECT_NEAR(cosine.inf(), -1.0, 1e-12);
  EXPECT_STREQ(to_string(f.kind()), "fourier");
}

TEST(BoundaryTrace, Samples) {
  const std::vector<double> v{0.0, 1.0, 0.5, -0.5, 0.2, 0.1};
  const BoundaryTrace s = BoundaryTrace::samples(v);
  for (std::size_t j = 0; j < v.size(); ++j) EXPECT_NEAR(s(2 * pi * j / v.size()), v[j], 1e-14);
  EXPECT_NEAR(s(2 * pi), v[0], 1e-14);
  EXPECT_NEAR(s.mean(), 1.3 / 6, 1e-15);
  EXPECT_GE(s.sup(), 1.0);
  EXPECT_LE(s.inf(), -0.5);
  EXPECT_THROW(BoundaryTrace::samples({1, 2, 3}), InvalidInput);
  EXPECT_STREQ(to_string(s.kind()), "samples");
}

TEST(BoundaryTrace, Rotation) {
  const BoundaryTrace f = twist();
  const BoundaryTrace r = f.rotated(0.4);
  for (double b = 0; b < 2 * pi; b += 0.5) EXPECT_NEAR(r(b), f(b - 0.4), 1e-15);
  EXPECT_NEAR(r.sup(), f.sup(), 1e-12);
  EXPECT_NEAR(r.inf(), f.inf(), 1e-12);
  EXPECT_EQ(r.mean(), f.mean());
}

TEST(Extension, RampValues) {
  for (Ramp ramp : {Ramp::SinSquared, Ramp::Smoothstep}) {
    EXPECT_EQ(ramp_value(ramp, 0.0), 0.0);
    EXPECT_NEAR(ramp_value(ramp, pi / 2), 1.0, 1e-15);
    EXPECT_NEAR(ramp_value(ramp, pi / 4), 0.5, 1e-15);
  }
}

TEST(Extension, FormulaAndPole) {
  const auto g = SectionGrid::make(16, 32, ball_alpha(3), KillingMotion(1.0));
  const GraphField c = extend_boundary(BoundaryTrace::constant(0.3), g);
  for (double v : c.values()) EXPECT_EQ(v, 0.3);

  const GraphField F = extend_boundary(BoundaryTrace::fourier(0.5, {1.0}, {}), g);
  EXPECT_EQ(F[0], 0.5);
  for (int n = 1; n < g->node_count(); ++n) {
    const SectionCoords x = g->coords(n);
    EXPECT_NEAR(F[n], 0.5 + std::pow(std::sin(x.alpha), 2) * std::cos(x.beta), 1e-14);
  }
}

TEST(Barrier, Examples) {
  const Barrier b = barrier_bounds(BoundaryTrace::constant(0.0), 0.5);
  EXPECT_NEAR(b.lower, -0.549306, 1e-6);
  EXPECT_NEAR(b.upper, 0.549306, 1e-6);
  const Barrier z = barrier_bounds(BoundaryTrace::constant(1.0), 0.0);
  EXPECT_EQ(z.lower, 1.0);
  EXPECT_EQ(z.upper, 1.0);
  const Barrier w = barrier_bounds(BoundaryTrace::fourier(0.0, {0.2}, {}), -0.5);
  EXPECT_NEAR(w.upper, 0.2 + std::atanh(0.5), 1e-12);
  EXPECT_NEAR(w.lower, -0.2 - std::atanh(0.5), 1e-12);
  EXPECT_THROW(barrier_bounds(BoundaryTrace::constant(0.0), 1.0), ConstraintViolation);
}

TEST(WarmExtension, PureTranslate) {
  const auto g = SectionGrid::make(20, 16, ball_alpha(4), KillingMotion(1.0));
  GraphField u(g, 0.2);
  const GraphField F(g, 0.9);
  warm_extension(u, F, 8, 14);
  for (int n = 0; n < g->closed_count(14); ++n) EXPECT_NEAR(u[n], 0.9, 1e-14);
}

TEST(WarmExtension, MatchesTargetOnOuterRing) {
  const auto g = SectionGrid::make(20, 16, ball_alpha(4), KillingMotion(1.0));
  GraphField u = extend_boundary(twist(), g);
  for (double& v : u.values()) v *= 0.5;
  const GraphField F = extend_boundary(twist(), g);
  warm_extension(u, F, 8, 14);
  for (int j = 0; j < g->n_beta(); ++j) EXPECT_NEAR(u.at(14, j), F.at(14, j), 1e-14);
}

TEST(Exhaustion, Leaf) {
  for (double theta : {0.0, 1.0}) {
    const ExhaustionResult r = exhaustion_solve(BoundaryTrace::constant(0.7), ModelSpec(KillingMotion(theta), 0.0), small());
    EXPECT_TRUE(r.report.all_converged);
    for (double v : r.u.values()) EXPECT_NEAR(v, 0.7, 1e-9);
    for (const auto& s : r.report.steps) {
      EXPECT_LE(s.solve.final_residual(), 1e-9);
      if (s.k > 2) {
        EXPECT_LE(s.cauchy_delta, 1e-12);
      }
    }
    EXPECT_TRUE(r.report.cauchy_converged);
  }
}

TEST(Exhaustion, CapAgainstRingCap) {
  ExhaustionConfig cfg = small(4);
  cfg.curvature_monitor = true;
  const ExhaustionResult r = exhaustion_solve(BoundaryTrace::constant(0.0), ModelSpec(KillingMotion(1.0), 0.5), cfg);
  ASSERT_EQ(r.report.steps.size(), 3u);
  EXPECT_TRUE(r.report.all_converged);
  const CapSolution cap = CapSolution::through_ring(0.5, r.u.grid().alpha_max(), 0.0);
  double err = 0.0;
  for (int n = 0; n < r.u.size(); ++n) err = std::max(err, std::abs(r.u[n] - cap(r.u.grid().coords(n).alpha)));
  EXPECT_LE(err, 5e-3);
  for (const auto& s : r.report.steps) {
    EXPECT_GE(s.inf_u, r.report.barrier.lower - 1e-8);
    EXPECT_LE(s.sup_u, r.report.barrier.upper + 1e-8);
    EXPECT_LE(s.oracle_mc_max_err, 10 * r.u.grid().d_alpha());
  }
  // Raising the ring towards infinity raises the apex towards arctanh H.
  for (std::size_t i = 1; i < r.report.steps.size(); ++i)
    EXPECT_GT(r.report.steps[i].sup_u, r.report.steps[i - 1].sup_u);
}

TEST(Exhaustion, BoundaryAttainment) {
  const BoundaryTrace phi = twist();
  const ExhaustionResult r = exhaustion_solve(phi, ModelSpec(KillingMotion(1.0), 0.3), small(5));
  double prev = INFINITY;
  for (const auto& s : r.report.steps) {
    const double expected = (1 - ramp_value(Ramp::SinSquared, s.alpha_ring)) * (phi.sup() - phi.inf());
    EXPECT_LE(s.boundary_trace_error, expected);
    EXPECT_LT(s.boundary_trace_error, prev);
    prev = s.boundary_trace_error;
  }
}

TEST(Exhaustion, WarmStartBeatsColdStart) {
  const ExhaustionResult r = exhaustion_solve(twist(), ModelSpec(KillingMotion(1.0), 0.4), small(5));
  for (const auto& s : r.report.steps) {
    if (s.k == 2) {
      EXPECT_FALSE(s.used_warm_start);
      continue;
    }
    EXPECT_TRUE(s.used_warm_start) << "k " << s.k;
    EXPECT_LE(s.warm_start_residual, s.cold_start_residual);
    EXPECT_FALSE(s.used_fallback);
  }
}

TEST(Exhaustion, RotationEquivariance) {
  const ExhaustionConfig cfg = small(4);
  const int shift = 8;
  const double b0 = 2 * pi * shift / cfg.n_beta;
  const ModelSpec model(KillingMotion(1.0), 0.3);
  const ExhaustionResult a = exhaustion_solve(twist(), model, cfg);
  const ExhaustionResult b = exhaustion_solve(twist().rotated(b0), model, cfg);
  const SectionGrid& g = a.u.grid();
  EXPECT_NEAR(a.u[0], b.u[0], 1e-8);
  for (int i = 1; i < g.n_alpha(); ++i)
    for (int j = 0; j < g.n_beta(); ++j) EXPECT_NEAR(b.u.at(i, j + shift), a.u.at(i, j), 1e-8);
}

TEST(Exhaustion, FlowShiftOfTrace) {
  const ExhaustionConfig cfg = small(4);
  const ModelSpec model(KillingMotion(1.0), -0.3);
  const ExhaustionResult a = exhaustion_solve(twist(), model, cfg);
  const ExhaustionResult b = exhaustion_solve(BoundaryTrace::fourier(0.8, {0.3}, {0.0, 0.1}), model, cfg);
  for (int n = 0; n < a.u.size(); ++n) EXPECT_NEAR(b.u[n], a.u[n] + 0.8, 1e-8);
}

TEST(Exhaustion, ReportShape) {
  ExhaustionConfig cfg = small(4);
  cfg.keep_iterates = true;
  const ExhaustionResult r = exhaustion_solve(twist(), ModelSpec(KillingMotion(0.5), 0.2), cfg);
  ASSERT_EQ(r.report.steps.size(), 3u);
  EXPECT_EQ(r.report.iterates.size(), 3u);
  EXPECT_TRUE(std::isnan(r.report.steps[0].cauchy_delta));
  EXPECT_EQ(r.report.gradient_series(1.0).size(), 3u);
  EXPECT_EQ(r.report.gradient_series(2.0).size(), 3u);
  EXPECT_TRUE(r.report.gradient_series(7.0).empty());
  EXPECT_EQ(r.report.steps.back().ring, r.u.grid().n_alpha() - 1);
  for (std::size_t i = 1; i < r.report.steps.size(); ++i)
    EXPECT_GT(r.report.steps[i].ring, r.report.steps[i - 1].ring);
  EXPECT_TRUE(gradient_monitor(r.report).passed());
}

TEST(Exhaustion, RejectsBadConfiguration) {
  EXPECT_THROW(exhaustion_solve(twist(), ModelSpec(KillingMotion(1.0), 0.2), small(2)), InvalidInput);
  ExhaustionConfig coarse = small(8);
  coarse.n_alpha = 6;
  try {
    exhaustion_solve(twist(), ModelSpec(KillingMotion(1.0), 0.2), coarse);
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_TRUE(e.k.has_value());
  }
}

TEST(GradientVerdict, Controls) {
  EXPECT_TRUE(gradient_sequence_verdict({1.0, 1.1, 1.05, 1.08}).passed());
  // Monotone blow-up is rejected.
  const GradientVerdict blow = gradient_sequence_verdict({1.0, 2.0, 4.0, 8.0});
  EXPECT_FALSE(blow.passed());
  EXPECT_FALSE(blow.bounded);
  EXPECT_FALSE(blow.no_blowup);
  // A single spike breaks the bound but not monotonicity.
  const GradientVerdict spike = gradient_sequence_verdict({1.0, 1.0, 5.0, 1.0});
  EXPECT_FALSE(spike.bounded);
  EXPECT_TRUE(spike.no_blowup);
  EXPECT_FALSE(gradient_sequence_verdict({1.0, 1.0}).passed());
}
