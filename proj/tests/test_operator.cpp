#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kcmc/operator.hpp"
#include "kcmc/oracles.hpp"

using namespace kcmc;

namespace {

GraphField cap_field(const std::shared_ptr<const SectionGrid>& g, double H, double value) {
  const CapSolution cap = CapSolution::through_ring(H, g->alpha_max(), value);
  GraphField u(g);
  for (int n = 0; n < g->node_count(); ++n) u[n] = cap(g->coords(n).alpha);
  return u;
}

GraphField wavy_field(const std::shared_ptr<const SectionGrid>& g) {
  GraphField u(g);
  for (int n = 0; n < g->node_count(); ++n) {
    const SectionCoords c = g->coords(n);
    u[n] = 0.2 + 0.3 * std::sin(c.alpha) * std::sin(c.alpha) * std::cos(c.beta) +
           0.1 * std::pow(std::sin(c.alpha), 3) * std::sin(2 * c.beta);
  }
  return u;
}

}  // namespace

TEST(Operator, ConstantHeightIsMinimal) {
  for (double theta : {0.0, 1.0, 3.0})
    for (double c : {-1.0, 0.0, 0.7}) {
      const auto g = SectionGrid::make(24, 32, ball_alpha(3), KillingMotion(theta));
      const ResidualEvaluation r = assemble_residual(GraphField(g, c), 0.0);
      EXPECT_LE(r.sup_norm(), 1e-9) << "theta " << theta;
      EXPECT_EQ(r.non_elliptic, 0);
    }
}

TEST(Operator, ConstantHeightResidualIsMinusTwoH) {
  const auto g = SectionGrid::make(24, 32, ball_alpha(3), KillingMotion(1.0));
  const ResidualEvaluation r = assemble_residual(GraphField(g, 0.0), 0.4);
  for (Eigen::Index i = 0; i < r.values.size(); ++i) EXPECT_NEAR(r.values[i], -0.8, 1e-9);
}

TEST(Operator, InvariantUnderFlowTranslation) {
  const auto g = SectionGrid::make(20, 32, ball_alpha(3), KillingMotion(1.0));
  const GraphField u = wavy_field(g);
  GraphField v = u;
  for (double& x : v.values()) x += 1.75;
  const ResidualEvaluation a = assemble_residual(u, 0.3), b = assemble_residual(v, 0.3);
  const double scale = a.values.cwiseAbs().maxCoeff();
  EXPECT_LE((a.values - b.values).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, scale));
}

TEST(Operator, EquivariantUnderColumnRotation) {
  const auto g = SectionGrid::make(20, 32, ball_alpha(3), KillingMotion(1.0));
  const GraphField u = wavy_field(g);
  const int shift = 5;
  GraphField v(g);
  v[0] = u[0];
  for (int i = 1; i < g->n_alpha(); ++i)
    for (int j = 0; j < g->n_beta(); ++j) v[g->node(i, j + shift)] = u.at(i, j);
  const ResidualEvaluation a = assemble_residual(u, 0.3), b = assemble_residual(v, 0.3);
  EXPECT_NEAR(a.values[0], b.values[0], 1e-10);
  for (int i = 1; i < g->n_alpha() - 1; ++i)
    for (int j = 0; j < g->n_beta(); ++j)
      EXPECT_NEAR(a.values[g->node(i, j)], b.values[g->node(i, j + shift)], 1e-10);
}

TEST(Operator, UmbilicCapsAreSolutionsToSecondOrder) {
  for (double theta : {0.0, 1.0})
    for (double H : {0.5, -0.3}) {
      double prev = 0.0;
      for (int level = 0; level < 3; ++level) {
        const int na = 16 << level, nb = 32 << level;
        const auto g = SectionGrid::make(na + 1, nb, ball_alpha(2), KillingMotion(theta));
        const double r = assemble_residual(cap_field(g, H, 0.0), H).sup_norm();
        if (level > 0) {
          const double ratio = prev / r;
          EXPECT_GE(ratio, 3.0) << "theta " << theta << " H " << H << " level " << level;
          EXPECT_LE(ratio, 5.0) << "theta " << theta << " H " << H << " level " << level;
        }
        prev = r;
      }
      EXPECT_LT(prev, 1e-3);
    }
}

TEST(Operator, CapSignConvention) {
  // A cap for H solves the equation with H, not with -H.
  const auto g = SectionGrid::make(65, 128, ball_alpha(2), KillingMotion(1.0));
  const GraphField u = cap_field(g, 0.5, 0.0);
  EXPECT_LT(assemble_residual(u, 0.5).sup_norm(), 1e-3);
  EXPECT_GT(assemble_residual(u, -0.5).sup_norm(), 1.0);
}

TEST(Operator, JacobianMatchesDirectionalDifference) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N;
  for (double theta : {0.0, 1.3}) {
    const auto g = SectionGrid::make(16, 24, ball_alpha(2.5), KillingMotion(theta));
    const GraphField u = wavy_field(g);
    const int ring = g->n_alpha() - 1;
    const int n = g->unknown_count(ring);
    const Eigen::SparseMatrix<double> J = assemble_jacobian(u, 0.4);
    ASSERT_EQ(J.rows(), n);
    ASSERT_EQ(J.cols(), n);
    for (int trial = 0; trial < 3; ++trial) {
      Eigen::VectorXd v(n);
      for (int k = 0; k < n; ++k) v[k] = N(rng);
      const double eps = 1e-6;
      GraphField up = u, um = u;
      for (int k = 0; k < n; ++k) {
        up[k] += eps * v[k];
        um[k] -= eps * v[k];
      }
      const Eigen::VectorXd fd = (assemble_residual(up, 0.4).values - assemble_residual(um, 0.4).values) / (2 * eps);
      const Eigen::VectorXd jv = J * v;
      EXPECT_LE((fd - jv).norm(), 1e-5 * jv.norm()) << "theta " << theta;
    }
  }
}

TEST(Operator, JacobianSparsity) {
  const auto g = SectionGrid::make(12, 16, ball_alpha(2), KillingMotion(1.0));
  const Eigen::SparseMatrix<double> J = assemble_jacobian(wavy_field(g), 0.2);
  Eigen::SparseMatrix<double, Eigen::RowMajor> R = J;
  EXPECT_LE(R.row(0).nonZeros(), g->n_beta() + 1);
  for (int r = 1; r < R.rows(); ++r) EXPECT_LE(R.row(r).nonZeros(), 9);
}

TEST(Operator, PartialBallUsesPrefixNumbering) {
  const auto g = SectionGrid::make(20, 16, ball_alpha(3), KillingMotion(1.0));
  const GraphField u = wavy_field(g);
  const int ring = 8;
  const ResidualEvaluation part = assemble_residual(u, 0.2, ring);
  const ResidualEvaluation full = assemble_residual(u, 0.2);
  ASSERT_EQ(part.values.size(), g->unknown_count(ring));
  for (Eigen::Index k = 0; k < part.values.size(); ++k) EXPECT_DOUBLE_EQ(part.values[k], full.values[k]);
  EXPECT_EQ(assemble_jacobian(u, 0.2, ring).rows(), g->unknown_count(ring));
  EXPECT_THROW(assemble_residual(u, 0.2, 0), InvalidInput);
  EXPECT_THROW(assemble_residual(u, 0.2, g->n_alpha()), InvalidInput);
}

TEST(Operator, RejectsNonFiniteInput) {
  const auto g = SectionGrid::make(12, 16, ball_alpha(2), KillingMotion());
  GraphField u(g);
  u[5] = NAN;
  EXPECT_THROW(assemble_residual(u, 0.0), InvalidInput);
  EXPECT_THROW(assemble_jacobian(u, 0.0), InvalidInput);
}

TEST(Operator, EllipticityIsReported) {
  const auto g = SectionGrid::make(16, 16, ball_alpha(2), KillingMotion(1.0));
  const ResidualEvaluation r = assemble_residual(wavy_field(g), 0.2);
  EXPECT_EQ(r.non_elliptic, 0);
  EXPECT_GT(r.min_ellipticity, 0.0);
  for (const auto& s : r.states) {
    EXPECT_GT(s.W, 0.0);
    EXPECT_GE(s.W * s.W, s.f * (1 - 1e-12));
  }
}

TEST(Operator, GradientNormsOfCap) {
  const auto g = SectionGrid::make(129, 64, ball_alpha(3), KillingMotion(1.0));
  const GraphField u = cap_field(g, 0.5, 0.0);
  const CapSolution cap = CapSolution::through_ring(0.5, g->alpha_max(), 0.0);
  const int ring = g->ring_for_radius(2.0);
  const auto grad = gradient_norms(u, ring);
  ASSERT_EQ(static_cast<int>(grad.size()), g->closed_count(ring));
  EXPECT_NEAR(grad[0], 0.0, 1e-12);
  for (int n = 1; n < static_cast<int>(grad.size()); ++n)
    EXPECT_NEAR(grad[static_cast<std::size_t>(n)], cap.gradient_norm(g->coords(n).alpha), 1e-2);
}

TEST(EmbedGraph, TopologyAndVertices) {
  const auto g = SectionGrid::make(10, 16, ball_alpha(2), KillingMotion(1.0));
  const GraphField u = wavy_field(g);
  const TriMesh m = embed_graph(u);
  EXPECT_EQ(m.vertex_count(), g->node_count());
  EXPECT_EQ(m.vertex_count(), 10 * 16 - (16 - 1));
  EXPECT_EQ(m.euler_characteristic(), 1);
  for (int n = 0; n < g->node_count(); ++n) {
    const Projection p = project(AmbientPoint(m.vertices[static_cast<std::size_t>(n)]), g->motion());
    EXPECT_NEAR(p.s, u[n], 1e-12);
  }
  const TriMesh part = embed_graph(u, 4);
  EXPECT_EQ(part.vertex_count(), g->closed_count(4));
  EXPECT_EQ(part.euler_characteristic(), 1);
}
