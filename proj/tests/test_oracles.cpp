#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kcmc/oracles.hpp"

using namespace kcmc;

TEST(Cap, ValuesAndApex) {
  // H = 0: the geodesic hemisphere of radius rho0 sits at height log rho0.
  EXPECT_NEAR(umbilic_cap(0.0, 2.0, 0.7), std::log(2.0), 1e-15);
  // The apex rises arctanh|H| above the hemisphere through the same circle.
  for (double H : {0.1, 0.5, 0.9, -0.5}) {
    const CapSolution cap(H, 1.0);
    EXPECT_NEAR(cap(0.0), std::atanh(H), 1e-13) << H;
    EXPECT_NEAR(cap(std::numbers::pi / 2), 0.0, 1e-13);
  }
  const CapSolution c(0.5, 1.0);
  EXPECT_NEAR(c(0.0), 0.549306, 1e-6);
  EXPECT_NEAR(c.a(), 0.5 / std::sqrt(0.75), 1e-15);
}

TEST(Cap, IsTheEuclideanSphere) {
  // Points flow(u(alpha), section_point(alpha)) lie on the sphere with
  // center (0, 0, a) and radius rho0 / sqrt(1 - H^2).
  const CapSolution cap(0.6, 1.7);
  const double R = cap.rho0 / std::sqrt(1 - cap.H * cap.H);
  for (double a = 0.0; a < 1.5; a += 0.1) {
    const double r = std::exp(cap(a));
    const Vec3 p(r * std::sin(a), 0.0, r * std::cos(a));
    EXPECT_NEAR((p - Vec3(0, 0, cap.a())).norm(), R, 1e-12 * R);
  }
}

TEST(Cap, SlopeMatchesDerivative) {
  const CapSolution cap(-0.7, 1.3);
  for (double a = 0.05; a < 1.5; a += 0.1) {
    const double h = 1e-6;
    EXPECT_NEAR(cap.slope(a), (cap(a + h) - cap(a - h)) / (2 * h), 1e-8);
    EXPECT_NEAR(cap.gradient_norm(a), std::cos(a) * std::abs(cap.slope(a)), 1e-15);
  }
  EXPECT_EQ(cap.slope(0.0), 0.0);
}

TEST(Cap, ThroughRing) {
  const CapSolution cap = CapSolution::through_ring(0.4, 1.2, 0.3);
  EXPECT_NEAR(cap(1.2), 0.3, 1e-14);
  EXPECT_THROW(CapSolution(1.0, 1.0), ConstraintViolation);
  EXPECT_THROW(CapSolution(0.5, 0.0), InvalidInput);
}

TEST(EquivariantOde, ReproducesCaps) {
  for (double theta : {0.0, 1.0, 2.0})
    for (double H : {0.3, -0.6, 0.9}) {
      const double am = ball_alpha(2.0);
      const EquivariantProfile p = equivariant_ode_solve(theta, H, 0.25, am);
      const CapSolution cap = CapSolution::through_ring(H, am, 0.25);
      double err = 0.0;
      for (std::size_t i = 0; i < p.alpha.size(); i += 16) err = std::max(err, std::abs(p.u[i] - cap(p.alpha[i])));
      EXPECT_LE(err, 1e-8) << "theta " << theta << " H " << H;
      EXPECT_NEAR(p.u.back(), 0.25, 1e-10);
      EXPECT_NEAR(p(0.5 * am), cap(0.5 * am), 1e-8);
    }
}

TEST(EquivariantOde, MinimalCaseIsConstant) {
  for (double theta : {0.0, 1.5}) {
    const EquivariantProfile p = equivariant_ode_solve(theta, 0.0, -0.4, ball_alpha(3.0));
    for (double v : p.u) EXPECT_NEAR(v, -0.4, 1e-10);
  }
}

TEST(EquivariantOde, ProfileInterpolation) {
  const EquivariantProfile p = equivariant_ode_solve(1.0, 0.5, 0.0, ball_alpha(2.0));
  EXPECT_EQ(p(-1.0), p.u.front());
  EXPECT_EQ(p(10.0), p.u.back());
  EXPECT_NEAR(p(p.alpha[100]), p.u[100], 1e-14);
  EXPECT_EQ(p.du.front(), 0.0);
  for (std::size_t i = 1; i < p.du.size(); ++i) EXPECT_LE(p.du[i], 0.0);
}

TEST(EquivariantOde, Validation) {
  EXPECT_THROW(equivariant_ode_solve(1.0, 1.0, 0.0, 1.0), ConstraintViolation);
  EXPECT_THROW(equivariant_ode_solve(1.0, 0.5, 0.0, std::numbers::pi / 2), DegenerateGeometry);
}

TEST(ReferenceSurfaces, Catalogue) {
  const auto refs = reference_surfaces();
  ASSERT_EQ(refs.size(), 3u);
  EXPECT_EQ(refs[0].name, "hemisphere");
  EXPECT_EQ(refs[0].exact_H, 0.0);
  EXPECT_EQ(refs[1].name, "horosphere");
  EXPECT_EQ(refs[1].exact_H, 1.0);
  EXPECT_EQ(refs[2].name, "tube_d1");
  EXPECT_NEAR(refs[2].exact_H, 1.037315, 1e-6);
  for (const auto& r : refs) {
    EXPECT_EQ(r.mesh.vertex_count(), 41 * 41);
    EXPECT_EQ(r.mesh.euler_characteristic(), 1);
  }
}

TEST(ReferenceSurfaces, TubeLiesAtDistanceD) {
  const ReferenceSurface t = tube_surface(2.0, 11);
  EXPECT_EQ(t.name, "tube_d2");
  for (const auto& v : t.mesh.vertices) {
    // Distance to the z-axis: sinh d = rho / z.
    EXPECT_NEAR(std::asinh(std::hypot(v.x(), v.y()) / v.z()), 2.0, 1e-12);
  }
}
