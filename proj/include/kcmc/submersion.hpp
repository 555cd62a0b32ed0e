#pragma once

// Killing section P = {|q| = 1, z > 0} (the unit hemisphere through the pole
// o = (0, 0, 1)), the orbit projection onto it, and the orbit-geometry
// coefficients of the Riemannian submersion metric on P.
//
// Chart: polar coordinates (alpha, beta) about the pole, alpha in [0, pi/2).
// All coefficients are invariant under rotation in beta and under the flow.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>
#include <vector>

#include "kcmc/errors.hpp"
#include "kcmc/hyperbolic.hpp"

namespace kcmc {

/// Step of the centered differences used for geometric derivatives.
inline constexpr double kGeomStep = 1e-5;

struct SectionCoords {
  double alpha = 0.0;
  double beta = 0.0;
};

inline void require_open_section(double alpha, const char* what) {
  if (!(alpha >= 0.0) || !(alpha < std::numbers::pi / 2)) {
    std::ostringstream os;
    os << what << ": polar angle " << alpha << " outside [0, pi/2); the equator is at infinity";
    throw DegenerateGeometry(os.str());
  }
}

inline AmbientPoint section_point(SectionCoords c) {
  require_open_section(c.alpha, "section_point");
  const double sa = std::sin(c.alpha);
  return AmbientPoint(sa * std::cos(c.beta), sa * std::sin(c.beta), std::cos(c.alpha));
}

struct Projection {
  SectionCoords coords;
  double s = 0.0;  // flow parameter: q = flow(s, section_point(coords))
};

/// Orbit projection onto P. Each orbit meets P exactly once, at s = log|q|.
inline Projection project(const AmbientPoint& q, const KillingMotion& motion) {
  const double r = q.coords().norm();
  const double s = std::log(r);
  const Vec3 base = rotate_horizontal(q.coords() / r, -motion.theta * s);
  const double alpha = std::acos(std::clamp(base.z(), -1.0, 1.0));
  double beta = 0.0;
  if (std::hypot(base.x(), base.y()) > 0.0) {
    beta = std::atan2(base.y(), base.x());
    if (beta < 0.0) beta += 2.0 * std::numbers::pi;
  }
  return {{alpha, beta}, s};
}

/// Ambient (Euclidean-component) chart tangents d/dalpha, d/dbeta of the
/// section embedding.
inline std::array<Vec3, 2> chart_tangents(SectionCoords c) {
  const double sa = std::sin(c.alpha), ca = std::cos(c.alpha);
  const double sb = std::sin(c.beta), cb = std::cos(c.beta);
  return {Vec3(ca * cb, ca * sb, -sa), Vec3(-sa * sb, sa * cb, 0.0)};
}

/// f = 1/|Y|^2 at the section point.
inline double orbit_factor(SectionCoords c, const KillingMotion& motion) {
  return killing_vector(section_point(c), motion).f;
}

/// ds(lift(d_i)): the flow-parameter rate of the horizontal lift of a chart
/// vector, c_i = -g(d_i, Y) / g(Y, Y). Zero for theta = 0.
inline Vec2 horizontal_shift(SectionCoords c, const KillingMotion& motion) {
  const AmbientPoint p = section_point(c);
  const KillingVector y = killing_vector(p, motion);
  const auto t = chart_tangents(c);
  const double yy = metric_inner(p, y.y, y.y);
  return {-metric_inner(p, t[0], y.y) / yy, -metric_inner(p, t[1], y.y) / yy};
}

/// Submersion metric: sigma(v, w) = g(v^h, w^h) with v^h the part of the chart
/// tangent orthogonal to Y.
inline Mat2 submersion_metric(SectionCoords c, const KillingMotion& motion) {
  const AmbientPoint p = section_point(c);
  const KillingVector y = killing_vector(p, motion);
  const auto t = chart_tangents(c);
  const double yy = metric_inner(p, y.y, y.y);
  std::array<Vec3, 2> h;
  for (int i = 0; i < 2; ++i) h[i] = t[i] - (metric_inner(p, t[i], y.y) / yy) * y.y;
  Mat2 sigma;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) sigma(i, j) = metric_inner(p, h[i], h[j]);
  return sigma;
}

namespace detail {

// Horizontal lift of the chart vector d_i at Psi(alpha, beta, s), where
// Psi(alpha, beta, s) = flow(s, section_point(alpha, beta)).
inline Vec3 horizontal_lift(double alpha, double beta, double s, int i,
                            const KillingMotion& motion) {
  const SectionCoords c{alpha, beta};
  const AmbientPoint p = section_point(c);
  const Vec3 y = killing_vector(p, motion).y;
  const auto t = chart_tangents(c);
  const Vec2 shift = horizontal_shift(c, motion);
  return flow_vector(s, t[i] + shift[i] * y, motion);
}

// Euclidean derivative of the lift field X_j along the lift X_i, by centered
// differences in (alpha, beta, s). In these coordinates X_i = e_i + c_i e_s.
inline Vec3 lift_derivative(SectionCoords c, int along, int field, double h,
                            const KillingMotion& motion) {
  const Vec2 shift = horizontal_shift(c, motion);
  auto lift = [&](double a, double b, double s) {
    return horizontal_lift(a, b, s, field, motion);
  };
  Vec3 d_chart = along == 0
                     ? Vec3((lift(c.alpha + h, c.beta, 0) - lift(c.alpha - h, c.beta, 0)) / (2 * h))
                     : Vec3((lift(c.alpha, c.beta + h, 0) - lift(c.alpha, c.beta - h, 0)) / (2 * h));
  const Vec3 d_s = (lift(c.alpha, c.beta, h) - lift(c.alpha, c.beta, -h)) / (2 * h);
  return d_chart + shift[along] * d_s;
}

}  // namespace detail

/// gamma_ki = f^{1/2} g([D_k, D_i], D_0) with D_i the horizontal lifts of the
/// chart frame and D_0 = f^{1/2} Y, from a numerically differentiated bracket.
/// Vanishes exactly when the horizontal distribution is integrable (theta = 0).
inline Mat2 gamma_terms(SectionCoords c, const KillingMotion& motion, double h = kGeomStep) {
  require_open_section(c.alpha + h, "gamma_terms");
  const AmbientPoint p = section_point(c);
  const KillingVector y = killing_vector(p, motion);
  Mat2 gamma = Mat2::Zero();
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < 2; ++i) {
      if (k == i) continue;
      const Vec3 bracket = detail::lift_derivative(c, k, i, h, motion) -
                           detail::lift_derivative(c, i, k, h, motion);
      gamma(k, i) = y.f * metric_inner(p, bracket, y.y);
    }
  }
  return gamma;
}

/// Pi_* of the orbit acceleration nabla_{D_0} D_0 as a chart covector. Uses
/// nabla_{D_0} D_0 = grad f / (2 f), so the covector is d f / (2 f).
inline Vec2 acceleration_term(SectionCoords c, const KillingMotion& motion,
                              double h = kGeomStep) {
  require_open_section(c.alpha + h, "acceleration_term");
  const double f = orbit_factor(c, motion);
  if (c.alpha < h) {
    // One-sided in alpha would lose an order; the polar chart reflects
    // through the pole instead.
    const double fa = orbit_factor({c.alpha + h, c.beta}, motion);
    const double fb = orbit_factor({h - c.alpha, c.beta + std::numbers::pi}, motion);
    const double db = (orbit_factor({c.alpha, c.beta + h}, motion) -
                       orbit_factor({c.alpha, c.beta - h}, motion)) / (2 * h);
    return {(fa - fb) / (2 * h) / (2 * f), db / (2 * f)};
  }
  const double da = (orbit_factor({c.alpha + h, c.beta}, motion) -
                     orbit_factor({c.alpha - h, c.beta}, motion)) / (2 * h);
  const double db = (orbit_factor({c.alpha, c.beta + h}, motion) -
                     orbit_factor({c.alpha, c.beta - h}, motion)) / (2 * h);
  return {da / (2 * f), db / (2 * f)};
}

/// Polar angle of the geodesic circle of radius rho about the pole in the
/// hemisphere's induced metric: cosh(rho) = 1 / cos(alpha).
inline double ball_alpha(double rho) {
  if (!(rho > 0.0)) throw InvalidInput("ball_alpha requires rho > 0");
  return std::acos(1.0 / std::cosh(rho));
}

/// Tube of hyperbolic radius d about the translation axis.
struct KillingCylinder {
  double d;

  explicit KillingCylinder(double radius) : d(radius) {
    if (!(radius > 0.0)) throw InvalidInput("KillingCylinder radius must be positive");
  }
};

/// Mean curvature (average of principal curvatures coth d and tanh d) of the
/// distance-d tube about a geodesic, for the normal pointing to the axis.
inline double cylinder_mean_curvature(double d) {
  if (!(d > 0.0)) throw InvalidInput("cylinder_mean_curvature requires d > 0");
  return 0.5 * (1.0 / std::tanh(d) + std::tanh(d));
}

/// Cached coefficients of one ring alpha = const. Index 0 is alpha, 1 is beta.
struct RingGeometry {
  double alpha = 0.0;
  Mat2 sigma = Mat2::Identity();
  Mat2 sigma_inv = Mat2::Identity();
  double f = 1.0;
  Vec2 df = Vec2::Zero();
  Vec2 shift = Vec2::Zero();
  Mat2 dshift = Mat2::Zero();  // dshift(i, j) = d_i c_j
  std::array<Mat2, 2> christoffel{Mat2::Zero(), Mat2::Zero()};  // [k](i, j) = Gamma^k_ij
  Mat2 gamma = Mat2::Zero();
  Vec2 accel = Vec2::Zero();
};

/// Structured polar grid on the section: a single pole node plus
/// (n_alpha - 1) rings of n_beta nodes, uniform in alpha on
/// [0, alpha_max] and periodic in beta. Immutable once built.
///
/// Node numbering: pole = 0, node (i, j) = 1 + (i - 1) * n_beta + j for
/// i >= 1. A ball {alpha <= alpha_m} therefore occupies a prefix of the
/// numbering, with ring m as its Dirichlet boundary.
class SectionGrid {
 public:
  SectionGrid(int n_alpha, int n_beta, double alpha_max, KillingMotion motion)
      : n_alpha_(n_alpha), n_beta_(n_beta), alpha_max_(alpha_max), motion_(motion) {
    if (n_alpha < 3) throw InvalidInput("SectionGrid needs n_alpha >= 3");
    if (n_beta < 8) throw InvalidInput("SectionGrid needs n_beta >= 8");
    if (!(alpha_max > 0.0) || !(alpha_max < std::numbers::pi / 2 - 2 * kGeomStep))
      throw DegenerateGeometry("SectionGrid alpha_max must lie in (0, pi/2)");
    d_alpha_ = alpha_max / (n_alpha - 1);
    d_beta_ = 2.0 * std::numbers::pi / n_beta;
    build();
  }

  static std::shared_ptr<const SectionGrid> make(int n_alpha, int n_beta, double alpha_max,
                                                 KillingMotion motion) {
    return std::make_shared<const SectionGrid>(n_alpha, n_beta, alpha_max, motion);
  }

  int n_alpha() const { return n_alpha_; }
  int n_beta() const { return n_beta_; }
  double alpha_max() const { return alpha_max_; }
  double d_alpha() const { return d_alpha_; }
  double d_beta() const { return d_beta_; }
  const KillingMotion& motion() const { return motion_; }

  double alpha(int i) const {
    return i == n_alpha_ - 1 ? alpha_max_ : alpha_max_ * static_cast<double>(i) / (n_alpha_ - 1);
  }
  double beta(int j) const { return d_beta_ * wrap(j); }

  int node_count() const { return 1 + (n_alpha_ - 1) * n_beta_; }
  int wrap(int j) const { return ((j % n_beta_) + n_beta_) % n_beta_; }
  int node(int i, int j) const { return i == 0 ? 0 : 1 + (i - 1) * n_beta_ + wrap(j); }
  int ring_of(int node) const { return node == 0 ? 0 : 1 + (node - 1) / n_beta_; }
  int column_of(int node) const { return node == 0 ? 0 : (node - 1) % n_beta_; }
  SectionCoords coords(int node) const { return {alpha(ring_of(node)), beta(column_of(node))}; }

  /// Nodes strictly inside the ball bounded by `boundary_ring`.
  int unknown_count(int boundary_ring) const { return 1 + (boundary_ring - 1) * n_beta_; }
  /// Nodes of the closed ball including its boundary ring.
  int closed_count(int ring) const { return 1 + ring * n_beta_; }

  /// Outermost ring with alpha <= ball_alpha(rho).
  int ring_for_radius(double rho) const {
    const double a = ball_alpha(rho);
    int ring = 0;
    for (int i = 0; i < n_alpha_; ++i)
      if (alpha(i) <= a * (1.0 + 1e-12)) ring = i;
    return ring;
  }

  const RingGeometry& ring(int i) const { return rings_.at(static_cast<std::size_t>(i)); }

  // Fourier tables on the first ring used by the pole closure.
  double cos_beta(int j, int mode) const { return mode == 1 ? cos1_[wrap(j)] : cos2_[wrap(j)]; }
  double sin_beta(int j, int mode) const { return mode == 1 ? sin1_[wrap(j)] : sin2_[wrap(j)]; }

 private:
  void build() {
    const double h = kGeomStep;
    rings_.resize(static_cast<std::size_t>(n_alpha_));

    // Pole in the Cartesian chart (alpha cos beta, alpha sin beta): the metric
    // is the identity up to O(alpha^2), f is stationary, and the shift
    // covector has vanishing symmetric derivative.
    RingGeometry& pole = rings_[0];
    pole.f = orbit_factor({0.0, 0.0}, motion_);
    pole.gamma << 0.0, -2.0 * motion_.theta, 2.0 * motion_.theta, 0.0;

    for (int i = 1; i < n_alpha_; ++i) {
      RingGeometry& g = rings_[static_cast<std::size_t>(i)];
      const SectionCoords c{alpha(i), 0.0};
      g.alpha = c.alpha;
      g.sigma = submersion_metric(c, motion_);
      g.sigma_inv = g.sigma.inverse();
      g.f = orbit_factor(c, motion_);
      g.shift = horizontal_shift(c, motion_);

      const SectionCoords ap{c.alpha + h, 0.0}, am{c.alpha - h, 0.0};
      const SectionCoords bp{c.alpha, h}, bm{c.alpha, -h};
      const std::array<Mat2, 2> dsigma{
          (submersion_metric(ap, motion_) - submersion_metric(am, motion_)) / (2 * h),
          (submersion_metric(bp, motion_) - submersion_metric(bm, motion_)) / (2 * h)};
      g.df = {(orbit_factor(ap, motion_) - orbit_factor(am, motion_)) / (2 * h),
              (orbit_factor(bp, motion_) - orbit_factor(bm, motion_)) / (2 * h)};
      const Vec2 dca = (horizontal_shift(ap, motion_) - horizontal_shift(am, motion_)) / (2 * h);
      const Vec2 dcb = (horizontal_shift(bp, motion_) - horizontal_shift(bm, motion_)) / (2 * h);
      g.dshift.row(0) = dca.transpose();
      g.dshift.row(1) = dcb.transpose();

      for (int k = 0; k < 2; ++k)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            double sum = 0.0;
            for (int l = 0; l < 2; ++l)
              sum += g.sigma_inv(k, l) *
                     (dsigma[a](l, b) + dsigma[b](l, a) - dsigma[l](a, b));
            g.christoffel[k](a, b) = 0.5 * sum;
          }

      g.gamma = gamma_terms(c, motion_);
      g.accel = g.df / (2.0 * g.f);
      check(g, i);
    }

    cos1_.resize(n_beta_);
    sin1_.resize(n_beta_);
    cos2_.resize(n_beta_);
    sin2_.resize(n_beta_);
    for (int j = 0; j < n_beta_; ++j) {
      const double b = beta(j);
      cos1_[j] = std::cos(b);
      sin1_[j] = std::sin(b);
      cos2_[j] = std::cos(2 * b);
      sin2_[j] = std::sin(2 * b);
    }
  }

  static void check(const RingGeometry& g, int i) {
    const bool finite = g.sigma.allFinite() && g.sigma_inv.allFinite() && std::isfinite(g.f) &&
                        g.df.allFinite() && g.shift.allFinite() && g.dshift.allFinite() &&
                        g.gamma.allFinite() && g.christoffel[0].allFinite() &&
                        g.christoffel[1].allFinite();
    const bool pd = g.sigma(0, 0) > 0.0 && g.sigma.determinant() > 0.0;
    if (!finite || !pd || !(g.f > 0.0)) {
      std::ostringstream os;
      os << "degenerate section geometry on ring " << i << " (alpha = " << g.alpha << ")";
      throw DegenerateGeometry(os.str());
    }
  }

  int n_alpha_;
  int n_beta_;
  double alpha_max_;
  KillingMotion motion_;
  double d_alpha_ = 0.0;
  double d_beta_ = 0.0;
  std::vector<RingGeometry> rings_;
  std::vector<double> cos1_, sin1_, cos2_, sin2_;
};

}  // namespace kcmc
