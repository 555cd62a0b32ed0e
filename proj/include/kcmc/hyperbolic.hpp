#pragma once

// Upper half-space model of hyperbolic 3-space (sectional curvature -1) and
// its loxodromic one-parameter isometry groups about the vertical geodesic
// t -> (0, 0, e^t).

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "kcmc/errors.hpp"

namespace kcmc {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;

/// A point (x, y, z) of the half-space, z > 0.
class AmbientPoint {
 public:
  AmbientPoint(double x, double y, double z) : p_(x, y, z) {
    if (!(z > 0.0) || !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      std::ostringstream os;
      os << "AmbientPoint requires finite coordinates with z > 0, got (" << x << ", " << y
         << ", " << z << ")";
      throw InvalidInput(os.str());
    }
  }
  explicit AmbientPoint(const Vec3& p) : AmbientPoint(p.x(), p.y(), p.z()) {}

  double x() const { return p_.x(); }
  double y() const { return p_.y(); }
  double z() const { return p_.z(); }
  const Vec3& coords() const { return p_; }

 private:
  Vec3 p_;
};

/// Screw motion: dilation by e^t composed with rotation by theta*t about the
/// vertical axis. theta = 0 is the pure transvection along the axis.
struct KillingMotion {
  double theta = 0.0;

  explicit KillingMotion(double rate = 0.0) : theta(rate) {
    if (!std::isfinite(rate)) throw InvalidInput("KillingMotion rotation rate must be finite");
  }
};

/// Ambient model plus target mean curvature. The curvature bound alpha is
/// fixed to 1, so admissible mean curvatures satisfy |H| < 1.
struct ModelSpec {
  KillingMotion motion;
  double H = 0.0;
  static constexpr double curvature_bound = 1.0;

  ModelSpec(KillingMotion m, double mean_curvature) : motion(m), H(mean_curvature) { validate(); }

  void validate() const { require_subcritical(H); }

  static void require_subcritical(double h) {
    if (!std::isfinite(h) || !(std::abs(h) < std::sqrt(curvature_bound))) {
      std::ostringstream os;
      os << "mean curvature must satisfy |H| < sqrt(alpha) = 1, got H = " << h;
      ConstraintViolation err(os.str());
      err.H = h;
      throw err;
    }
  }
};

/// Rotation by `angle` of the horizontal (x, y) components; z is fixed.
inline Vec3 rotate_horizontal(const Vec3& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z()};
}

/// Differential of the flow: phi_t is linear on R^3, so d(phi_t) v = phi_t(v).
inline Vec3 flow_vector(double t, const Vec3& v, const KillingMotion& motion) {
  return std::exp(t) * rotate_horizontal(v, motion.theta * t);
}

inline AmbientPoint flow(double t, const AmbientPoint& q, const KillingMotion& motion) {
  return AmbientPoint(flow_vector(t, q.coords(), motion));
}

struct KillingVector {
  Vec3 y;        // Euclidean components of Y(q)
  double norm2;  // |Y|^2 in the hyperbolic metric
  double f;      // 1 / |Y|^2
};

/// Y(q) = q + theta * (-y, x, 0), the generator of `flow`.
inline KillingVector killing_vector(const AmbientPoint& q, const KillingMotion& motion) {
  const Vec3& p = q.coords();
  const Vec3 y = p + motion.theta * Vec3(-p.y(), p.x(), 0.0);
  const double norm2 = y.squaredNorm() / (p.z() * p.z());
  return {y, norm2, 1.0 / norm2};
}

/// g_q(v, w) = <v, w> / z^2.
inline double metric_inner(const AmbientPoint& q, const Vec3& v, const Vec3& w) {
  return v.dot(w) / (q.z() * q.z());
}

/// cosh d = 1 + |p - q|^2 / (2 z_p z_q), evaluated in the cancellation-free
/// form d = 2 asinh(|p - q| / (2 sqrt(z_p z_q))).
inline double hyperbolic_distance(const AmbientPoint& p, const AmbientPoint& q) {
  const double chord = (p.coords() - q.coords()).norm();
  return 2.0 * std::asinh(chord / (2.0 * std::sqrt(p.z() * q.z())));
}

}  // namespace kcmc
