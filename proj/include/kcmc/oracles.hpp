#pragma once

// Reference solutions: umbilic caps, the rotationally equivariant ODE
// reduction solved by shooting, and analytic test surfaces.

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "kcmc/errors.hpp"
#include "kcmc/hyperbolic.hpp"
#include "kcmc/mesh.hpp"
#include "kcmc/submersion.hpp"

namespace kcmc {

/// Totally umbilic CMC-H surface: the Euclidean sphere with center (0, 0, a)
/// and radius rho0 / sqrt(1 - H^2), whose asymptotic boundary is the circle of
/// radius rho0 in z = 0. As a graph over the hemisphere it is rotationally
/// symmetric, so the profile is the same for every rotation rate theta.
struct CapSolution {
  double H;
  double rho0;

  CapSolution(double mean_curvature, double radius) : H(mean_curvature), rho0(radius) {
    ModelSpec::require_subcritical(H);
    if (!(rho0 > 0.0)) throw InvalidInput("cap radius rho0 must be positive");
  }

  double a() const { return H * rho0 / std::sqrt(1.0 - H * H); }

  /// u(alpha) = log(a cos(alpha) + sqrt(a^2 cos^2(alpha) + rho0^2)).
  double operator()(double alpha) const {
    const double ac = a() * std::cos(alpha);
    return std::log(ac + std::sqrt(ac * ac + rho0 * rho0));
  }

  /// du/dalpha, independent of rho0.
  double slope(double alpha) const {
    const double hs = H * std::sin(alpha);
    return -hs / std::sqrt(1.0 - hs * hs);
  }

  /// |du|_sigma = cos(alpha) |du/dalpha| (sigma_alpha,alpha = 1/cos^2 for all theta).
  double gradient_norm(double alpha) const { return std::cos(alpha) * std::abs(slope(alpha)); }

  /// The cap taking the value `value` on the circle alpha = alpha_ring.
  static CapSolution through_ring(double H, double alpha_ring, double value) {
    const CapSolution unit(H, 1.0);
    return CapSolution(H, std::exp(value - unit(alpha_ring)));
  }
};

inline double umbilic_cap(double H, double rho0, double alpha) { return CapSolution(H, rho0)(alpha); }

/// Rotationally symmetric solution profile u(alpha) on [0, alpha_max].
struct EquivariantProfile {
  double theta = 0.0;
  double H = 0.0;
  double c = 0.0;
  double alpha_max = 0.0;
  std::vector<double> alpha;
  std::vector<double> u;
  std::vector<double> du;

  /// Cubic Hermite interpolation of the stored samples.
  double operator()(double a) const {
    if (a <= alpha.front()) return u.front();
    if (a >= alpha.back()) return u.back();
    const double h = alpha[1] - alpha[0];
    auto k = static_cast<std::size_t>(a / h);
    if (k + 1 >= alpha.size()) k = alpha.size() - 2;
    const double t = (a - alpha[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * u[k] + (t3 - 2 * t2 + t) * h * du[k] +
           (-2 * t3 + 3 * t2) * u[k + 1] + (t3 - t2) * h * du[k + 1];
  }
};

struct OdeOptions {
  double tol = 1e-10;
  int samples = 4096;
  double start = 1e-4;  // series start off the pole
  int max_shots = 40;
};

namespace detail {

// Flux form of the operator for beta-independent u, with closed-form
// coefficients of the hemisphere chart (kept separate from the grid code):
//   V = sqrt(det sigma) sigma^{aa} u' / (sqrt(f) W),
//   V' = -2 H sqrt(det sigma) / sqrt(f),
//   W^2 = f + sigma^{aa} u'^2 + sigma^{bb} c_b^2.
struct RadialCoefficients {
  double f, s_aa_inv, sqrt_det, shift_term;

  RadialCoefficients(double alpha, double theta) {
    const double sa = std::sin(alpha), ca = std::cos(alpha);
    const double t = theta * theta * sa * sa;
    f = ca * ca / (1 + t);
    const double s_aa = 1.0 / (ca * ca);
    const double s_bb = sa * sa / (ca * ca * (1 + t));
    const double c_b = -theta * sa * sa / (1 + t);
    s_aa_inv = 1.0 / s_aa;
    sqrt_det = std::sqrt(s_aa * s_bb);
    shift_term = s_bb > 0.0 ? c_b * c_b / s_bb : 0.0;
  }

  double slope_from_flux(double V) const {
    const double p = V * std::sqrt(f) / (sqrt_det * s_aa_inv);
    const double denom = 1.0 - p * p * s_aa_inv;
    if (!(denom > 0.0)) return std::nan("");
    return p * std::sqrt((f + shift_term) / denom);
  }
};

}  // namespace detail

/// Solves the two-point problem u'(0) = 0, u(alpha_max) = c for the
/// rotationally equivariant reduction by shooting on u(0) with an adaptive
/// Runge-Kutta-Fehlberg 7(8) integrator.
inline EquivariantProfile equivariant_ode_solve(double theta, double H, double c, double alpha_max,
                                                const OdeOptions& opt = {}) {
  ModelSpec::require_subcritical(H);
  require_open_section(alpha_max, "equivariant_ode_solve");
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 2>;  // (u, V)

  auto rhs = [&](const State& y, State& dy, double a) {
    const detail::RadialCoefficients k(a, theta);
    dy[0] = k.slope_from_flux(y[1]);
    dy[1] = -2.0 * H * k.sqrt_det / std::sqrt(k.f);
  };

  std::vector<double> times(static_cast<std::size_t>(opt.samples) + 1);
  for (std::size_t i = 0; i < times.size(); ++i)
    times[i] = alpha_max * static_cast<double>(i) / opt.samples;
  times[0] = opt.start;

  auto shoot = [&](double u0, std::vector<State>* us) {
    // Leading-order expansion at the pole: V = -H a^2, u = u0 - H a^2 / 2.
    State y{u0 - 0.5 * H * opt.start * opt.start, -H * opt.start * opt.start};
    auto stepper = ode::make_controlled(opt.tol * 1e-3, opt.tol * 1e-3,
                                        ode::runge_kutta_fehlberg78<State>());
    if (us) us->clear();
    ode::integrate_times(stepper, rhs, y, times.begin(), times.end(), 1e-3,
                         [&](const State& s, double) {
                           if (us) us->push_back(s);
                         });
    return y[0];
  };

  double x0 = c, x1 = c + 0.5;
  double g0 = shoot(x0, nullptr) - c;
  double g1 = shoot(x1, nullptr) - c;
  int shots = 2;
  while (std::abs(g1) > opt.tol * 1e-2 && shots < opt.max_shots) {
    if (!std::isfinite(g1) || g1 == g0) break;
    const double x2 = x1 - g1 * (x1 - x0) / (g1 - g0);
    x0 = x1;
    g0 = g1;
    x1 = x2;
    g1 = shoot(x1, nullptr) - c;
    ++shots;
  }
  if (!std::isfinite(g1) || std::abs(g1) > opt.tol) {
    std::ostringstream os;
    os << "shooting failed: bracket u(0) in [" << x0 << ", " << x1 << "], mismatch [" << g0 << ", "
       << g1 << "] after " << shots << " shots";
    NonConvergence err(os.str());
    err.H = H;
    throw err;
  }

  EquivariantProfile prof;
  prof.theta = theta;
  prof.H = H;
  prof.c = c;
  prof.alpha_max = alpha_max;
  std::vector<State> states;
  shoot(x1, &states);
  prof.alpha.assign(times.begin(), times.end());
  prof.alpha[0] = 0.0;
  prof.u.resize(states.size());
  prof.du.resize(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    prof.u[i] = states[i][0];
    prof.du[i] = i == 0 ? 0.0
                        : detail::RadialCoefficients(prof.alpha[i], theta).slope_from_flux(states[i][1]);
  }
  prof.u[0] = x1;
  return prof;
}

struct ReferenceSurface {
  std::string name;
  TriMesh mesh;
  double exact_H;
};

namespace detail {

// Structured (n x n) triangulation of a parametrized patch; the winding is
// flipped when needed so the normal at the center has positive component
// along `want(center)`.
template <class Param, class Want>
TriMesh patch_mesh(int n, double half, Param param, Want want) {
  TriMesh mesh;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double s = -half + 2 * half * i / (n - 1);
      const double t = -half + 2 * half * j / (n - 1);
      mesh.vertices.push_back(param(s, t));
    }
  auto id = [n](int i, int j) { return i * n + j; };
  for (int i = 0; i + 1 < n; ++i)
    for (int j = 0; j + 1 < n; ++j) {
      mesh.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  const int mid = id(n / 2, n / 2);
  const Eigen::Vector3d normal = mesh.vertex_normals()[static_cast<std::size_t>(mid)];
  if (normal.dot(want(mesh.vertices[static_cast<std::size_t>(mid)])) < 0.0)
    for (auto& f : mesh.faces) std::swap(f[1], f[2]);
  return mesh;
}

}  // namespace detail

/// Patch of the tube at distance d from the axis, normal towards the axis.
inline ReferenceSurface tube_surface(double d, int n = 41, double half = 0.3) {
  KillingCylinder cyl(d);
  char name[32];
  std::snprintf(name, sizeof name, "tube_d%g", d);
  return {name,
          detail::patch_mesh(
              n, half,
              [r = std::sinh(cyl.d)](double t, double phi) {
                const double z = std::exp(t);
                return Eigen::Vector3d(z * r * std::cos(phi), z * r * std::sin(phi), z);
              },
              [](const Eigen::Vector3d& p) { return Eigen::Vector3d(-p.x(), -p.y(), 0.0); }),
          cylinder_mean_curvature(cyl.d)};
}

/// Hemisphere, horosphere and tube patches with their exact mean curvatures.
inline std::vector<ReferenceSurface> reference_surfaces(int n = 41, double half = 0.3) {
  std::vector<ReferenceSurface> out;
  out.push_back({"hemisphere",
                 detail::patch_mesh(
                     n, half,
                     [](double x, double y) { return Eigen::Vector3d(x, y, std::sqrt(1 - x * x - y * y)); },
                     [](const Eigen::Vector3d& p) { return Eigen::Vector3d(-p); }),
                 0.0});
  out.push_back({"horosphere",
                 detail::patch_mesh(
                     n, half, [](double x, double y) { return Eigen::Vector3d(x, y, 1.0); },
                     [](const Eigen::Vector3d&) { return Eigen::Vector3d::UnitZ(); }),
                 1.0});
  out.push_back(tube_surface(1.0, n, half));
  return out;
}

}  // namespace kcmc
