#pragma once

// Exhaustion scheme for the asymptotic problem: extend the boundary trace phi
// on the equator to a function F on the section, solve the Dirichlet problems
// with data F on the geodesic balls B_2, B_3, ..., B_{k_max}, and monitor the
// height bounds, interior gradients and Cauchy behavior on a fixed compact.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "kcmc/errors.hpp"
#include "kcmc/hyperbolic.hpp"
#include "kcmc/mesh.hpp"
#include "kcmc/operator.hpp"
#include "kcmc/solver.hpp"
#include "kcmc/submersion.hpp"

namespace kcmc {

/// Continuous 2 pi-periodic datum on the equator, as a function of beta.
class BoundaryTrace {
 public:
  enum class Kind { Constant, Fourier, Samples };

  static BoundaryTrace constant(double c) { return BoundaryTrace(Kind::Constant, {c}); }

  /// phi(beta) = a0 + sum_m (a_m cos(m beta) + b_m sin(m beta)); the vectors
  /// hold a_1, a_2, ... and b_1, b_2, ....
  static BoundaryTrace fourier(double a0, const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> params{a0};
    for (std::size_t m = 0; m < std::max(a.size(), b.size()); ++m) {
      params.push_back(m < a.size() ? a[m] : 0.0);
      params.push_back(m < b.size() ? b[m] : 0.0);
    }
    return BoundaryTrace(Kind::Fourier, params);
  }

  /// Uniform samples at beta_j = 2 pi j / n, periodic Catmull-Rom interpolation.
  static BoundaryTrace samples(std::vector<double> values) {
    return BoundaryTrace(Kind::Samples, std::move(values));
  }

  /// Raw parameter list: constant {c}; fourier {a0, a1, b1, a2, b2, ...};
  /// samples {v_0, ..., v_{n-1}}.
  static BoundaryTrace from_params(Kind kind, std::vector<double> params) {
    return BoundaryTrace(kind, std::move(params));
  }

  Kind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }
  double rotation() const { return rotation_; }

  /// phi(beta - beta0).
  BoundaryTrace rotated(double beta0) const {
    BoundaryTrace out = *this;
    out.rotation_ += beta0;
    out.compute_extrema();
    return out;
  }

  double operator()(double beta) const {
    const double b = beta - rotation_;
    switch (kind_) {
      case Kind::Constant: return params_[0];
      case Kind::Fourier: {
        double v = params_[0];
        for (std::size_t m = 1; 2 * m < params_.size() + 1; ++m) {
          const double am = params_[2 * m - 1];
          const double bm = 2 * m < params_.size() ? params_[2 * m] : 0.0;
          v += am * std::cos(static_cast<double>(m) * b) + bm * std::sin(static_cast<double>(m) * b);
        }
        return v;
      }
      case Kind::Samples: {
        const auto n = static_cast<long>(params_.size());
        const double x = b / (2 * std::numbers::pi) * static_cast<double>(n);
        const double fl = std::floor(x);
        const double t = x - fl;
        auto at = [&](long k) { return params_[static_cast<std::size_t>(((k % n) + n) % n)]; };
        const auto k = static_cast<long>(fl);
        const double p0 = at(k - 1), p1 = at(k), p2 = at(k + 1), p3 = at(k + 2);
        return 0.5 * ((2 * p1) + (-p0 + p2) * t + (2 * p0 - 5 * p1 + 4 * p2 - p3) * t * t +
                      (-p0 + 3 * p1 - 3 * p2 + p3) * t * t * t);
      }
    }
    return 0.0;
  }

  /// Average over the circle (exact for each kind).
  double mean() const {
    if (kind_ == Kind::Samples) {
      double s = 0.0;
      for (double v : params_) s += v;
      return s / static_cast<double>(params_.size());
    }
    return params_[0];
  }

  double sup() const { return sup_; }
  double inf() const { return inf_; }
  double osc() const { return sup_ - inf_; }

 private:
  BoundaryTrace(Kind kind, std::vector<double> params) : kind_(kind), params_(std::move(params)) {
    if (params_.empty()) throw InvalidInput("boundary trace needs at least one parameter");
    if (kind_ == Kind::Constant && params_.size() != 1)
      throw InvalidInput("constant boundary trace takes exactly one value");
    if (kind_ == Kind::Samples && params_.size() < 4)
      throw InvalidInput("sampled boundary trace needs at least 4 samples");
    for (double p : params_)
      if (!std::isfinite(p)) throw InvalidInput("boundary trace parameters must be finite");
    compute_extrema();
  }

  // Dense scan followed by golden-section refinement around the best samples.
  void compute_extrema() {
    if (kind_ == Kind::Constant) {
      sup_ = inf_ = params_[0];
      return;
    }
    const int n = 4096;
    const double h = 2 * std::numbers::pi / n;
    int best_hi = 0, best_lo = 0;
    double hi = -std::numeric_limits<double>::infinity(), lo = -hi;
    for (int i = 0; i < n; ++i) {
      const double v = (*this)(i * h);
      if (v > hi) { hi = v; best_hi = i; }
      if (v < lo) { lo = v; best_lo = i; }
    }
    auto refine = [&](int i, double sign) {
      double a = (i - 1) * h, b = (i + 1) * h;
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      for (int it = 0; it < 80; ++it) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (sign * (*this)(c) > sign * (*this)(d)) b = d; else a = c;
      }
      return (*this)(0.5 * (a + b));
    };
    if (kind_ == Kind::Samples)
      for (double v : params_) { hi = std::max(hi, v); lo = std::min(lo, v); }
    sup_ = std::max(hi, refine(best_hi, 1.0));
    inf_ = std::min(lo, refine(best_lo, -1.0));
  }

  Kind kind_;
  std::vector<double> params_;
  double rotation_ = 0.0;
  double sup_ = 0.0;
  double inf_ = 0.0;
};

inline const char* to_string(BoundaryTrace::Kind kind) {
  switch (kind) {
    case BoundaryTrace::Kind::Constant: return "constant";
    case BoundaryTrace::Kind::Fourier: return "fourier";
    case BoundaryTrace::Kind::Samples: return "samples";
  }
  return "unknown";
}

/// Radial blending profile m(alpha) with m(0) = 0 and m(pi/2) = 1.
enum class Ramp { SinSquared, Smoothstep };

inline double ramp_value(Ramp ramp, double alpha) {
  if (ramp == Ramp::SinSquared) {
    const double s = std::sin(alpha);
    return s * s;
  }
  const double t = std::clamp(alpha / (std::numbers::pi / 2), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

/// F(alpha, beta) = mean(phi) + m(alpha) (phi(beta) - mean(phi)).
inline GraphField extend_boundary(const BoundaryTrace& phi,
                                  const std::shared_ptr<const SectionGrid>& grid,
                                  Ramp ramp = Ramp::SinSquared) {
  GraphField F(grid, phi.mean());
  const double mean = phi.mean();
  for (int n = 1; n < grid->node_count(); ++n) {
    const SectionCoords c = grid->coords(n);
    F[n] = mean + ramp_value(ramp, c.alpha) * (phi(c.beta) - mean);
  }
  return F;
}

struct Barrier {
  double lower;
  double upper;
};

/// Height interval enforced by umbilic caps: the cap over a circle at
/// infinity rises arctanh|H| above it, so [inf phi - arctanh|H|,
/// sup phi + arctanh|H|] contains every solution with trace phi.
inline Barrier barrier_bounds(const BoundaryTrace& phi, double H) {
  ModelSpec::require_subcritical(H);
  const double w = std::atanh(std::abs(H));
  return {phi.inf() - w, phi.sup() + w};
}

struct ExhaustionConfig {
  int n_alpha = 64;
  int n_beta = 128;
  int k_max = 5;
  double cauchy_tol = 1e-6;
  double cauchy_radius = 2.0;
  std::vector<double> gradient_radii{1.0, 2.0};
  Ramp ramp = Ramp::SinSquared;
  SolverConfig solver;
  bool curvature_monitor = true;
  bool keep_iterates = false;
};

struct ExhaustionStep {
  int k = 0;
  int ring = 0;
  double alpha_ring = 0.0;
  SolveReport solve;
  double inf_u = 0.0;
  double sup_u = 0.0;
  std::vector<double> sup_gradient;   // one per ExhaustionConfig::gradient_radii
  double cauchy_delta = std::numeric_limits<double>::quiet_NaN();  // vs previous k on B_cauchy
  double oracle_mc_max_err = std::numeric_limits<double>::quiet_NaN();
  double boundary_trace_error = 0.0;  // sup over the ring of |u_k - phi|
  double warm_start_residual = 0.0;   // extrapolated u_{k-1}
  double cold_start_residual = 0.0;   // F restricted to the ball
  double first_residual = 0.0;        // initial guess actually used
  bool used_warm_start = false;
  bool used_fallback = false;
};

struct ExhaustionReport {
  double H = 0.0;
  double theta = 0.0;
  Barrier barrier{0.0, 0.0};
  std::vector<double> gradient_radii;
  std::vector<ExhaustionStep> steps;
  std::vector<GraphField> iterates;  // filled when keep_iterates is set
  bool all_converged = false;
  bool cauchy_converged = false;
  double final_cauchy_delta = std::numeric_limits<double>::quiet_NaN();

  /// sup_{B_radius} |du_k|_sigma over k, for a radius in gradient_radii.
  std::vector<double> gradient_series(double radius) const {
    std::vector<double> out;
    for (std::size_t r = 0; r < gradient_radii.size(); ++r)
      if (gradient_radii[r] == radius)
        for (const auto& s : steps) out.push_back(s.sup_gradient[r]);
    return out;
  }
};

struct ExhaustionResult {
  GraphField u;
  ExhaustionReport report;
};

/// Largest |H_mesh - H| over vertices of the graph at least two rings inside
/// the ball bounded by `ring`.
inline double curvature_oracle_error(const GraphField& u, int ring, double H) {
  const TriMesh mesh = embed_graph(u, ring);
  const CurvatureSample mc = mean_curvature_oracle(mesh);
  const int limit = u.grid().closed_count(std::max(0, ring - 2));
  double err = 0.0;
  for (int v = 0; v < limit; ++v)
    if (mc.valid[static_cast<std::size_t>(v)])
      err = std::max(err, std::abs(mc.H[static_cast<std::size_t>(v)] - H));
  return err;
}

/// Warm start on a larger ball. u is continued past the ring `inner` by
/// quadratic extrapolation in alpha, then shifted along the flow by
/// delta(beta) = F - u on the ring `outer`; the beta-dependent part of the
/// shift is faded towards the pole with the ramp so the field stays smooth
/// there. A pure translate results when delta is constant.
inline void warm_extension(GraphField& u, const GraphField& F, int inner, int outer,
                           Ramp ramp = Ramp::SinSquared) {
  const SectionGrid& grid = u.grid();
  const int nb = grid.n_beta();
  for (int j = 0; j < nb; ++j) {
    const double u0 = u.at(inner - 2, j), u1 = u.at(inner - 1, j), u2 = u.at(inner, j);
    for (int i = inner + 1; i <= outer; ++i) {
      const double t = static_cast<double>(i - inner);
      u[grid.node(i, j)] = u2 + t * (u2 - u1) + 0.5 * t * (t + 1) * (u2 - 2 * u1 + u0);
    }
  }
  std::vector<double> delta(static_cast<std::size_t>(nb));
  double mean = 0.0;
  for (int j = 0; j < nb; ++j) {
    delta[static_cast<std::size_t>(j)] = F.at(outer, j) - u.at(outer, j);
    mean += delta[static_cast<std::size_t>(j)];
  }
  mean /= nb;
  const double m_outer = ramp_value(ramp, grid.alpha(outer));
  u[0] += mean;
  for (int i = 1; i <= outer; ++i) {
    const double w = ramp_value(ramp, grid.alpha(i)) / m_outer;
    for (int j = 0; j < nb; ++j)
      u[grid.node(i, j)] += mean + w * (delta[static_cast<std::size_t>(j)] - mean);
  }
}

inline ExhaustionResult exhaustion_solve(const BoundaryTrace& phi, const ModelSpec& model,
                                         const ExhaustionConfig& cfg = {}) {
  model.validate();
  if (cfg.k_max < 3) throw InvalidInput("exhaustion needs k_max >= 3");
  const double H = model.H;
  const auto grid = SectionGrid::make(cfg.n_alpha, cfg.n_beta, ball_alpha(cfg.k_max), model.motion);
  const GraphField F = extend_boundary(phi, grid, cfg.ramp);

  ExhaustionReport report;
  report.H = H;
  report.theta = model.motion.theta;
  report.barrier = barrier_bounds(phi, H);
  report.gradient_radii = cfg.gradient_radii;

  const int cauchy_ring = grid->ring_for_radius(cfg.cauchy_radius);
  GraphField u = F;
  std::vector<double> previous;
  int previous_ring = 0;
  const double slack = 10 * cfg.solver.tol;

  for (int k = 2; k <= cfg.k_max; ++k) {
    const int ring = k == cfg.k_max ? grid->n_alpha() - 1 : grid->ring_for_radius(k);
    if (ring <= previous_ring || ring < 2) {
      std::ostringstream os;
      os << "grid too coarse: ball B_" << k << " does not add a ring (n_alpha = " << cfg.n_alpha << ")";
      InvalidInput err(os.str());
      err.k = k;
      throw err;
    }
    ExhaustionStep step;
    step.k = k;
    step.ring = ring;
    step.alpha_ring = grid->alpha(ring);

    DirichletProblem problem{grid, ring, {}, H, u};
    problem.boundary.resize(static_cast<std::size_t>(grid->n_beta()));
    for (int j = 0; j < grid->n_beta(); ++j)
      problem.boundary[static_cast<std::size_t>(j)] = F.at(ring, j);

    if (previous_ring > 0) warm_extension(problem.initial, F, previous_ring, ring, cfg.ramp);
    step.warm_start_residual = assemble_residual(problem.initial, H, ring).sup_norm();
    step.cold_start_residual = assemble_residual(F, H, ring).sup_norm();
    step.used_warm_start = k > 2 && step.warm_start_residual <= step.cold_start_residual;
    if (!step.used_warm_start) problem.initial = F;
    step.first_residual = std::min(step.warm_start_residual, step.cold_start_residual);

    SolveResult result{u, {}};
    try {
      result = continuation_solve(problem, cfg.solver, step.used_warm_start ? H : 0.0);
    } catch (NonConvergence&) {
      if (!step.used_warm_start) throw;
      step.used_fallback = true;
      problem.initial = F;
      try {
        result = continuation_solve(problem, cfg.solver, 0.0);
      } catch (Error& e) {
        e.k = k;
        throw;
      }
    } catch (Error& e) {
      e.k = k;
      throw;
    }
    u = std::move(result.u);
    step.solve = std::move(result.report);
    step.inf_u = step.solve.inf_u;
    step.sup_u = step.solve.sup_u;

    if (step.inf_u < report.barrier.lower - slack || step.sup_u > report.barrier.upper + slack) {
      std::ostringstream os;
      os << "u_" << k << " leaves the barrier interval [" << report.barrier.lower << ", "
         << report.barrier.upper << "]: range [" << step.inf_u << ", " << step.sup_u << "]";
      BarrierViolation err(os.str());
      err.k = k;
      err.H = H;
      throw err;
    }

    const auto grads = gradient_norms(u, ring - 1);
    for (double radius : cfg.gradient_radii) {
      const int r = std::min(grid->ring_for_radius(radius), ring - 1);
      const int n = grid->closed_count(r);
      step.sup_gradient.push_back(*std::max_element(grads.begin(), grads.begin() + n));
    }

    for (int j = 0; j < grid->n_beta(); ++j)
      step.boundary_trace_error =
          std::max(step.boundary_trace_error, std::abs(u.at(ring, j) - phi(grid->beta(j))));

    const int n_cauchy = grid->closed_count(std::min(cauchy_ring, ring));
    if (!previous.empty()) {
      double delta = 0.0;
      for (int n = 0; n < n_cauchy; ++n) delta = std::max(delta, std::abs(u[n] - previous[static_cast<std::size_t>(n)]));
      step.cauchy_delta = delta;
    }
    if (cfg.curvature_monitor) step.oracle_mc_max_err = curvature_oracle_error(u, ring, H);

    previous = u.values();
    previous_ring = ring;
    if (cfg.keep_iterates) report.iterates.push_back(u);
    report.steps.push_back(std::move(step));
  }

  report.all_converged = std::all_of(report.steps.begin(), report.steps.end(),
                                     [](const ExhaustionStep& s) { return s.solve.converged; });
  report.final_cauchy_delta = report.steps.back().cauchy_delta;
  report.cauchy_converged = report.final_cauchy_delta <= cfg.cauchy_tol;
  return {std::move(u), std::move(report)};
}

struct GradientVerdict {
  bool bounded = false;      // max <= 2 * median
  bool no_blowup = false;    // not a monotone run with growth above 50%
  double max = 0.0;
  double median = 0.0;
  std::vector<double> values;

  bool passed() const { return bounded && no_blowup; }
};

/// Stability test on a sequence of interior gradient bounds.
inline GradientVerdict gradient_sequence_verdict(std::vector<double> values) {
  GradientVerdict v;
  v.values = values;
  if (values.size() < 3) return v;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  v.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  v.max = sorted.back();
  const double scale = std::max(v.median, 1e-12);
  v.bounded = v.max <= 2.0 * v.median + 1e-12;
  bool increasing = true;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] <= values[i - 1]) increasing = false;
  const double growth = (values.back() - values.front()) / std::max(std::abs(values.front()), scale);
  v.no_blowup = !(increasing && growth > 0.5);
  return v;
}

/// Boundedness of sup_{B_radius} |du_k|_sigma across the exhaustion.
inline GradientVerdict gradient_monitor(const ExhaustionReport& report, double radius = 1.0) {
  return gradient_sequence_verdict(report.gradient_series(radius));
}

}  // namespace kcmc
