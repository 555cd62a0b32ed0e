#pragma once

// Damped Newton solver for the Dirichlet problem R[u] = 0 on a ball of the
// section grid, with continuation in the mean curvature.

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <vector>

#include "kcmc/errors.hpp"
#include "kcmc/operator.hpp"

namespace kcmc {

enum class LinearSolver { Direct, Iterative };

struct SolverConfig {
  double tol = 1e-9;          // sup-norm residual target
  int max_newton = 50;
  double dH = 0.1;            // largest continuation step in H
  double step_floor = 1e-4;   // smallest line-search damping factor
  LinearSolver linear = LinearSolver::Direct;
  double iterative_rtol = 1e-12;
};

/// Dirichlet problem on the ball bounded by `boundary_ring`: the values of
/// `boundary` (one per column) are imposed on that ring.
struct DirichletProblem {
  std::shared_ptr<const SectionGrid> grid;
  int boundary_ring = 0;
  std::vector<double> boundary;
  double H = 0.0;
  GraphField initial;

  void validate() const {
    ModelSpec::require_subcritical(H);
    if (!grid) throw InvalidInput("DirichletProblem without a grid");
    if (boundary_ring < 1 || boundary_ring >= grid->n_alpha())
      throw InvalidInput("DirichletProblem boundary ring outside the grid");
    if (static_cast<int>(boundary.size()) != grid->n_beta())
      throw InvalidInput("DirichletProblem needs one boundary value per column");
    for (double b : boundary)
      if (!std::isfinite(b)) throw InvalidInput("DirichletProblem boundary values must be finite");
    if (initial.grid_ptr() != grid) throw InvalidInput("initial guess lives on a different grid");
    if (!initial.all_finite()) throw InvalidInput("initial guess must be finite");
  }
};

struct SolveReport {
  int newton_iterations = 0;          // accepted steps of the final solve
  int total_newton_iterations = 0;    // summed over the continuation path
  std::vector<double> residual_history;
  bool converged = false;
  double min_ellipticity = std::numeric_limits<double>::infinity();
  double sup_u = 0.0;
  double inf_u = 0.0;
  double sup_gradient = 0.0;
  std::vector<double> continuation_path;

  double final_residual() const {
    return residual_history.empty() ? std::numeric_limits<double>::infinity()
                                    : residual_history.back();
  }
};

struct SolveResult {
  GraphField u;
  SolveReport report;
};

namespace detail {

class LinearSystem {
 public:
  explicit LinearSystem(const SolverConfig& cfg) : cfg_(cfg) {}

  Eigen::VectorXd solve(const Eigen::SparseMatrix<double>& J, const Eigen::VectorXd& rhs) {
    if (cfg_.linear == LinearSolver::Direct) {
      if (!analyzed_) {
        lu_.analyzePattern(J);
        analyzed_ = true;
      }
      lu_.factorize(J);
      if (lu_.info() != Eigen::Success) throw NonConvergence("Jacobian factorization failed");
      return lu_.solve(rhs);
    }
    iterative_.setTolerance(cfg_.iterative_rtol);
    iterative_.setMaxIterations(10 * static_cast<int>(J.rows()));
    iterative_.compute(J);
    Eigen::VectorXd x = iterative_.solve(rhs);
    if (iterative_.info() != Eigen::Success) throw NonConvergence("iterative linear solve failed");
    return x;
  }

 private:
  const SolverConfig& cfg_;
  bool analyzed_ = false;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> iterative_;
};

inline void fill_monitors(const GraphField& u, int ring, SolveReport& report) {
  const int n = u.grid().closed_count(ring);
  report.sup_u = -std::numeric_limits<double>::infinity();
  report.inf_u = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    report.sup_u = std::max(report.sup_u, u[k]);
    report.inf_u = std::min(report.inf_u, u[k]);
  }
  const auto grads = gradient_norms(u, ring - 1);
  report.sup_gradient = *std::max_element(grads.begin(), grads.end());
}

}  // namespace detail

/// Newton iteration with backtracking (halving) on the sup-norm residual.
/// Trial steps that lose ellipticity or fail to decrease the residual are
/// rejected.
inline SolveResult dirichlet_solve(const DirichletProblem& p, const SolverConfig& cfg = {}) {
  p.validate();
  const SectionGrid& grid = *p.grid;
  const int ring = p.boundary_ring;
  const int n_unknown = grid.unknown_count(ring);

  GraphField u = p.initial;
  for (int j = 0; j < grid.n_beta(); ++j) u[grid.node(ring, j)] = p.boundary[static_cast<std::size_t>(j)];

  SolveReport report;
  auto eval = assemble_residual(u, p.H, ring);
  if (eval.non_elliptic > 0) {
    EllipticityLoss err("initial iterate is not elliptic");
    err.H = p.H;
    throw err;
  }
  report.min_ellipticity = eval.min_ellipticity;
  report.residual_history.push_back(eval.sup_norm());

  detail::LinearSystem linear(cfg);
  while (report.residual_history.back() > cfg.tol) {
    if (report.newton_iterations >= cfg.max_newton) {
      std::ostringstream os;
      os << "Newton did not reach tol " << cfg.tol << " in " << cfg.max_newton
         << " iterations (residual " << report.residual_history.back() << ")";
      NonConvergence err(os.str());
      err.H = p.H;
      throw err;
    }
    const auto J = assemble_jacobian(u, p.H, ring);
    const Eigen::VectorXd delta = linear.solve(J, -eval.values);

    bool accepted = false;
    for (double lambda = 1.0; lambda >= cfg.step_floor; lambda *= 0.5) {
      GraphField trial = u;
      for (int k = 0; k < n_unknown; ++k) trial[k] += lambda * delta[k];
      if (!trial.all_finite()) continue;
      auto trial_eval = assemble_residual(trial, p.H, ring);
      const double r = trial_eval.sup_norm();
      if (trial_eval.non_elliptic == 0 && std::isfinite(r) && r < report.residual_history.back()) {
        u = std::move(trial);
        eval = std::move(trial_eval);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      std::ostringstream os;
      os << "line search stalled at residual " << report.residual_history.back();
      NonConvergence err(os.str());
      err.H = p.H;
      throw err;
    }
    ++report.newton_iterations;
    report.min_ellipticity = std::min(report.min_ellipticity, eval.min_ellipticity);
    report.residual_history.push_back(eval.sup_norm());
  }
  report.converged = true;
  report.total_newton_iterations = report.newton_iterations;
  report.continuation_path = {p.H};
  detail::fill_monitors(u, ring, report);
  return {std::move(u), std::move(report)};
}

/// Solves at `start_H` first, then steps towards p.H in increments of at
/// most cfg.dH, reusing each solution as the next initial guess.
inline SolveResult continuation_solve(const DirichletProblem& p, const SolverConfig& cfg = {},
                                      double start_H = 0.0) {
  p.validate();
  ModelSpec::require_subcritical(start_H);
  std::vector<double> path;
  const double span = p.H - start_H;
  const int steps = std::abs(span) == 0.0 ? 0 : static_cast<int>(std::ceil(std::abs(span) / cfg.dH - 1e-12));
  for (int i = 0; i <= steps; ++i)
    path.push_back(i == steps ? p.H : start_H + span * static_cast<double>(i) / steps);

  DirichletProblem stage = p;
  int total = 0;
  SolveResult result{p.initial, {}};
  for (double h : path) {
    stage.H = h;
    try {
      result = dirichlet_solve(stage, cfg);
    } catch (Error& e) {
      e.H = h;
      throw;
    }
    total += result.report.newton_iterations;
    stage.initial = result.u;
  }
  result.report.total_newton_iterations = total;
  result.report.continuation_path = path;
  return result;
}

struct OrderingReport {
  bool boundary_ordered = true;
  bool interior_ordered = true;
  double worst_violation = 0.0;  // max of u - v over interior nodes, clamped at 0
};

/// Discrete comparison principle: u <= v on the boundary ring should imply
/// u <= v inside, up to `tolerance`.
inline OrderingReport ordering_check(const GraphField& u, const GraphField& v, double /*H*/,
                                     int boundary_ring, double tolerance = 1e-8) {
  const SectionGrid& grid = u.grid();
  OrderingReport report;
  for (int j = 0; j < grid.n_beta(); ++j)
    if (u.at(boundary_ring, j) > v.at(boundary_ring, j) + tolerance) report.boundary_ordered = false;
  for (int k = 0; k < grid.unknown_count(boundary_ring); ++k)
    report.worst_violation = std::max(report.worst_violation, u[k] - v[k]);
  report.interior_ordered = report.worst_violation <= tolerance;
  return report;
}

}  // namespace kcmc
