#pragma once

// Discrete constant-mean-curvature operator for Killing graphs over the
// section grid, its exact linearization, and the embedding of a graph as a
// triangle mesh in the half-space.
//
// For u a function on the section, the graph is {flow(u(p), p)}. With
// uhat = du - c (c the horizontal shift covector), W^2 = f + |uhat|^2_sigma
// and A = sigma^{-1} - uhat^# (x) uhat^# / W^2, the residual at a node is
//
//   R[u] = -(1/W) (A^{ij} uhat_{j;i} + 1/2 A^{ij} gamma_{ji}
//                  - (f + W^2)/W^2 <accel, uhat^#>) - 2 H,
//
// which is 2 (H_graph - H) with H_graph the mean curvature (average of the
// principal curvatures) for the normal eta with <Y, eta> <= 0. Umbilic caps
// bulging toward increasing s therefore solve R = 0 with H > 0.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/AutoDiff>

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <vector>

#include "kcmc/errors.hpp"
#include "kcmc/hyperbolic.hpp"
#include "kcmc/mesh.hpp"
#include "kcmc/submersion.hpp"

namespace kcmc {

/// Flow-parameter heights u on the nodes of a SectionGrid.
class GraphField {
 public:
  explicit GraphField(std::shared_ptr<const SectionGrid> grid, double value = 0.0)
      : grid_(std::move(grid)), u_(static_cast<std::size_t>(grid_->node_count()), value) {}

  GraphField(std::shared_ptr<const SectionGrid> grid, std::vector<double> values)
      : grid_(std::move(grid)), u_(std::move(values)) {
    if (static_cast<int>(u_.size()) != grid_->node_count())
      throw InvalidInput("GraphField size does not match its grid");
  }

  const SectionGrid& grid() const { return *grid_; }
  const std::shared_ptr<const SectionGrid>& grid_ptr() const { return grid_; }

  int size() const { return static_cast<int>(u_.size()); }
  double operator[](int node) const { return u_[static_cast<std::size_t>(node)]; }
  double& operator[](int node) { return u_[static_cast<std::size_t>(node)]; }
  double at(int i, int j) const { return (*this)[grid_->node(i, j)]; }
  const std::vector<double>& values() const { return u_; }
  std::vector<double>& values() { return u_; }

  bool all_finite() const {
    for (double v : u_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  std::shared_ptr<const SectionGrid> grid_;
  std::vector<double> u_;
};

/// Per-node quantities of the last residual evaluation.
struct OperatorState {
  Vec2 du = Vec2::Zero();    // chart gradient of u
  Vec2 uhat = Vec2::Zero();  // du - c
  double W = 0.0;
  double f = 0.0;
  Mat2 A = Mat2::Zero();
  double residual = 0.0;
  double min_eigenvalue = 0.0;  // smallest eigenvalue of A
  bool elliptic = false;
};

namespace detail {

inline double value_of(double x) { return x; }
template <class D>
double value_of(const Eigen::AutoDiffScalar<D>& x) {
  return x.value();
}

/// First and second chart derivatives of u at a node.
template <class S>
struct Jet {
  S ua, ub, uaa, uab, ubb;
};

inline double smallest_eigenvalue(const Mat2& a) {
  const double mean = 0.5 * (a(0, 0) + a(1, 1));
  const double diff = 0.5 * (a(0, 0) - a(1, 1));
  return mean - std::sqrt(diff * diff + a(0, 1) * a(1, 0));
}

template <class S>
S node_operator(const RingGeometry& g, const Jet<S>& jet, double H, OperatorState* state) {
  using std::sqrt;
  const S hat0 = jet.ua - g.shift[0];
  const S hat1 = jet.ub - g.shift[1];
  const S up0 = g.sigma_inv(0, 0) * hat0 + g.sigma_inv(0, 1) * hat1;
  const S up1 = g.sigma_inv(1, 0) * hat0 + g.sigma_inv(1, 1) * hat1;
  const S W2 = g.f + hat0 * up0 + hat1 * up1;
  const S W = sqrt(W2);

  const S A00 = g.sigma_inv(0, 0) - up0 * up0 / W2;
  const S A01 = g.sigma_inv(0, 1) - up0 * up1 / W2;
  const S A11 = g.sigma_inv(1, 1) - up1 * up1 / W2;

  // uhat_{j;i} = d_i d_j u - d_i c_j - Gamma^k_ij uhat_k
  auto cov = [&](int i, int j, const S& hess) -> S {
    return hess - g.dshift(i, j) - g.christoffel[0](i, j) * hat0 - g.christoffel[1](i, j) * hat1;
  };
  const S c00 = cov(0, 0, jet.uaa);
  const S c01 = cov(0, 1, jet.uab);
  const S c10 = cov(1, 0, jet.uab);
  const S c11 = cov(1, 1, jet.ubb);

  const S contraction = A00 * c00 + A01 * (c01 + c10) + A11 * c11 +
                        0.5 * (A01 * (g.gamma(1, 0) + g.gamma(0, 1)));
  const S accel = (g.f + W2) / W2 * (g.accel[0] * up0 + g.accel[1] * up1);
  const S residual = -(contraction - accel) / W - 2.0 * H;

  if (state != nullptr) {
    state->du = {value_of(jet.ua), value_of(jet.ub)};
    state->uhat = {value_of(hat0), value_of(hat1)};
    state->W = value_of(W);
    state->f = g.f;
    state->A << value_of(A00), value_of(A01), value_of(A01), value_of(A11);
    state->residual = value_of(residual);
    state->min_eigenvalue = smallest_eigenvalue(state->A);
    state->elliptic = state->min_eigenvalue > 0.0 && value_of(W2) >= g.f * (1.0 - 1e-14);
  }
  return residual;
}

/// Centered second-order jet from the 3x3 stencil U[(da + 1) * 3 + (db + 1)].
template <class S>
Jet<S> stencil_jet(const std::array<S, 9>& U, double da, double db) {
  auto at = [&](int a, int b) -> const S& { return U[static_cast<std::size_t>((a + 1) * 3 + (b + 1))]; };
  Jet<S> jet;
  jet.ua = (at(1, 0) - at(-1, 0)) / (2 * da);
  jet.ub = (at(0, 1) - at(0, -1)) / (2 * db);
  jet.uaa = (at(1, 0) - 2.0 * at(0, 0) + at(-1, 0)) / (da * da);
  jet.ubb = (at(0, 1) - 2.0 * at(0, 0) + at(0, -1)) / (db * db);
  jet.uab = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * da * db);
  return jet;
}

/// Pole closure: second-order Cartesian jet at alpha = 0 from the Fourier
/// modes 0, 1, 2 of the first ring (polar identification
/// u(-a, b) = u(a, b + pi) is built into the mode expansion).
template <class S, class Ring>
Jet<S> pole_jet(const SectionGrid& grid, const S& u0, const Ring& ring) {
  const int n = grid.n_beta();
  const double r = grid.alpha(1);
  S mean = 0.0 * u0, a1 = mean, b1 = mean, a2 = mean, b2 = mean;
  for (int j = 0; j < n; ++j) {
    const S& v = ring[static_cast<std::size_t>(j)];
    mean += v;
    a1 += grid.cos_beta(j, 1) * v;
    b1 += grid.sin_beta(j, 1) * v;
    a2 += grid.cos_beta(j, 2) * v;
    b2 += grid.sin_beta(j, 2) * v;
  }
  mean /= static_cast<double>(n);
  const double w = 2.0 / n;
  const S lap = 4.0 * (mean - u0) / (r * r);
  const S diff = 4.0 * w * a2 / (r * r);
  Jet<S> jet;
  jet.ua = w * a1 / r;
  jet.ub = w * b1 / r;
  jet.uaa = 0.5 * (lap + diff);
  jet.ubb = 0.5 * (lap - diff);
  jet.uab = 2.0 * w * b2 / (r * r);
  return jet;
}

inline int resolve_ring(const SectionGrid& grid, int boundary_ring) {
  const int ring = boundary_ring < 0 ? grid.n_alpha() - 1 : boundary_ring;
  if (ring < 1 || ring >= grid.n_alpha())
    throw InvalidInput("boundary ring outside the grid");
  return ring;
}

// Global node of stencil slot (da, db) around ring i, column j.
inline int stencil_node(const SectionGrid& grid, int i, int j, int da, int db) {
  return grid.node(i + da, j + db);
}

}  // namespace detail

struct ResidualEvaluation {
  Eigen::VectorXd values;  // one entry per unknown node (prefix numbering)
  std::vector<OperatorState> states;
  int non_elliptic = 0;
  double min_ellipticity = std::numeric_limits<double>::infinity();

  double sup_norm() const { return values.size() == 0 ? 0.0 : values.cwiseAbs().maxCoeff(); }
};

/// Residual on the open ball bounded by `boundary_ring` (-1: the outermost
/// ring of the grid). Values on the boundary ring act as Dirichlet data.
inline ResidualEvaluation assemble_residual(const GraphField& u, double H, int boundary_ring = -1) {
  if (!u.all_finite()) throw InvalidInput("assemble_residual: non-finite field values");
  const SectionGrid& grid = u.grid();
  const int ring = detail::resolve_ring(grid, boundary_ring);
  const int n_unknown = grid.unknown_count(ring);
  const double da = grid.d_alpha(), db = grid.d_beta();

  ResidualEvaluation out;
  out.values.resize(n_unknown);
  out.states.resize(static_cast<std::size_t>(n_unknown));

  std::vector<double> first_ring(static_cast<std::size_t>(grid.n_beta()));
  for (int j = 0; j < grid.n_beta(); ++j) first_ring[static_cast<std::size_t>(j)] = u.at(1, j);
  out.values[0] = detail::node_operator(grid.ring(0), detail::pole_jet(grid, u[0], first_ring), H,
                                        &out.states[0]);

  for (int i = 1; i < ring; ++i) {
    const RingGeometry& g = grid.ring(i);
    for (int j = 0; j < grid.n_beta(); ++j) {
      std::array<double, 9> U;
      for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
          U[static_cast<std::size_t>((a + 1) * 3 + (b + 1))] =
              u[detail::stencil_node(grid, i, j, a, b)];
      const int n = grid.node(i, j);
      out.values[n] = detail::node_operator(g, detail::stencil_jet(U, da, db), H,
                                            &out.states[static_cast<std::size_t>(n)]);
    }
  }
  for (const auto& s : out.states) {
    if (!s.elliptic) ++out.non_elliptic;
    out.min_ellipticity = std::min(out.min_ellipticity, s.min_eigenvalue);
  }
  return out;
}

/// Exact Jacobian of `assemble_residual` with respect to the unknown nodes,
/// by forward-mode differentiation of the node formula. Interior rows couple
/// to the 9-point stencil; the pole row couples to the whole first ring.
inline Eigen::SparseMatrix<double> assemble_jacobian(const GraphField& u, double H,
                                                     int boundary_ring = -1) {
  if (!u.all_finite()) throw InvalidInput("assemble_jacobian: non-finite field values");
  const SectionGrid& grid = u.grid();
  const int ring = detail::resolve_ring(grid, boundary_ring);
  const int n_unknown = grid.unknown_count(ring);
  const int nb = grid.n_beta();
  const double da = grid.d_alpha(), db = grid.d_beta();

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n_unknown) * 9 + static_cast<std::size_t>(3 * nb));

  {
    using Dyn = Eigen::AutoDiffScalar<Eigen::VectorXd>;
    const int nd = nb + 1;
    Dyn u0(u[0], nd, 0);
    std::vector<Dyn> first_ring;
    first_ring.reserve(static_cast<std::size_t>(nb));
    for (int j = 0; j < nb; ++j) first_ring.emplace_back(u.at(1, j), nd, j + 1);
    const Dyn r = detail::node_operator(grid.ring(0), detail::pole_jet(grid, u0, first_ring), H,
                                        static_cast<OperatorState*>(nullptr));
    triplets.emplace_back(0, 0, r.derivatives()[0]);
    if (ring > 1)
      for (int j = 0; j < nb; ++j) triplets.emplace_back(0, grid.node(1, j), r.derivatives()[j + 1]);
  }

  using Fixed = Eigen::AutoDiffScalar<Eigen::Matrix<double, 9, 1>>;
  for (int i = 1; i < ring; ++i) {
    const RingGeometry& g = grid.ring(i);
    for (int j = 0; j < nb; ++j) {
      std::array<Fixed, 9> U;
      std::array<int, 9> idx;
      for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) {
          const auto k = static_cast<std::size_t>((a + 1) * 3 + (b + 1));
          idx[k] = detail::stencil_node(grid, i, j, a, b);
          U[k] = Fixed(u[idx[k]], 9, static_cast<int>(k));
        }
      const Fixed r = detail::node_operator(g, detail::stencil_jet(U, da, db), H,
                                            static_cast<OperatorState*>(nullptr));
      const int row = grid.node(i, j);
      for (std::size_t k = 0; k < 9; ++k)
        if (idx[k] < n_unknown) triplets.emplace_back(row, idx[k], r.derivatives()[static_cast<Eigen::Index>(k)]);
    }
  }

  Eigen::SparseMatrix<double> J(n_unknown, n_unknown);
  J.setFromTriplets(triplets.begin(), triplets.end());
  J.makeCompressed();
  return J;
}

/// Chart gradient norm |du|_sigma at every node of the closed ball bounded by
/// `ring`, using the same differences as the operator (pole: Cartesian).
inline std::vector<double> gradient_norms(const GraphField& u, int ring) {
  const SectionGrid& grid = u.grid();
  std::vector<double> out(static_cast<std::size_t>(grid.closed_count(std::min(ring, grid.n_alpha() - 1))), 0.0);
  std::vector<double> first_ring(static_cast<std::size_t>(grid.n_beta()));
  for (int j = 0; j < grid.n_beta(); ++j) first_ring[static_cast<std::size_t>(j)] = u.at(1, j);
  const auto pj = detail::pole_jet(grid, u[0], first_ring);
  out[0] = std::hypot(pj.ua, pj.ub);
  const double da = grid.d_alpha(), db = grid.d_beta();
  for (int i = 1; i <= ring && i < grid.n_alpha(); ++i) {
    const RingGeometry& g = grid.ring(i);
    for (int j = 0; j < grid.n_beta(); ++j) {
      const double ua = i + 1 < grid.n_alpha()
                            ? (u.at(i + 1, j) - u.at(i - 1, j)) / (2 * da)
                            : (3 * u.at(i, j) - 4 * u.at(i - 1, j) + u.at(i - 2, j)) / (2 * da);
      const double ub = (u.at(i, j + 1) - u.at(i, j - 1)) / (2 * db);
      const Vec2 d(ua, ub);
      out[static_cast<std::size_t>(grid.node(i, j))] = std::sqrt(d.dot(g.sigma_inv * d));
    }
  }
  return out;
}

/// Graph of u as a triangle mesh: vertex n is flow(u_n, section_point(n)),
/// ordered by node number, restricted to the closed ball bounded by `ring`
/// (-1: whole grid). Triangles are wound so their normal satisfies
/// <Y, eta> <= 0.
inline TriMesh embed_graph(const GraphField& u, int ring = -1) {
  const SectionGrid& grid = u.grid();
  const int last = ring < 0 ? grid.n_alpha() - 1 : ring;
  const int nb = grid.n_beta();
  TriMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(grid.closed_count(last)));
  for (int n = 0; n < grid.closed_count(last); ++n)
    mesh.vertices.push_back(
        flow(u[n], section_point(grid.coords(n)), grid.motion()).coords());
  for (int j = 0; j < nb; ++j) mesh.faces.push_back({0, grid.node(1, j + 1), grid.node(1, j)});
  for (int i = 1; i < last; ++i)
    for (int j = 0; j < nb; ++j) {
      const int a = grid.node(i, j), b = grid.node(i + 1, j);
      const int c = grid.node(i + 1, j + 1), d = grid.node(i, j + 1);
      mesh.faces.push_back({a, c, b});
      mesh.faces.push_back({a, d, c});
    }
  return mesh;
}

}  // namespace kcmc
