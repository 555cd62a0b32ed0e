#pragma once

// Triangle meshes in half-space coordinates, a pointwise hyperbolic mean
// curvature estimator, and OBJ output.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kcmc/errors.hpp"

namespace kcmc {

struct TriMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;

  int vertex_count() const { return static_cast<int>(vertices.size()); }

  int edge_count() const {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(faces.size() * 3);
    for (const auto& f : faces)
      for (int e = 0; e < 3; ++e) {
        const int a = f[static_cast<std::size_t>(e)], b = f[static_cast<std::size_t>((e + 1) % 3)];
        edges.emplace_back(std::min(a, b), std::max(a, b));
      }
    std::sort(edges.begin(), edges.end());
    return static_cast<int>(std::unique(edges.begin(), edges.end()) - edges.begin());
  }

  int euler_characteristic() const {
    return vertex_count() - edge_count() + static_cast<int>(faces.size());
  }

  std::vector<std::vector<int>> vertex_neighbors() const {
    std::vector<std::vector<int>> adj(vertices.size());
    for (const auto& f : faces)
      for (int e = 0; e < 3; ++e) {
        const int a = f[static_cast<std::size_t>(e)], b = f[static_cast<std::size_t>((e + 1) % 3)];
        adj[static_cast<std::size_t>(a)].push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
      }
    for (auto& n : adj) {
      std::sort(n.begin(), n.end());
      n.erase(std::unique(n.begin(), n.end()), n.end());
    }
    return adj;
  }

  /// Vertices on an edge used by exactly one face.
  std::vector<bool> boundary_vertices() const {
    std::map<std::pair<int, int>, int> count;
    for (const auto& f : faces)
      for (int e = 0; e < 3; ++e) {
        const int a = f[static_cast<std::size_t>(e)], b = f[static_cast<std::size_t>((e + 1) % 3)];
        ++count[{std::min(a, b), std::max(a, b)}];
      }
    std::vector<bool> on_boundary(vertices.size(), false);
    for (const auto& [edge, c] : count)
      if (c == 1) {
        on_boundary[static_cast<std::size_t>(edge.first)] = true;
        on_boundary[static_cast<std::size_t>(edge.second)] = true;
      }
    return on_boundary;
  }

  /// Area-weighted vertex normals following the face winding.
  std::vector<Eigen::Vector3d> vertex_normals() const {
    std::vector<Eigen::Vector3d> n(vertices.size(), Eigen::Vector3d::Zero());
    for (const auto& f : faces) {
      const Eigen::Vector3d& a = vertices[static_cast<std::size_t>(f[0])];
      const Eigen::Vector3d& b = vertices[static_cast<std::size_t>(f[1])];
      const Eigen::Vector3d& c = vertices[static_cast<std::size_t>(f[2])];
      const Eigen::Vector3d w = (b - a).cross(c - a);
      for (int v : f) n[static_cast<std::size_t>(v)] += w;
    }
    for (auto& v : n)
      if (v.norm() > 0.0) v.normalize();
    return n;
  }
};

struct CurvatureSample {
  std::vector<double> H;     // NaN where not valid
  std::vector<bool> valid;
};

/// Pointwise hyperbolic mean curvature (average convention) of a mesh in the
/// half-space, for the normal given by the face winding.
///
/// At each vertex the half-space is first normalized by the isometry
/// q -> (q - (x0, y0, 0)) / z0 so the vertex sits at (0, 0, 1). A quadratic
/// height function is least-squares fitted over the k-ring in the frame of
/// the vertex normal, giving the Euclidean mean curvature H_e and unit normal
/// nu; the conformal factor 1/z then contributes H = z H_e + nu_z with z = 1.
/// Boundary vertices and rank-deficient fits are flagged invalid.
inline CurvatureSample mean_curvature_oracle(const TriMesh& mesh, int rings = 2) {
  const auto adj = mesh.vertex_neighbors();
  const auto boundary = mesh.boundary_vertices();
  const auto normals = mesh.vertex_normals();
  const std::size_t nv = mesh.vertices.size();

  CurvatureSample out;
  out.H.assign(nv, std::nan(""));
  out.valid.assign(nv, false);

  std::vector<int> mark(nv, -1);
  std::vector<int> patch;
  for (std::size_t v = 0; v < nv; ++v) {
    if (boundary[v] || normals[v].norm() == 0.0) continue;

    patch.clear();
    patch.push_back(static_cast<int>(v));
    mark[v] = static_cast<int>(v);
    std::size_t begin = 0;
    for (int r = 0; r < rings; ++r) {
      const std::size_t end = patch.size();
      for (std::size_t p = begin; p < end; ++p)
        for (int w : adj[static_cast<std::size_t>(patch[p])])
          if (mark[static_cast<std::size_t>(w)] != static_cast<int>(v)) {
            mark[static_cast<std::size_t>(w)] = static_cast<int>(v);
            patch.push_back(w);
          }
      begin = end;
    }
    if (patch.size() < 7) continue;

    const Eigen::Vector3d& p0 = mesh.vertices[v];
    const Eigen::Vector3d shift(p0.x(), p0.y(), 0.0);
    const double scale = 1.0 / p0.z();
    const Eigen::Vector3d n = normals[v];
    Eigen::Vector3d e1 = std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
    e1 = (e1 - e1.dot(n) * n).normalized();
    const Eigen::Vector3d e2 = n.cross(e1);

    const Eigen::Index m = static_cast<Eigen::Index>(patch.size() - 1);
    Eigen::MatrixXd design(m, 5);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      const Eigen::Vector3d d =
          (mesh.vertices[static_cast<std::size_t>(patch[static_cast<std::size_t>(r + 1)])] - shift) *
              scale - Eigen::Vector3d::UnitZ();
      const double x = d.dot(e1), y = d.dot(e2);
      design.row(r) << x, y, x * x, x * y, y * y;
      rhs[r] = d.dot(n);
    }
    // Column scaling keeps the normal equations well conditioned.
    Eigen::VectorXd col_scale = design.colwise().norm().transpose();
    if ((col_scale.array() <= 0.0).any()) continue;
    const Eigen::MatrixXd scaled = design * col_scale.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    if (qr.rank() < 5) continue;
    const Eigen::VectorXd coef = qr.solve(rhs).cwiseQuotient(col_scale);

    const double hx = coef[0], hy = coef[1];
    const double hxx = 2 * coef[2], hxy = coef[3], hyy = 2 * coef[4];
    const double g2 = 1.0 + hx * hx + hy * hy;
    const double h_euclid =
        ((1 + hy * hy) * hxx - 2 * hx * hy * hxy + (1 + hx * hx) * hyy) / (2.0 * std::pow(g2, 1.5));
    const Eigen::Vector3d nu = (n - hx * e1 - hy * e2) / std::sqrt(g2);
    const double h = h_euclid + nu.z();
    if (!std::isfinite(h)) continue;
    out.H[v] = h;
    out.valid[v] = true;
  }
  return out;
}

/// ASCII OBJ: "v x y z" lines then "f i j k" (1-based), LF endings.
inline void write_obj(const TriMesh& mesh, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  char buf[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    os << buf;
  }
  for (const auto& f : mesh.faces) os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!os) throw IoError("failed writing " + path);
}

}  // namespace kcmc
