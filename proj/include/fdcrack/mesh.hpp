#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "fdcrack/quadrature.hpp"

namespace fdcrack {

using Eigen::Vector2d;

struct RectDomain {
  double x_min, x_max, y_min, y_max;

  RectDomain(double x0, double x1, double y0, double y1)
      : x_min(x0), x_max(x1), y_min(y0), y_max(y1) {
    if (!(x_min < x_max) || !(y_min < y_max))
      throw std::invalid_argument("RectDomain: empty extent");
  }

  static RectDomain unit_square() { return RectDomain(0, 1, 0, 1); }

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }

  bool on_boundary(const Vector2d& p, double tol) const {
    return std::abs(p.x() - x_min) < tol || std::abs(p.x() - x_max) < tol ||
           std::abs(p.y() - y_min) < tol || std::abs(p.y() - y_max) < tol;
  }
};

/// Structured triangulation of a rectangle: each grid square is split along
/// its lower-left to upper-right diagonal into two triangles, both with
/// counterclockwise (positive-area) vertex order.
struct BackgroundMesh {
  RectDomain domain;
  int nx = 0, ny = 0;
  double dx = 0, dy = 0;
  double h = 0;  // max cell diameter = grid-square diagonal
  std::vector<Vector2d> vertices;
  std::vector<std::array<int, 3>> cells;

  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_vertices() const { return static_cast<int>(vertices.size()); }

  std::array<Vector2d, 3> cell_vertices(int c) const {
    const auto& t = cells[c];
    return {vertices[t[0]], vertices[t[1]], vertices[t[2]]};
  }

  double cell_area(int) const { return 0.5 * dx * dy; }

  /// Physical point of barycentric-free reference coordinates (r,s) in cell c.
  Vector2d map_to_physical(int c, const Vector2d& ref) const {
    auto v = cell_vertices(c);
    return v[0] + ref.x() * (v[1] - v[0]) + ref.y() * (v[2] - v[0]);
  }

  /// Reference coordinates of a physical point assumed to lie in cell c.
  Vector2d map_to_reference(int c, const Vector2d& p) const {
    auto v = cell_vertices(c);
    Eigen::Matrix2d J;
    J.col(0) = v[1] - v[0];
    J.col(1) = v[2] - v[0];
    return J.inverse() * (p - v[0]);
  }

  /// Jacobian of the reference-to-physical map (constant per cell).
  Eigen::Matrix2d jacobian(int c) const {
    auto v = cell_vertices(c);
    Eigen::Matrix2d J;
    J.col(0) = v[1] - v[0];
    J.col(1) = v[2] - v[0];
    return J;
  }

  void dump(std::ostream& os) const {
    for (const auto& v : vertices) os << "v " << v.x() << " " << v.y() << "\n";
    for (const auto& c : cells) os << "t " << c[0] << " " << c[1] << " " << c[2] << "\n";
  }
};

inline BackgroundMesh build_mesh(const RectDomain& domain, int nx, int ny) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("build_mesh: need nx,ny >= 1");
  BackgroundMesh m{domain};
  m.nx = nx;
  m.ny = ny;
  m.dx = domain.width() / nx;
  m.dy = domain.height() / ny;
  m.h = std::hypot(m.dx, m.dy);
  m.vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.vertices.emplace_back(domain.x_min + i * m.dx, domain.y_min + j * m.dy);
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  m.cells.reserve(static_cast<std::size_t>(2) * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int v00 = vid(i, j), v10 = vid(i + 1, j);
      int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      m.cells.push_back({v00, v10, v11});
      m.cells.push_back({v00, v11, v01});
    }
  }
  return m;
}

/// Simplex Lagrange element of degree 0..3; P0 is discontinuous (cellwise).
struct ElementType {
  int degree;
  bool continuous;

  explicit ElementType(int k) : degree(k), continuous(k >= 1) {
    if (k < 0 || k > 3) throw std::invalid_argument("ElementType: degree must be 0..3");
  }

  int n_local() const { return (degree + 1) * (degree + 2) / 2; }

  /// Reference coordinates of the local nodes. Ordering: vertices, then edge
  /// nodes along edges (0,1),(1,2),(2,0) walked from the lower local index,
  /// then the interior node.
  std::vector<Vector2d> local_nodes() const {
    switch (degree) {
      case 0:
        return {{1.0 / 3.0, 1.0 / 3.0}};
      case 1:
        return {{0, 0}, {1, 0}, {0, 1}};
      case 2:
        return {{0, 0}, {1, 0}, {0, 1}, {0.5, 0}, {0.5, 0.5}, {0, 0.5}};
      case 3:
        return {{0, 0},
                {1, 0},
                {0, 1},
                {1.0 / 3.0, 0},
                {2.0 / 3.0, 0},
                {2.0 / 3.0, 1.0 / 3.0},
                {1.0 / 3.0, 2.0 / 3.0},
                {0, 2.0 / 3.0},
                {0, 1.0 / 3.0},
                {1.0 / 3.0, 1.0 / 3.0}};
      default:
        return {};
    }
  }

  /// Shape function values at reference point (r,s).
  Eigen::VectorXd values(const Vector2d& p) const {
    double r = p.x(), s = p.y();
    double l0 = 1.0 - r - s, l1 = r, l2 = s;
    Eigen::VectorXd v(n_local());
    switch (degree) {
      case 0:
        v << 1.0;
        break;
      case 1:
        v << l0, l1, l2;
        break;
      case 2:
        v << l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
            4 * l0 * l1, 4 * l1 * l2, 4 * l2 * l0;
        break;
      case 3:
        v << 0.5 * l0 * (3 * l0 - 1) * (3 * l0 - 2),
            0.5 * l1 * (3 * l1 - 1) * (3 * l1 - 2),
            0.5 * l2 * (3 * l2 - 1) * (3 * l2 - 2),
            4.5 * l0 * l1 * (3 * l0 - 1), 4.5 * l0 * l1 * (3 * l1 - 1),
            4.5 * l1 * l2 * (3 * l1 - 1), 4.5 * l1 * l2 * (3 * l2 - 1),
            4.5 * l2 * l0 * (3 * l2 - 1), 4.5 * l2 * l0 * (3 * l0 - 1),
            27 * l0 * l1 * l2;
        break;
    }
    return v;
  }

  /// Shape function gradients w.r.t. reference coordinates, one row per node.
  Eigen::MatrixX2d gradients(const Vector2d& p) const {
    double r = p.x(), s = p.y();
    double l0 = 1.0 - r - s, l1 = r, l2 = s;
    // dl0 = (-1,-1), dl1 = (1,0), dl2 = (0,1)
    Eigen::MatrixX2d g(n_local(), 2);
    auto row = [](double d0, double d1, double d2) {
      return Eigen::RowVector2d(-d0 + d1, -d0 + d2);
    };
    switch (degree) {
      case 0:
        g.row(0) << 0, 0;
        break;
      case 1:
        g.row(0) = row(1, 0, 0);
        g.row(1) = row(0, 1, 0);
        g.row(2) = row(0, 0, 1);
        break;
      case 2:
        g.row(0) = row(4 * l0 - 1, 0, 0);
        g.row(1) = row(0, 4 * l1 - 1, 0);
        g.row(2) = row(0, 0, 4 * l2 - 1);
        g.row(3) = row(4 * l1, 4 * l0, 0);
        g.row(4) = row(0, 4 * l2, 4 * l1);
        g.row(5) = row(4 * l2, 0, 4 * l0);
        break;
      case 3: {
        auto dv = [](double l) { return 13.5 * l * l - 9.0 * l + 1.0; };
        g.row(0) = row(dv(l0), 0, 0);
        g.row(1) = row(0, dv(l1), 0);
        g.row(2) = row(0, 0, dv(l2));
        g.row(3) = row(4.5 * l1 * (6 * l0 - 1), 4.5 * l0 * (3 * l0 - 1), 0);
        g.row(4) = row(4.5 * l1 * (3 * l1 - 1), 4.5 * l0 * (6 * l1 - 1), 0);
        g.row(5) = row(0, 4.5 * l2 * (6 * l1 - 1), 4.5 * l1 * (3 * l1 - 1));
        g.row(6) = row(0, 4.5 * l2 * (3 * l2 - 1), 4.5 * l1 * (6 * l2 - 1));
        g.row(7) = row(4.5 * l2 * (3 * l2 - 1), 0, 4.5 * l0 * (6 * l2 - 1));
        g.row(8) = row(4.5 * l2 * (6 * l0 - 1), 0, 4.5 * l0 * (3 * l0 - 1));
        g.row(9) = row(27 * l1 * l2, 27 * l0 * l2, 27 * l0 * l1);
        break;
      }
    }
    return g;
  }
};

/// Global scalar-node numbering plus the blocked vector-DOF layout:
/// DOF (node, comp) = comp * n_nodes + node, all x-components first.
struct DofMap {
  int n_nodes = 0;
  int components = 1;
  std::vector<std::vector<int>> cell_nodes;  // [cell][local] -> node
  std::vector<Vector2d> node_coords;

  int n_dofs() const { return components * n_nodes; }
  int dof(int node, int comp) const { return comp * n_nodes + node; }
};

/// Continuous elements share nodes across cells; on the structured mesh all
/// Lagrange nodes of degree k lie on the (dx/k, dy/k) lattice, which gives an
/// exact integer key for node identification.
inline DofMap global_dof_map(const BackgroundMesh& mesh, const ElementType& elem,
                             int components = 2) {
  DofMap dm;
  dm.components = components;
  dm.cell_nodes.resize(mesh.n_cells());
  const auto ref_nodes = elem.local_nodes();
  if (!elem.continuous) {
    for (int c = 0; c < mesh.n_cells(); ++c) {
      for (const auto& rn : ref_nodes) {
        dm.cell_nodes[c].push_back(dm.n_nodes++);
        dm.node_coords.push_back(mesh.map_to_physical(c, rn));
      }
    }
    return dm;
  }
  int k = elem.degree;
  std::unordered_map<std::int64_t, int> lattice;
  lattice.reserve(static_cast<std::size_t>(mesh.nx * k + 1) * (mesh.ny * k + 1));
  double sx = mesh.dx / k, sy = mesh.dy / k;
  std::int64_t stride = static_cast<std::int64_t>(mesh.nx) * k + 2;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    for (const auto& rn : ref_nodes) {
      Vector2d p = mesh.map_to_physical(c, rn);
      auto i = static_cast<std::int64_t>(std::llround((p.x() - mesh.domain.x_min) / sx));
      auto j = static_cast<std::int64_t>(std::llround((p.y() - mesh.domain.y_min) / sy));
      std::int64_t key = j * stride + i;
      auto [it, inserted] = lattice.try_emplace(key, dm.n_nodes);
      if (inserted) {
        ++dm.n_nodes;
        // use the exact lattice coordinates, immune to round-off in the map
        dm.node_coords.emplace_back(mesh.domain.x_min + i * sx, mesh.domain.y_min + j * sy);
      }
      dm.cell_nodes[c].push_back(it->second);
    }
  }
  return dm;
}

}  // namespace fdcrack
