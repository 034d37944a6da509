#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "fdcrack/levelset.hpp"
#include "fdcrack/mesh.hpp"

namespace fdcrack {

using SpMat = Eigen::SparseMatrix<double>;

/// Displacement space on the whole background mesh, before any crack
/// restriction, with the Dirichlet node set on (a part of) the outer boundary.
struct UncutSpace {
  const BackgroundMesh* mesh = nullptr;
  ElementType elem{1};
  DofMap dof;
  std::vector<char> node_on_dirichlet;  // per scalar node

  int n_nodes() const { return dof.n_nodes; }
  int n_dofs() const { return dof.n_dofs(); }
};

inline UncutSpace build_uncut_space(
    const BackgroundMesh& mesh, const ElementType& elem,
    const std::function<bool(const Vector2d&)>& dirichlet_predicate = {}) {
  UncutSpace s;
  s.mesh = &mesh;
  s.elem = elem;
  s.dof = global_dof_map(mesh, elem, 2);
  s.node_on_dirichlet.resize(s.dof.n_nodes, 0);
  double tol = 1e-10 * std::min(mesh.dx, mesh.dy);
  for (int n = 0; n < s.dof.n_nodes; ++n) {
    const Vector2d& p = s.dof.node_coords[n];
    bool d = dirichlet_predicate ? dirichlet_predicate(p) : mesh.domain.on_boundary(p, tol);
    s.node_on_dirichlet[n] = d ? 1 : 0;
  }
  return s;
}

/// One side's displacement space V_h^+/V_h^-: the uncut space restricted to
/// the scalar nodes whose basis support meets the side. Kept-DOF layout is
/// component-blocked: kept dof (local, comp) = comp * n_kept + local.
struct RestrictedSpace {
  Side side = Side::Plus;
  int n_uncut_nodes = 0;
  std::vector<int> kept_nodes;   // ascending uncut scalar node ids
  std::vector<int> node_local;   // uncut node -> local index or -1
  std::vector<char> local_dirichlet;  // per kept node

  int n_kept() const { return static_cast<int>(kept_nodes.size()); }
  int n_dofs() const { return 2 * n_kept(); }
  int dof(int local, int comp) const { return comp * n_kept() + local; }

  /// Scalar reduction matrix R (n_kept x n_uncut_nodes), binary. E = R^T.
  SpMat reduction_matrix() const {
    SpMat R(n_kept(), n_uncut_nodes);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(kept_nodes.size());
    for (int l = 0; l < n_kept(); ++l) t.emplace_back(l, kept_nodes[l], 1.0);
    R.setFromTriplets(t.begin(), t.end());
    return R;
  }
};

inline RestrictedSpace build_restricted(const UncutSpace& space, const CutMesh& cm,
                                        Side side) {
  RestrictedSpace rs;
  rs.side = side;
  rs.n_uncut_nodes = space.n_nodes();
  rs.node_local.assign(space.n_nodes(), -1);
  std::vector<char> keep(space.n_nodes(), 0);
  for (int c = 0; c < cm.n_cells(); ++c) {
    if (!cm.cell_on_side(c, side)) continue;
    for (int n : space.dof.cell_nodes[c]) keep[n] = 1;
  }
  for (int n = 0; n < space.n_nodes(); ++n) {
    if (keep[n]) {
      rs.node_local[n] = static_cast<int>(rs.kept_nodes.size());
      rs.kept_nodes.push_back(n);
      rs.local_dirichlet.push_back(space.node_on_dirichlet[n]);
    }
  }
  if (rs.kept_nodes.empty())
    throw std::invalid_argument(
        "build_restricted: crack does not split the domain (side has no cells)");
  return rs;
}

/// Multiplier space W_h on Gamma_0: traces of a scalar background element,
/// with redundant trace DOFs eliminated by a pivoted Gram factorization.
/// Vector multipliers use the same scalar pattern for both components:
/// multiplier dof (a, comp) = comp * n_active + a.
struct MultiplierSpace {
  ElementType elem{0};
  DofMap dof;                 // scalar dof map of the trace element
  std::vector<int> active;    // ascending scalar node ids kept after elimination
  std::vector<int> node_active;  // node -> active index or -1

  int n_active() const { return static_cast<int>(active.size()); }
  int n_dofs() const { return 2 * n_active(); }
  int mdof(int a, int comp) const { return comp * n_active() + a; }

  /// Active scalar trace values at a point inside `cell`; pairs (active, psi).
  std::vector<std::pair<int, double>> trace_values(const BackgroundMesh& mesh, int cell,
                                                   const Vector2d& x) const {
    Eigen::VectorXd v = elem.values(mesh.map_to_reference(cell, x));
    std::vector<std::pair<int, double>> out;
    const auto& nodes = dof.cell_nodes[cell];
    for (std::size_t l = 0; l < nodes.size(); ++l) {
      int a = node_active[nodes[l]];
      if (a >= 0) out.emplace_back(a, v[static_cast<int>(l)]);
    }
    return out;
  }
};

inline MultiplierSpace build_multiplier(const ElementType& trace_elem, const CutMesh& cm,
                                        const std::vector<InterfacePoint>& interface,
                                        double eps_rank = 1e-8) {
  MultiplierSpace ms;
  ms.elem = trace_elem;
  ms.dof = global_dof_map(*cm.mesh, trace_elem, 1);
  ms.node_active.assign(ms.dof.n_nodes, -1);

  // candidate DOFs: scalar nodes of cells that carry Gamma_0 quadrature mass
  std::vector<char> cand_mark(ms.dof.n_nodes, 0);
  bool any_gamma0 = false;
  for (const auto& ip : interface) {
    if (ip.tag != InterfaceTag::Gamma0) continue;
    any_gamma0 = true;
    for (int n : ms.dof.cell_nodes[ip.cell]) cand_mark[n] = 1;
  }
  if (!any_gamma0)
    throw std::invalid_argument("build_multiplier: Gamma_0 is empty, nothing to glue");

  std::vector<int> cand;
  for (int n = 0; n < ms.dof.n_nodes; ++n)
    if (cand_mark[n]) cand.push_back(n);
  const int nc = static_cast<int>(cand.size());
  std::vector<int> cand_index(ms.dof.n_nodes, -1);
  for (int i = 0; i < nc; ++i) cand_index[cand[i]] = i;

  // Gram matrix of candidate traces on Gamma_0
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(nc, nc);
  for (const auto& ip : interface) {
    if (ip.tag != InterfaceTag::Gamma0) continue;
    Eigen::VectorXd v = trace_elem.values(cm.mesh->map_to_reference(ip.cell, ip.x));
    const auto& nodes = ms.dof.cell_nodes[ip.cell];
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      int ia = cand_index[nodes[a]];
      for (std::size_t b = 0; b < nodes.size(); ++b) {
        int ib = cand_index[nodes[b]];
        gram(ia, ib) += ip.w * v[static_cast<int>(a)] * v[static_cast<int>(b)];
      }
    }
  }

  // greedy incremental Cholesky in ascending DOF order; a candidate is kept
  // only if its pivot stays above eps_rank times the largest pivot seen
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(nc, nc);
  std::vector<int> kept;  // candidate indices
  double max_pivot = 0.0;
  for (int i = 0; i < nc; ++i) {
    const int m = static_cast<int>(kept.size());
    Eigen::VectorXd rhs(m);
    for (int j = 0; j < m; ++j) rhs[j] = gram(i, kept[j]);
    Eigen::VectorXd l(m);
    for (int j = 0; j < m; ++j) {
      double s = rhs[j];
      for (int k = 0; k < j; ++k) s -= L(j, k) * l[k];
      l[j] = s / L(j, j);
    }
    double pivot = gram(i, i) - l.squaredNorm();
    double ref = std::max(max_pivot, gram(i, i));
    if (pivot <= eps_rank * ref || pivot <= 0.0) continue;  // redundant trace
    for (int j = 0; j < m; ++j) L(m, j) = l[j];
    L(m, m) = std::sqrt(pivot);
    kept.push_back(i);
    max_pivot = std::max(max_pivot, pivot);
  }

  for (int i : kept) {
    ms.node_active[cand[i]] = static_cast<int>(ms.active.size());
    ms.active.push_back(cand[i]);
  }
  return ms;
}

/// The full set of discrete spaces for one crack configuration.
struct FdSpaces {
  UncutSpace uncut;
  RestrictedSpace plus, minus;
  MultiplierSpace multiplier;

  const RestrictedSpace& restricted(Side s) const {
    return s == Side::Plus ? plus : minus;
  }
};

inline FdSpaces build_spaces(
    const CutMesh& cm, const ElementType& disp_elem, const ElementType& mult_elem,
    const std::vector<InterfacePoint>& interface, double eps_rank = 1e-8,
    const std::function<bool(const Vector2d&)>& dirichlet_predicate = {}) {
  FdSpaces sp;
  sp.uncut = build_uncut_space(*cm.mesh, disp_elem, dirichlet_predicate);
  sp.plus = build_restricted(sp.uncut, cm, Side::Plus);
  sp.minus = build_restricted(sp.uncut, cm, Side::Minus);
  sp.multiplier = build_multiplier(mult_elem, cm, interface, eps_rank);
  return sp;
}

}  // namespace fdcrack
