#pragma once

#include <array>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "fdcrack/levelset.hpp"
#include "fdcrack/mesh.hpp"
#include "fdcrack/spaces.hpp"

namespace fdcrack {

using VecX = Eigen::VectorXd;

struct Material {
  double lambda, mu;

  Material(double lambda_, double mu_) : lambda(lambda_), mu(mu_) {
    if (!(mu > 0) || lambda < 0)
      throw std::invalid_argument("Material: need mu > 0 and lambda >= 0");
  }

  static Material from_young_poisson(double E, double nu) {
    return Material(E * nu / ((1 - 2 * nu) * (1 + nu)), E / (2 * (1 + nu)));
  }

  /// sigma_L(u) for a displacement gradient (row i = grad of component i).
  Eigen::Matrix2d stress(const Eigen::Matrix2d& grad_u) const {
    Eigen::Matrix2d eps = 0.5 * (grad_u + grad_u.transpose());
    return 2.0 * mu * eps + lambda * eps.trace() * Eigen::Matrix2d::Identity();
  }
};

/// Problem data. The crack traction is given from the Plus side; the Minus
/// side receives the opposite vector ((sigma n)^± = ±g, and p n^- = -p n^+).
struct ProblemData {
  std::function<Vector2d(const Vector2d&)> body_force;
  std::function<Vector2d(const Vector2d&, const Vector2d& /*n_plus*/)> traction_plus;
  std::function<Vector2d(const Vector2d&)> jump;  // prescribed [u] on Gamma_0
  std::function<Vector2d(const Vector2d&, Side)> dirichlet;

  static ProblemData homogeneous() {
    ProblemData d;
    d.body_force = [](const Vector2d&) { return Vector2d::Zero().eval(); };
    d.traction_plus = [](const Vector2d&, const Vector2d&) {
      return Vector2d::Zero().eval();
    };
    d.jump = [](const Vector2d&) { return Vector2d::Zero().eval(); };
    d.dirichlet = [](const Vector2d&, Side) { return Vector2d::Zero().eval(); };
    return d;
  }

  static ProblemData crack_pressure(double p) {
    ProblemData d = homogeneous();
    d.traction_plus = [p](const Vector2d&, const Vector2d& n_plus) {
      return (p * n_plus).eval();
    };
    return d;
  }
};

namespace detail {

/// Physical shape gradients in a cell, one row per local node.
inline Eigen::MatrixX2d physical_gradients(const BackgroundMesh& mesh,
                                           const ElementType& elem, int cell,
                                           const Vector2d& x) {
  return elem.gradients(mesh.map_to_reference(cell, x)) *
         mesh.jacobian(cell).inverse();
}

/// sigma_L(phi_{a,c}) n for every (local node a, component c), n = n_plus.
/// Row layout matches the blocked DOF order: a + c * n_local.
inline Eigen::MatrixX2d stress_normal_rows(const Eigen::MatrixX2d& gphys,
                                           const Material& mat, const Vector2d& n) {
  const int nl = static_cast<int>(gphys.rows());
  Eigen::MatrixX2d s(2 * nl, 2);
  for (int a = 0; a < nl; ++a) {
    Vector2d g = gphys.row(a).transpose();
    double gn = g.dot(n);
    for (int c = 0; c < 2; ++c) {
      Vector2d v = mat.lambda * g[c] * n + mat.mu * n[c] * g;
      v[c] += mat.mu * gn;
      s.row(a + c * nl) = v.transpose();
    }
  }
  return s;
}

/// Elasticity integrand sigma_L(phi_{a,c1}) : eps(phi_{b,c2}).
inline double stiffness_entry(const Eigen::MatrixX2d& g, int a, int c1, int b, int c2,
                              const Material& mat) {
  double v = mat.lambda * g(a, c1) * g(b, c2) + mat.mu * g(a, c2) * g(b, c1);
  if (c1 == c2) v += mat.mu * g.row(a).dot(g.row(b));
  return v;
}

}  // namespace detail

/// Crack-independent stiffness on the uncut space, no boundary conditions.
inline SpMat assemble_base_stiffness(const UncutSpace& space, const Material& mat,
                                     int quad_degree = -1) {
  const BackgroundMesh& mesh = *space.mesh;
  const ElementType& elem = space.elem;
  if (quad_degree < 0) quad_degree = std::max(2 * (elem.degree - 1), 0);
  auto rule = triangle_rule(quad_degree);
  const int nl = elem.n_local();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.n_cells()) * nl * nl * 4);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    double jac = 2.0 * mesh.cell_area(c);
    Eigen::Matrix2d Jinv = mesh.jacobian(c).inverse();
    const auto& nodes = space.dof.cell_nodes[c];
    for (const auto& qp : rule) {
      Eigen::MatrixX2d g = elem.gradients(qp.x) * Jinv;
      double w = qp.w * jac;
      for (int a = 0; a < nl; ++a)
        for (int c1 = 0; c1 < 2; ++c1)
          for (int b = 0; b < nl; ++b)
            for (int c2 = 0; c2 < 2; ++c2)
              trip.emplace_back(space.dof.dof(nodes[a], c1), space.dof.dof(nodes[b], c2),
                                w * detail::stiffness_entry(g, a, c1, b, c2, mat));
    }
  }
  SpMat A(space.n_dofs(), space.n_dofs());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

/// The assembled block system of the (possibly stabilized) saddle problem,
/// on the full kept-DOF index sets plus its Dirichlet-reduced counterpart.
struct SaddleSystem {
  double gamma0 = 0.0;
  double gamma = 0.0;  // gamma0 * h

  std::array<SpMat, 2> A;    // kept x kept, per side
  std::array<SpMat, 2> B;    // multiplier x kept
  SpMat C;                   // multiplier x multiplier
  std::array<VecX, 2> F;     // kept
  VecX G;                    // multiplier

  std::array<std::vector<int>, 2> free_index;  // kept dof -> free idx or -1
  std::array<int, 2> n_free{0, 0};
  std::array<VecX, 2> dirichlet_values;  // kept, nonzero on Dirichlet dofs
  std::array<SpMat, 2> A_ff, B_f;
  std::array<VecX, 2> F_red;
  VecX G_red;

  int n_mult() const { return static_cast<int>(G.size()); }
};

struct AssemblyInput {
  const CutMesh* cm;
  const FdSpaces* spaces;
  const SideQuadrature* volume;
  const std::vector<InterfacePoint>* interface;
};

inline SaddleSystem assemble_system(const AssemblyInput& in, const Material& mat,
                                    const ProblemData& data, double gamma0) {
  if (gamma0 < 0) throw std::invalid_argument("assemble_system: gamma0 must be >= 0");
  const CutMesh& cm = *in.cm;
  const BackgroundMesh& mesh = *cm.mesh;
  const FdSpaces& sp = *in.spaces;
  const ElementType& elem = sp.uncut.elem;
  const int nl = elem.n_local();
  const int m = sp.multiplier.n_dofs();
  const int ma = sp.multiplier.n_active();

  SaddleSystem sys;
  sys.gamma0 = gamma0;
  sys.gamma = gamma0 * mesh.h;

  std::array<std::vector<Eigen::Triplet<double>>, 2> tA, tB;
  std::vector<Eigen::Triplet<double>> tC;

  // volume terms: stiffness and body load, side by side
  for (Side s : {Side::Plus, Side::Minus}) {
    const int si = static_cast<int>(s);
    const RestrictedSpace& rs = sp.restricted(s);
    sys.F[si] = VecX::Zero(rs.n_dofs());
    int last_cell = -1;
    Eigen::Matrix2d Jinv;
    std::vector<int> loc(nl);
    for (const auto& vp : in.volume->on(s)) {
      if (vp.cell != last_cell) {
        last_cell = vp.cell;
        Jinv = mesh.jacobian(vp.cell).inverse();
        const auto& nodes = sp.uncut.dof.cell_nodes[vp.cell];
        for (int a = 0; a < nl; ++a) loc[a] = rs.node_local[nodes[a]];
      }
      Vector2d ref = mesh.map_to_reference(vp.cell, vp.x);
      Eigen::MatrixX2d g = elem.gradients(ref) * Jinv;
      for (int a = 0; a < nl; ++a)
        for (int c1 = 0; c1 < 2; ++c1)
          for (int b = 0; b < nl; ++b)
            for (int c2 = 0; c2 < 2; ++c2)
              tA[si].emplace_back(rs.dof(loc[a], c1), rs.dof(loc[b], c2),
                                  vp.w * detail::stiffness_entry(g, a, c1, b, c2, mat));
      Vector2d f = data.body_force(vp.x);
      Eigen::VectorXd phi = elem.values(ref);
      for (int a = 0; a < nl; ++a)
        for (int c = 0; c < 2; ++c)
          sys.F[si][rs.dof(loc[a], c)] += vp.w * f[c] * phi[a];
    }
  }

  // interface terms
  sys.G = VecX::Zero(m);
  const double gamma = sys.gamma;
  for (const auto& ip : *in.interface) {
    Vector2d ref = mesh.map_to_reference(ip.cell, ip.x);
    Eigen::VectorXd phi = elem.values(ref);
    const auto& nodes = sp.uncut.dof.cell_nodes[ip.cell];

    if (ip.tag == InterfaceTag::GammaT) {
      Vector2d t_plus = data.traction_plus(ip.x, ip.normal_plus);
      for (Side s : {Side::Plus, Side::Minus}) {
        const int si = static_cast<int>(s);
        const RestrictedSpace& rs = sp.restricted(s);
        Vector2d t = side_sign(s) * t_plus;
        for (int a = 0; a < nl; ++a) {
          int loc = rs.node_local[nodes[a]];
          for (int c = 0; c < 2; ++c)
            sys.F[si][rs.dof(loc, c)] += ip.w * t[c] * phi[a];
        }
      }
      continue;
    }

    // Gamma_0: coupling, jump data, and the augmented-Lagrangian terms
    auto psi = sp.multiplier.trace_values(mesh, ip.cell, ip.x);
    Vector2d dj = data.jump(ip.x);
    for (const auto& [ia, pv] : psi)
      for (int c = 0; c < 2; ++c)
        sys.G[sp.multiplier.mdof(ia, c)] += ip.w * pv * dj[c];

    Eigen::MatrixX2d sn;
    if (gamma > 0) {
      Eigen::MatrixX2d g = detail::physical_gradients(mesh, elem, ip.cell, ip.x);
      sn = detail::stress_normal_rows(g, mat, ip.normal_plus);
    }

    for (Side s : {Side::Plus, Side::Minus}) {
      const int si = static_cast<int>(s);
      const RestrictedSpace& rs = sp.restricted(s);
      for (int b = 0; b < nl; ++b) {
        int locb = rs.node_local[nodes[b]];
        for (int c2 = 0; c2 < 2; ++c2) {
          int col = rs.dof(locb, c2);
          for (const auto& [ia, pv] : psi) {
            // b^s_ij = int psi_i . phi_j - gamma int psi_i . sigma(phi_j) n^s
            tB[si].emplace_back(sp.multiplier.mdof(ia, c2), col, ip.w * pv * phi[b]);
            if (gamma > 0) {
              Vector2d sv = side_sign(s) * sn.row(b + c2 * nl).transpose();
              for (int c = 0; c < 2; ++c)
                tB[si].emplace_back(sp.multiplier.mdof(ia, c), col,
                                    -gamma * ip.w * pv * sv[c]);
            }
          }
          if (gamma > 0) {
            // a^s loses gamma int (sigma(phi_i) n^s).(sigma(phi_j) n^s)
            for (int a = 0; a < nl; ++a) {
              int loca = rs.node_local[nodes[a]];
              for (int c1 = 0; c1 < 2; ++c1)
                tA[si].emplace_back(rs.dof(loca, c1), col,
                                    -gamma * ip.w *
                                        sn.row(a + c1 * nl).dot(sn.row(b + c2 * nl)));
            }
          }
        }
      }
    }

    if (gamma > 0) {
      for (const auto& [ia, pa] : psi)
        for (const auto& [ib, pb] : psi)
          for (int c = 0; c < 2; ++c)
            tC.emplace_back(sp.multiplier.mdof(ia, c), sp.multiplier.mdof(ib, c),
                            2.0 * gamma * ip.w * pa * pb);
    }
  }

  for (int si = 0; si < 2; ++si) {
    const RestrictedSpace& rs = sp.restricted(si == 0 ? Side::Plus : Side::Minus);
    sys.A[si].resize(rs.n_dofs(), rs.n_dofs());
    sys.A[si].setFromTriplets(tA[si].begin(), tA[si].end());
    sys.B[si].resize(m, rs.n_dofs());
    sys.B[si].setFromTriplets(tB[si].begin(), tB[si].end());
  }
  sys.C.resize(m, m);
  sys.C.setFromTriplets(tC.begin(), tC.end());
  (void)ma;

  // Dirichlet reduction with solution lift
  for (int si = 0; si < 2; ++si) {
    Side s = si == 0 ? Side::Plus : Side::Minus;
    const RestrictedSpace& rs = sp.restricted(s);
    sys.free_index[si].assign(rs.n_dofs(), -1);
    sys.dirichlet_values[si] = VecX::Zero(rs.n_dofs());
    int nf = 0;
    for (int l = 0; l < rs.n_kept(); ++l) {
      if (rs.local_dirichlet[l]) {
        Vector2d uD = data.dirichlet(sp.uncut.dof.node_coords[rs.kept_nodes[l]], s);
        for (int c = 0; c < 2; ++c) sys.dirichlet_values[si][rs.dof(l, c)] = uD[c];
      }
    }
    for (int d = 0; d < rs.n_dofs(); ++d) {
      int l = d % rs.n_kept();
      if (!rs.local_dirichlet[l]) sys.free_index[si][d] = nf++;
    }
    sys.n_free[si] = nf;

    VecX lift = sys.A[si] * sys.dirichlet_values[si];
    std::vector<Eigen::Triplet<double>> ta, tb;
    for (int k = 0; k < sys.A[si].outerSize(); ++k)
      for (SpMat::InnerIterator it(sys.A[si], k); it; ++it) {
        int r = sys.free_index[si][it.row()], c = sys.free_index[si][it.col()];
        if (r >= 0 && c >= 0) ta.emplace_back(r, c, it.value());
      }
    for (int k = 0; k < sys.B[si].outerSize(); ++k)
      for (SpMat::InnerIterator it(sys.B[si], k); it; ++it) {
        int c = sys.free_index[si][it.col()];
        if (c >= 0) tb.emplace_back(it.row(), c, it.value());
      }
    sys.A_ff[si].resize(nf, nf);
    sys.A_ff[si].setFromTriplets(ta.begin(), ta.end());
    sys.B_f[si].resize(m, nf);
    sys.B_f[si].setFromTriplets(tb.begin(), tb.end());
    sys.F_red[si].resize(nf);
    for (int d = 0; d < rs.n_dofs(); ++d) {
      int r = sys.free_index[si][d];
      if (r >= 0) sys.F_red[si][r] = sys.F[si][d] - lift[d];
    }
  }
  sys.G_red = sys.G - sys.B[0] * sys.dirichlet_values[0] + sys.B[1] * sys.dirichlet_values[1];
  return sys;
}

/// The Gamma_0 metric matrices used by the multiplier error of the mixed
/// formulation, on the full kept-DOF index sets.
struct ErrorMatrices {
  std::array<SpMat, 2> Auu;  // kept x kept, int (sigma(phi_i)n^s).(sigma(phi_j)n^s)
  std::array<SpMat, 2> Aul;  // kept x mult, int (sigma(phi_i)n^s).psi_j
  SpMat All;                 // Gamma_0 mass matrix
};

inline ErrorMatrices assemble_error_matrices(const AssemblyInput& in, const Material& mat) {
  const CutMesh& cm = *in.cm;
  const BackgroundMesh& mesh = *cm.mesh;
  const FdSpaces& sp = *in.spaces;
  const ElementType& elem = sp.uncut.elem;
  const int nl = elem.n_local();
  const int m = sp.multiplier.n_dofs();

  std::array<std::vector<Eigen::Triplet<double>>, 2> tuu, tul;
  std::vector<Eigen::Triplet<double>> tll;
  for (const auto& ip : *in.interface) {
    if (ip.tag != InterfaceTag::Gamma0) continue;
    Eigen::MatrixX2d g = detail::physical_gradients(mesh, elem, ip.cell, ip.x);
    Eigen::MatrixX2d sn = detail::stress_normal_rows(g, mat, ip.normal_plus);
    auto psi = sp.multiplier.trace_values(mesh, ip.cell, ip.x);
    const auto& nodes = sp.uncut.dof.cell_nodes[ip.cell];

    for (const auto& [ia, pa] : psi)
      for (const auto& [ib, pb] : psi)
        for (int c = 0; c < 2; ++c)
          tll.emplace_back(sp.multiplier.mdof(ia, c), sp.multiplier.mdof(ib, c),
                           ip.w * pa * pb);

    for (Side s : {Side::Plus, Side::Minus}) {
      const int si = static_cast<int>(s);
      const RestrictedSpace& rs = sp.restricted(s);
      double sg = side_sign(s);
      for (int a = 0; a < nl; ++a) {
        int loca = rs.node_local[nodes[a]];
        for (int c1 = 0; c1 < 2; ++c1) {
          int row = rs.dof(loca, c1);
          Vector2d sa = sg * sn.row(a + c1 * nl).transpose();
          for (int b = 0; b < nl; ++b) {
            int locb = rs.node_local[nodes[b]];
            for (int c2 = 0; c2 < 2; ++c2) {
              Vector2d sb = sg * sn.row(b + c2 * nl).transpose();
              tuu[si].emplace_back(row, rs.dof(locb, c2), ip.w * sa.dot(sb));
            }
          }
          for (const auto& [ib, pb] : psi)
            for (int c = 0; c < 2; ++c)
              tul[si].emplace_back(row, sp.multiplier.mdof(ib, c), ip.w * sa[c] * pb);
        }
      }
    }
  }

  ErrorMatrices em;
  for (int si = 0; si < 2; ++si) {
    const RestrictedSpace& rs = sp.restricted(si == 0 ? Side::Plus : Side::Minus);
    em.Auu[si].resize(rs.n_dofs(), rs.n_dofs());
    em.Auu[si].setFromTriplets(tuu[si].begin(), tuu[si].end());
    em.Aul[si].resize(rs.n_dofs(), m);
    em.Aul[si].setFromTriplets(tul[si].begin(), tul[si].end());
  }
  em.All.resize(m, m);
  em.All.setFromTriplets(tll.begin(), tll.end());
  return em;
}

/// Coordinate triplet dump (row col value per line) for cross-checking.
inline void write_triplets(std::ostream& os, const SpMat& A) {
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      os << it.row() << " " << it.col() << " " << it.value() << "\n";
}

}  // namespace fdcrack
