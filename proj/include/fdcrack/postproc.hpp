#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fdcrack/assembly.hpp"
#include "fdcrack/manufactured.hpp"
#include "fdcrack/solver.hpp"

namespace fdcrack {

/// Value of a restricted FE field at a point of `cell` (all local nodes of a
/// cell on the field's side are kept by construction).
inline Vector2d eval_field(const BackgroundMesh& mesh, const UncutSpace& us,
                           const RestrictedSpace& rs, const VecX& U, int cell,
                           const Vector2d& x) {
  Eigen::VectorXd phi = us.elem.values(mesh.map_to_reference(cell, x));
  const auto& nodes = us.dof.cell_nodes[cell];
  Vector2d v = Vector2d::Zero();
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    int loc = rs.node_local[nodes[a]];
    for (int c = 0; c < 2; ++c) v[c] += U[rs.dof(loc, c)] * phi[static_cast<int>(a)];
  }
  return v;
}

/// Gradient of a restricted FE field (row i = grad of component i).
inline Eigen::Matrix2d eval_gradient(const BackgroundMesh& mesh, const UncutSpace& us,
                                     const RestrictedSpace& rs, const VecX& U, int cell,
                                     const Vector2d& x) {
  Eigen::MatrixX2d g = detail::physical_gradients(mesh, us.elem, cell, x);
  const auto& nodes = us.dof.cell_nodes[cell];
  Eigen::Matrix2d out = Eigen::Matrix2d::Zero();
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    int loc = rs.node_local[nodes[a]];
    for (int c = 0; c < 2; ++c)
      out.row(c) += U[rs.dof(loc, c)] * g.row(static_cast<int>(a));
  }
  return out;
}

/// Nodal interpolant of one exact branch on a side's kept DOFs. The branch
/// formula is evaluated at every kept node, including those extended across
/// the interface (the exact branches are globally smooth).
inline VecX interpolate_branch(const ManufacturedCase& mc, const UncutSpace& us,
                               const RestrictedSpace& rs) {
  VecX U(rs.n_dofs());
  for (int l = 0; l < rs.n_kept(); ++l) {
    Vector2d u = mc.exact_displacement(us.dof.node_coords[rs.kept_nodes[l]], rs.side);
    for (int c = 0; c < 2; ++c) U[rs.dof(l, c)] = u[c];
  }
  return U;
}

/// Nodal interpolant of the exact multiplier on the active trace DOFs.
inline VecX interpolate_multiplier(const ManufacturedCase& mc, const MultiplierSpace& ms) {
  VecX L(ms.n_dofs());
  for (int a = 0; a < ms.n_active(); ++a) {
    Vector2d lam = mc.exact_multiplier(ms.dof.node_coords[ms.active[a]]);
    for (int c = 0; c < 2; ++c) L[ms.mdof(a, c)] = lam[c];
  }
  return L;
}

struct DisplacementErrors {
  double rel_l2_pct;
  double rel_h1_pct;
};

/// Relative L2 and full-H1 errors (in percent) of the two-sided solution
/// against the matching exact branches, integrated on the side quadratures.
inline DisplacementErrors displacement_errors(const Solution& sol, const ManufacturedCase& mc,
                                              const CutMesh& cm, const FdSpaces& sp,
                                              int quad_degree = -1) {
  const BackgroundMesh& mesh = *cm.mesh;
  if (quad_degree < 0) quad_degree = 2 * sp.uncut.elem.degree + 4;
  SideQuadrature quad = subdomain_quadrature(cm, quad_degree);

  double err_l2 = 0, err_h1 = 0, ref_l2 = 0, ref_h1 = 0;
  for (Side s : {Side::Plus, Side::Minus}) {
    const RestrictedSpace& rs = sp.restricted(s);
    const VecX& U = sol.on(s);
    for (const auto& vp : quad.on(s)) {
      Vector2d ue = mc.exact_displacement(vp.x, s);
      Eigen::Matrix2d ge = ManufacturedCase::displacement_gradient(vp.x);
      Vector2d uh = eval_field(mesh, sp.uncut, rs, U, vp.cell, vp.x);
      Eigen::Matrix2d gh = eval_gradient(mesh, sp.uncut, rs, U, vp.cell, vp.x);
      err_l2 += vp.w * (uh - ue).squaredNorm();
      err_h1 += vp.w * ((uh - ue).squaredNorm() + (gh - ge).squaredNorm());
      ref_l2 += vp.w * ue.squaredNorm();
      ref_h1 += vp.w * (ue.squaredNorm() + ge.squaredNorm());
    }
  }
  if (ref_l2 <= 0 || ref_h1 <= 0)
    throw std::invalid_argument("displacement_errors: exact solution has zero norm");
  return {100.0 * std::sqrt(err_l2 / ref_l2), 100.0 * std::sqrt(err_h1 / ref_h1)};
}

/// Relative multiplier error (in percent) in the Gamma_0 surface-force
/// metric, evaluated through the assembled metric matrices.
inline double multiplier_error(const VecX& lambda, const VecX& u_ex_plus,
                               const VecX& u_ex_minus, const ErrorMatrices& em) {
  double auu_p = u_ex_plus.dot(em.Auu[0] * u_ex_plus);
  double auu_m = u_ex_minus.dot(em.Auu[1] * u_ex_minus);
  double numerator = auu_p + auu_m + 2.0 * u_ex_plus.dot(em.Aul[0] * lambda) -
                     2.0 * u_ex_minus.dot(em.Aul[1] * lambda) +
                     2.0 * lambda.dot(em.All * lambda);
  double denominator = auu_p + auu_m;
  if (denominator <= 0)
    throw std::invalid_argument("multiplier_error: zero exact surface-force norm");
  if (numerator < -1e-12 * denominator)
    throw std::runtime_error("multiplier_error: metric produced a negative square");
  if (numerator < 0) numerator = 0;
  return 100.0 * std::sqrt(numerator / denominator);
}

/// ||sigma(U+_ex)n+ + sigma(U-_ex)n-||^2 on Gamma_0 relative to the sum of
/// the two one-sided squared norms, for the interpolated exact branches,
/// integrated on the interface quadrature.
inline double jump_compatibility(const ManufacturedCase& mc, const CutMesh& cm,
                                 const FdSpaces& sp,
                                 const std::vector<InterfacePoint>& interface,
                                 const VecX& u_ex_plus, const VecX& u_ex_minus) {
  const BackgroundMesh& mesh = *cm.mesh;
  double num = 0, den = 0;
  for (const auto& ip : interface) {
    if (ip.tag != InterfaceTag::Gamma0) continue;
    Eigen::Matrix2d gp =
        eval_gradient(mesh, sp.uncut, sp.plus, u_ex_plus, ip.cell, ip.x);
    Eigen::Matrix2d gm =
        eval_gradient(mesh, sp.uncut, sp.minus, u_ex_minus, ip.cell, ip.x);
    Vector2d tp = mc.material.stress(gp) * ip.normal_plus;
    Vector2d tm = mc.material.stress(gm) * (-ip.normal_plus);
    num += ip.w * (tp + tm).squaredNorm();
    den += ip.w * (tp.squaredNorm() + tm.squaredNorm());
  }
  return den > 0 ? num / den : 0.0;
}

/// Least-squares slope of log(err) against log(h).
inline double fit_rate(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size() || h.size() < 2)
    throw std::invalid_argument("fit_rate: need at least two matching points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0) || !(err[i] > 0))
      throw std::invalid_argument("fit_rate: inputs must be positive");
    double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace fdcrack
