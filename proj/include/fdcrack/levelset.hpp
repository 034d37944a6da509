#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fdcrack/mesh.hpp"
#include "fdcrack/quadrature.hpp"

namespace fdcrack {

enum class Side : int { Plus = 0, Minus = 1 };

inline Side opposite(Side s) { return s == Side::Plus ? Side::Minus : Side::Plus; }
inline double side_sign(Side s) { return s == Side::Plus ? 1.0 : -1.0; }

enum class CellClass { Plus, Minus, Cut };
enum class InterfaceTag { GammaT, Gamma0 };

/// Level-set description of the crack boundary: ls1 = 0 locates the whole
/// interface Gamma; the portion with ls2 < 0 and ls3 < 0 is the physical
/// crack Gamma_T, the rest is the artificial extension Gamma_0.
struct CrackDescription {
  std::function<double(double, double)> ls1, ls2, ls3;

  /// Straight crack y = 2(x - x0), physical part xA < x < xB.
  static CrackDescription inclined_line(double x0, double xA, double xB) {
    CrackDescription c;
    c.ls1 = [x0](double x, double y) { return y - 2.0 * (x - x0); };
    c.ls2 = [xA](double x, double) { return xA - x; };
    c.ls3 = [xB](double x, double) { return x - xB; };
    return c;
  }
};

struct SubTriangle {
  std::array<Vector2d, 3> v;
  Side side;

  double area() const {
    return 0.5 * std::abs((v[1].x() - v[0].x()) * (v[2].y() - v[0].y()) -
                          (v[2].x() - v[0].x()) * (v[1].y() - v[0].y()));
  }
};

struct CutCellPartition {
  int cell = -1;
  std::vector<SubTriangle> subs;
  Vector2d seg_a, seg_b;  // interface segment endpoints on cell edges
  Vector2d normal_plus;   // unit normal pointing from Omega+ into Omega-
};

namespace detail {

/// Snapped vertex values of ls1: exact or near-zero vertex values are pushed
/// to a small positive value so the cut construction never divides by zero.
inline std::array<double, 3> snapped_values(const CrackDescription& crack,
                                            const std::array<Vector2d, 3>& v,
                                            double eps_snap) {
  std::array<double, 3> f;
  double scale = 0.0;
  for (int i = 0; i < 3; ++i) {
    f[i] = crack.ls1(v[i].x(), v[i].y());
    scale = std::max(scale, std::abs(f[i]));
  }
  if (scale == 0.0) scale = 1.0;
  for (auto& fi : f)
    if (std::abs(fi) < eps_snap * scale) fi = eps_snap * scale;
  return f;
}

}  // namespace detail

inline CellClass classify_cell(const CrackDescription& crack, const BackgroundMesh& mesh,
                               int cell, double eps_snap = 1e-12) {
  auto f = detail::snapped_values(crack, mesh.cell_vertices(cell), eps_snap);
  if (f[0] > 0 && f[1] > 0 && f[2] > 0) return CellClass::Plus;
  if (f[0] < 0 && f[1] < 0 && f[2] < 0) return CellClass::Minus;
  return CellClass::Cut;
}

/// Background mesh annotated with the per-cell crack classification and the
/// straight-cut tessellation of the cells crossed by Gamma. Geometry only;
/// quadrature rules are generated from it on demand.
struct CutMesh {
  const BackgroundMesh* mesh = nullptr;
  CrackDescription crack;
  double eps_snap = 1e-12;
  double eps_area = 1e-10;
  std::vector<CellClass> classes;
  std::vector<int> cut_index;  // cell -> index in cuts, -1 if uncut
  std::vector<CutCellPartition> cuts;

  int n_cells() const { return mesh->n_cells(); }

  bool cell_on_side(int c, Side s) const {
    CellClass cl = classes[c];
    return cl == CellClass::Cut ||
           (s == Side::Plus ? cl == CellClass::Plus : cl == CellClass::Minus);
  }
};

inline CutCellPartition cut_cell(const CrackDescription& crack, const BackgroundMesh& mesh,
                                 int cell, double eps_snap = 1e-12,
                                 double eps_area = 1e-10, CellClass* reclass = nullptr) {
  auto v = mesh.cell_vertices(cell);
  auto f = detail::snapped_values(crack, v, eps_snap);
  if (reclass) *reclass = CellClass::Cut;

  // gradient of the cellwise linear interpolant of ls1
  Eigen::Matrix2d J;
  J.col(0) = v[1] - v[0];
  J.col(1) = v[2] - v[0];
  Eigen::Vector2d grad = J.inverse().transpose() * Eigen::Vector2d(f[1] - f[0], f[2] - f[0]);

  // the lone vertex carries the minority sign
  int lone = -1;
  if ((f[0] > 0) == (f[1] > 0))
    lone = 2;
  else if ((f[0] > 0) == (f[2] > 0))
    lone = 1;
  else
    lone = 0;
  if ((f[0] > 0) == (f[1] > 0) && (f[0] > 0) == (f[2] > 0))
    throw std::invalid_argument("cut_cell: cell is not cut");

  int b = (lone + 1) % 3, c = (lone + 2) % 3;
  double tb = f[lone] / (f[lone] - f[b]);
  double tc = f[lone] / (f[lone] - f[c]);
  Vector2d pb = v[lone] + tb * (v[b] - v[lone]);
  Vector2d pc = v[lone] + tc * (v[c] - v[lone]);

  Side lone_side = f[lone] > 0 ? Side::Plus : Side::Minus;
  CutCellPartition part;
  part.cell = cell;
  part.seg_a = pb;
  part.seg_b = pc;
  part.normal_plus = (-grad).normalized();
  part.subs.push_back({{v[lone], pb, pc}, lone_side});
  part.subs.push_back({{pb, v[b], v[c]}, opposite(lone_side)});
  part.subs.push_back({{pb, v[c], pc}, opposite(lone_side)});

  double cell_area = mesh.cell_area(cell);
  double lone_area = part.subs[0].area();
  double other_area = part.subs[1].area() + part.subs[2].area();
  if (std::min(lone_area, other_area) < eps_area * cell_area) {
    if (reclass)
      *reclass = lone_area > other_area
                     ? (lone_side == Side::Plus ? CellClass::Plus : CellClass::Minus)
                     : (lone_side == Side::Plus ? CellClass::Minus : CellClass::Plus);
    return {};
  }
  return part;
}

inline CutMesh build_cut_mesh(const BackgroundMesh& mesh, const CrackDescription& crack,
                              double eps_snap = 1e-12, double eps_area = 1e-10) {
  CutMesh cm;
  cm.mesh = &mesh;
  cm.crack = crack;
  cm.eps_snap = eps_snap;
  cm.eps_area = eps_area;
  cm.classes.resize(mesh.n_cells());
  cm.cut_index.assign(mesh.n_cells(), -1);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    CellClass cl = classify_cell(crack, mesh, c, eps_snap);
    if (cl == CellClass::Cut) {
      CellClass reclass;
      CutCellPartition part = cut_cell(crack, mesh, c, eps_snap, eps_area, &reclass);
      if (reclass == CellClass::Cut) {
        cm.cut_index[c] = static_cast<int>(cm.cuts.size());
        cm.cuts.push_back(std::move(part));
      } else {
        cl = reclass;  // degenerate sliver snapped away
      }
    }
    cm.classes[c] = cl;
  }
  return cm;
}

struct InterfacePoint {
  int cell;
  Vector2d x;
  double w;
  Vector2d normal_plus;
  InterfaceTag tag;
};

namespace detail {

/// Sign-change roots of f along [0,1], located by a fine scan plus bisection.
inline void append_roots(const std::function<double(double)>& f, std::vector<double>& out) {
  constexpr int kScan = 64;
  double f_prev = f(0.0);
  for (int i = 1; i <= kScan; ++i) {
    double t1 = static_cast<double>(i) / kScan;
    double f1 = f(t1);
    if ((f_prev < 0) != (f1 < 0)) {
      double lo = static_cast<double>(i - 1) / kScan, hi = t1;
      double flo = f_prev;
      for (int it = 0; it < 100 && hi - lo > 1e-16; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if ((flo < 0) == (fm < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      out.push_back(0.5 * (lo + hi));
    }
    f_prev = f1;
  }
}

}  // namespace detail

/// Gauss points on every interface segment; exact for polynomials of the
/// given degree along the segment. Segments are split where ls2 or ls3
/// changes sign so each subsegment is tagged Gamma_T or Gamma_0 as a whole
/// and the two partial lengths are integrated exactly.
inline std::vector<InterfacePoint> interface_quadrature(const CutMesh& cm, int degree) {
  if (degree < 1) throw std::invalid_argument("interface_quadrature: degree must be >= 1");
  GaussLegendre g(degree / 2 + 1);
  std::vector<InterfacePoint> pts;
  for (const auto& cut : cm.cuts) {
    Vector2d d = cut.seg_b - cut.seg_a;
    auto at = [&](double t) { return (cut.seg_a + t * d).eval(); };
    std::vector<double> knots{0.0, 1.0};
    for (auto ls : {&cm.crack.ls2, &cm.crack.ls3})
      detail::append_roots(
          [&](double t) {
            Vector2d x = at(t);
            return (*ls)(x.x(), x.y());
          },
          knots);
    std::sort(knots.begin(), knots.end());
    for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
      double t0 = knots[s], t1 = knots[s + 1];
      if (t1 - t0 <= 1e-14) continue;
      Vector2d mid = at(0.5 * (t0 + t1));
      bool on_crack =
          cm.crack.ls2(mid.x(), mid.y()) < 0 && cm.crack.ls3(mid.x(), mid.y()) < 0;
      double len = (t1 - t0) * d.norm();
      for (std::size_t q = 0; q < g.points.size(); ++q) {
        pts.push_back({cut.cell, at(t0 + g.points[q] * (t1 - t0)), g.weights[q] * len,
                       cut.normal_plus,
                       on_crack ? InterfaceTag::GammaT : InterfaceTag::Gamma0});
      }
    }
  }
  return pts;
}

struct VolumePoint {
  int cell;
  Vector2d x;
  double w;
};

struct SideQuadrature {
  std::array<std::vector<VolumePoint>, 2> pts;  // indexed by Side

  const std::vector<VolumePoint>& on(Side s) const { return pts[static_cast<int>(s)]; }
  std::vector<VolumePoint>& on(Side s) { return pts[static_cast<int>(s)]; }
};

namespace detail {

inline void append_mapped_rule(std::vector<VolumePoint>& out, int cell,
                               const std::array<Vector2d, 3>& v,
                               const std::vector<QuadPoint2>& rule) {
  double det = (v[1].x() - v[0].x()) * (v[2].y() - v[0].y()) -
               (v[2].x() - v[0].x()) * (v[1].y() - v[0].y());
  double jac = std::abs(det);
  for (const auto& qp : rule) {
    Vector2d x = v[0] + qp.x.x() * (v[1] - v[0]) + qp.x.y() * (v[2] - v[0]);
    out.push_back({cell, x, qp.w * jac});
  }
}

}  // namespace detail

/// Per-side volume quadrature: uncut cells carry the standard rule, cut cells
/// aggregate the rules of their sub-triangles.
inline SideQuadrature subdomain_quadrature(const CutMesh& cm, int degree) {
  auto rule = triangle_rule(degree);
  SideQuadrature sq;
  const BackgroundMesh& mesh = *cm.mesh;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    switch (cm.classes[c]) {
      case CellClass::Plus:
        detail::append_mapped_rule(sq.on(Side::Plus), c, mesh.cell_vertices(c), rule);
        break;
      case CellClass::Minus:
        detail::append_mapped_rule(sq.on(Side::Minus), c, mesh.cell_vertices(c), rule);
        break;
      case CellClass::Cut:
        for (const auto& sub : cm.cuts[cm.cut_index[c]].subs)
          detail::append_mapped_rule(sq.on(sub.side), c, sub.v, rule);
        break;
    }
  }
  return sq;
}

}  // namespace fdcrack
