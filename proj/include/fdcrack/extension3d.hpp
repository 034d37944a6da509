#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <limits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fdcrack {

using Vector3d = Eigen::Vector3d;

enum class Region3 { Plus, Minus, Boundary };

/// Crack surface as a triangle soup with shared vertices.
struct TriSurface {
  std::vector<Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
};

namespace detail3d {

inline double triangle_area(const Vector3d& a, const Vector3d& b, const Vector3d& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

inline double degeneracy_scale(const Vector3d& a, const Vector3d& b, const Vector3d& c) {
  double e = std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
  return e;  // squared longest edge, the natural scale of twice-the-area
}

/// Closest point on triangle abc to p (Ericson's region walk).
inline Vector3d closest_point_on_triangle(const Vector3d& p, const Vector3d& a,
                                          const Vector3d& b, const Vector3d& c) {
  Vector3d ab = b - a, ac = c - a, ap = p - a;
  double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  Vector3d bp = p - b;
  double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;
  Vector3d cp = p - c;
  double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;
  double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

}  // namespace detail3d

/// Throws if indices are out of range, a triangle is (numerically) degenerate,
/// or an edge is shared by more than two triangles.
inline void validate_surface(const TriSurface& s) {
  std::map<std::pair<int, int>, int> edge_count;
  for (int t = 0; t < s.n_triangles(); ++t) {
    const auto& tri = s.triangles[t];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= s.n_vertices())
        throw std::invalid_argument("validate_surface: triangle " + std::to_string(t) +
                                    " has a vertex index out of range");
      if (tri[k] == tri[(k + 1) % 3])
        throw std::invalid_argument("validate_surface: triangle " + std::to_string(t) +
                                    " repeats a vertex");
    }
    const Vector3d &a = s.vertices[tri[0]], &b = s.vertices[tri[1]], &c = s.vertices[tri[2]];
    if (detail3d::triangle_area(a, b, c) <=
        1e-14 * detail3d::degeneracy_scale(a, b, c))
      throw std::invalid_argument("validate_surface: triangle " + std::to_string(t) +
                                  " is degenerate");
    for (int k = 0; k < 3; ++k) {
      int u = tri[k], v = tri[(k + 1) % 3];
      auto key = std::minmax(u, v);
      if (++edge_count[key] > 2)
        throw std::invalid_argument(
            "validate_surface: an edge is shared by more than two triangles");
    }
  }
}

/// Apex over the centroid: S = G + side_sign * scale * sqrt(area) * unit normal
/// of the (a,b,c) winding.
inline Vector3d triangle_apex(const Vector3d& a, const Vector3d& b, const Vector3d& c,
                              int side_sign, double scale = 1.0) {
  if (side_sign != 1 && side_sign != -1)
    throw std::invalid_argument("triangle_apex: side_sign must be +1 or -1");
  Vector3d cr = (b - a).cross(c - a);
  double two_area = cr.norm();
  if (two_area <= 1e-14 * detail3d::degeneracy_scale(a, b, c))
    throw std::invalid_argument("triangle_apex: degenerate triangle");
  Vector3d g = (a + b + c) / 3.0;
  return g + (side_sign * scale * std::sqrt(0.5 * two_area) / two_area) * cr;
}

/// The apex-cone extension: one apex per crack triangle, orientation signs
/// propagated from the seed, and the three cone side facets per triangle.
/// Extension facet indices address the combined vertex list: original surface
/// vertices first, then one apex per triangle in triangle order.
struct ExtendedCrack {
  TriSurface surface;
  std::vector<Vector3d> apexes;          // one per triangle
  std::vector<int> signs;                // +1/-1 per triangle
  std::vector<std::array<int, 3>> extension_facets;
  double scale = 1.0;

  int apex_index(int tri) const { return surface.n_vertices() + tri; }

  Vector3d combined_vertex(int i) const {
    return i < surface.n_vertices() ? surface.vertices[i]
                                    : apexes[i - surface.n_vertices()];
  }
};

inline ExtendedCrack build_extension(const TriSurface& surface, int seed_sign,
                                     double scale = 1.0) {
  if (seed_sign != 1 && seed_sign != -1)
    throw std::invalid_argument("build_extension: seed_sign must be +1 or -1");
  if (!(scale > 0)) throw std::invalid_argument("build_extension: scale must be positive");
  if (surface.n_triangles() == 0)
    throw std::invalid_argument("build_extension: empty surface");
  validate_surface(surface);

  // directed edge bookkeeping: for each undirected edge, the triangles using
  // it and whether they traverse it as (min, max)
  struct EdgeUse {
    int tri;
    bool forward;
  };
  std::map<std::pair<int, int>, std::vector<EdgeUse>> edges;
  for (int t = 0; t < surface.n_triangles(); ++t) {
    const auto& tri = surface.triangles[t];
    for (int k = 0; k < 3; ++k) {
      int u = tri[k], v = tri[(k + 1) % 3];
      edges[std::minmax(u, v)].push_back({t, u < v});
    }
  }

  // breadth-first sign propagation from triangle 0: two neighbors are
  // consistently wound when they traverse the shared edge in opposite
  // directions, in which case they carry the same sign
  std::vector<int> sign(surface.n_triangles(), 0);
  sign[0] = seed_sign;
  std::deque<int> queue{0};
  while (!queue.empty()) {
    int t = queue.front();
    queue.pop_front();
    const auto& tri = surface.triangles[t];
    for (int k = 0; k < 3; ++k) {
      auto key = std::minmax(tri[k], tri[(k + 1) % 3]);
      bool fwd_t = tri[k] < tri[(k + 1) % 3];
      for (const EdgeUse& use : edges[key]) {
        if (use.tri == t) continue;
        int expect = use.forward == fwd_t ? -sign[t] : sign[t];
        if (sign[use.tri] == 0) {
          sign[use.tri] = expect;
          queue.push_back(use.tri);
        } else if (sign[use.tri] != expect) {
          throw std::invalid_argument("build_extension: surface is not orientable");
        }
      }
    }
  }
  for (int t = 0; t < surface.n_triangles(); ++t)
    if (sign[t] == 0)
      throw std::invalid_argument("build_extension: surface is not edge-connected");

  ExtendedCrack ext;
  ext.surface = surface;
  ext.signs = sign;
  ext.scale = scale;
  ext.apexes.reserve(surface.n_triangles());
  for (int t = 0; t < surface.n_triangles(); ++t) {
    const auto& tri = surface.triangles[t];
    ext.apexes.push_back(triangle_apex(surface.vertices[tri[0]], surface.vertices[tri[1]],
                                       surface.vertices[tri[2]], sign[t], scale));
    int s = ext.apex_index(t);
    ext.extension_facets.push_back({tri[0], tri[1], s});
    ext.extension_facets.push_back({tri[1], tri[2], s});
    ext.extension_facets.push_back({tri[2], tri[0], s});
  }
  return ext;
}

/// Point membership in the tetrahedron (a, b, c, s), inclusive of its boundary
/// up to a small relative tolerance.
inline bool point_in_tetrahedron(const Vector3d& p, const Vector3d& a, const Vector3d& b,
                                 const Vector3d& c, const Vector3d& s,
                                 double tol = 1e-12) {
  Eigen::Matrix3d m;
  m.col(0) = b - a;
  m.col(1) = c - a;
  m.col(2) = s - a;
  Vector3d bary = m.fullPivLu().solve(p - a);
  return bary.minCoeff() >= -tol && bary.sum() <= 1.0 + tol;
}

inline double distance_to_surface(const TriSurface& s, const Vector3d& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& tri : s.triangles) {
    Vector3d q = detail3d::closest_point_on_triangle(p, s.vertices[tri[0]],
                                                     s.vertices[tri[1]], s.vertices[tri[2]]);
    best = std::min(best, (p - q).norm());
  }
  return best;
}

/// The split region is the union of the per-triangle apex tetrahedra: a point
/// inside any of them is Minus, points within eps of the crack surface are
/// Boundary, everything else is Plus.
inline Region3 classify_point(const ExtendedCrack& ext, const Vector3d& p,
                              double eps = 1e-10) {
  if (distance_to_surface(ext.surface, p) <= eps) return Region3::Boundary;
  for (int t = 0; t < ext.surface.n_triangles(); ++t) {
    const auto& tri = ext.surface.triangles[t];
    if (point_in_tetrahedron(p, ext.surface.vertices[tri[0]], ext.surface.vertices[tri[1]],
                             ext.surface.vertices[tri[2]], ext.apexes[t]))
      return Region3::Minus;
  }
  return Region3::Plus;
}

/// Total volume of the per-triangle apex tetrahedra (sum, overlaps counted
/// once per tetrahedron); equals sum of area^{3/2}/3 at scale 1.
inline double extension_volume(const ExtendedCrack& ext) {
  double v = 0;
  for (int t = 0; t < ext.surface.n_triangles(); ++t) {
    const auto& tri = ext.surface.triangles[t];
    const Vector3d& a = ext.surface.vertices[tri[0]];
    v += std::abs((ext.surface.vertices[tri[1]] - a)
                      .cross(ext.surface.vertices[tri[2]] - a)
                      .dot(ext.apexes[t] - a)) /
         6.0;
  }
  return v;
}

// ---------------------------------------------------------------------------
// ASCII surface files: `v x y z` vertex lines, `t i j k` 0-based triangle
// lines, `#` comments. Coordinates are printed with 17 significant digits so
// a parse/print cycle is bit-exact.

inline std::string format_coord(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline TriSurface read_surface(std::istream& in) {
  TriSurface s;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ls(line.substr(start));
    std::string tag;
    ls >> tag;
    auto fail = [lineno](const std::string& what) -> std::invalid_argument {
      return std::invalid_argument("surface file line " + std::to_string(lineno) + ": " + what);
    };
    if (tag == "v") {
      Vector3d p;
      if (!(ls >> p.x() >> p.y() >> p.z())) throw fail("expected `v x y z`");
      s.vertices.push_back(p);
    } else if (tag == "t") {
      std::array<int, 3> tri;
      if (!(ls >> tri[0] >> tri[1] >> tri[2])) throw fail("expected `t i j k`");
      s.triangles.push_back(tri);
    } else {
      throw fail("unknown record `" + tag + "`");
    }
  }
  return s;
}

inline TriSurface read_surface_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open surface file: " + path);
  return read_surface(f);
}

inline void write_surface(std::ostream& out, const TriSurface& s) {
  for (const Vector3d& p : s.vertices)
    out << "v " << format_coord(p.x()) << ' ' << format_coord(p.y()) << ' '
        << format_coord(p.z()) << '\n';
  for (const auto& t : s.triangles) out << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

/// Extended crack in the surface format: original vertices, apex vertices
/// (each flagged by an `# apex` comment), original triangles, cone facets.
inline void write_extension(std::ostream& out, const ExtendedCrack& ext) {
  write_surface(out, ext.surface);
  for (int t = 0; t < ext.surface.n_triangles(); ++t) {
    const Vector3d& s = ext.apexes[t];
    out << "# apex of triangle " << t << " (sign " << (ext.signs[t] > 0 ? "+1" : "-1")
        << ")\n";
    out << "v " << format_coord(s.x()) << ' ' << format_coord(s.y()) << ' '
        << format_coord(s.z()) << '\n';
  }
  for (const auto& f : ext.extension_facets)
    out << "t " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

inline void write_extension_file(const std::string& path, const ExtendedCrack& ext) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  write_extension(f, ext);
}

}  // namespace fdcrack
