#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "fdcrack/extension3d.hpp"

using namespace fdcrack;

TEST_CASE("apex of the reference triangle") {
  Vector3d a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
  Vector3d s = triangle_apex(a, b, c, +1);
  CHECK((s - Vector3d(1.0 / 3, 1.0 / 3, std::sqrt(0.5))).norm() < 1e-12);
  Vector3d sm = triangle_apex(a, b, c, -1);
  CHECK((sm - Vector3d(1.0 / 3, 1.0 / 3, -std::sqrt(0.5))).norm() < 1e-12);
  // doubling the triangle doubles the apex distance
  Vector3d s2 = triangle_apex(2 * a, 2 * b, 2 * c, +1);
  double d1 = (s - (a + b + c) / 3.0).norm();
  double d2 = (s2 - 2.0 * (a + b + c) / 3.0).norm();
  CHECK_THAT(d2, Catch::Matchers::WithinRel(2.0 * d1, 1e-12));
}

TEST_CASE("apex distance and projection on random triangles") {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 1000; ++trial) {
    Vector3d a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng)), c(u(rng), u(rng), u(rng));
    double area = detail3d::triangle_area(a, b, c);
    if (area < 1e-6) continue;
    Vector3d s = triangle_apex(a, b, c, +1);
    Vector3d g = (a + b + c) / 3.0;
    CHECK(std::abs((s - g).norm() - std::sqrt(area)) <= 1e-12 * std::sqrt(area));
    // the segment G-S is orthogonal to the triangle plane
    CHECK(std::abs((s - g).dot(b - a)) < 1e-9);
    CHECK(std::abs((s - g).dot(c - a)) < 1e-9);
  }
}

TEST_CASE("apex rejects degenerate input") {
  Vector3d a(0, 0, 0), b(1, 1, 1), c(2, 2, 2);
  CHECK_THROWS_AS(triangle_apex(a, b, c, +1), std::invalid_argument);
  CHECK_THROWS_AS(triangle_apex(a, b, Vector3d(0, 1, 0), 0), std::invalid_argument);
}

TEST_CASE("single triangle extension has one apex and three facets") {
  TriSurface s;
  s.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  s.triangles = {{0, 1, 2}};
  ExtendedCrack ext = build_extension(s, +1);
  CHECK(ext.apexes.size() == 1);
  CHECK(ext.extension_facets.size() == 3);
  CHECK(ext.signs[0] == 1);
  CHECK_THAT(extension_volume(ext),
             Catch::Matchers::WithinRel(std::pow(0.5, 1.5) / 3.0, 1e-12));
}

namespace {

// planar strip of n triangles along the x axis in the z = 0 plane
TriSurface make_strip(int n, bool scramble_winding, unsigned seed = 0) {
  TriSurface s;
  for (int i = 0; i <= n / 2; ++i) {
    s.vertices.push_back({static_cast<double>(i), 0.0, 0.0});
    s.vertices.push_back({static_cast<double>(i), 1.0, 0.0});
  }
  std::mt19937 rng(seed);
  for (int i = 0; i + 1 < static_cast<int>(s.vertices.size()) / 2; ++i) {
    int a = 2 * i, b = 2 * i + 1, c = 2 * i + 2, d = 2 * i + 3;
    std::array<int, 3> t1{a, c, b}, t2{b, c, d};
    if (scramble_winding && rng() % 2) std::swap(t1[1], t1[2]);
    if (scramble_winding && rng() % 2) std::swap(t2[1], t2[2]);
    s.triangles.push_back(t1);
    s.triangles.push_back(t2);
  }
  return s;
}

double signed_apex_volume(const TriSurface& s, int t, const Vector3d& apex) {
  const Vector3d& a = s.vertices[s.triangles[t][0]];
  const Vector3d& b = s.vertices[s.triangles[t][1]];
  const Vector3d& c = s.vertices[s.triangles[t][2]];
  // sign relative to a global reference orientation of the z = 0 plane:
  // positive when the apex lies above it
  return apex.z() - a.z() + 0 * (b - c).norm();
}

}  // namespace

TEST_CASE("orientation propagates across a 100-triangle strip") {
  TriSurface s = make_strip(100, true, 97);
  REQUIRE(s.n_triangles() == 100);
  ExtendedCrack ext = build_extension(s, +1);
  // all apexes must land on the same side of the planar strip regardless of
  // the scrambled input winding
  double first = ext.apexes[0].z();
  CHECK(std::abs(first) > 0);
  for (const Vector3d& apex : ext.apexes) {
    CHECK(apex.z() * first > 0);
    CHECK_THAT(std::abs(apex.z()), Catch::Matchers::WithinRel(std::sqrt(0.5), 1e-12));
  }
  CHECK_THAT(extension_volume(ext),
             Catch::Matchers::WithinRel(100.0 * std::pow(0.5, 1.5) / 3.0, 1e-12));
}

TEST_CASE("two consistently wound triangles agree on the apex side") {
  TriSurface s = make_strip(2, false);
  ExtendedCrack ext = build_extension(s, +1);
  double v0 = signed_apex_volume(s, 0, ext.apexes[0]);
  double v1 = signed_apex_volume(s, 1, ext.apexes[1]);
  CHECK(v0 * v1 > 0);
}

TEST_CASE("a Moebius strip is rejected as non-orientable") {
  TriSurface s;
  for (int i = 0; i < 5; ++i)
    s.vertices.push_back({std::cos(2 * M_PI * i / 5), std::sin(2 * M_PI * i / 5), 0.1 * i});
  for (int i = 0; i < 5; ++i)
    s.triangles.push_back({i, (i + 1) % 5, (i + 2) % 5});
  CHECK_THROWS_WITH(build_extension(s, +1),
                    Catch::Matchers::ContainsSubstring("not orientable"));
}

TEST_CASE("a disconnected surface is rejected") {
  TriSurface s;
  s.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 5, 5}, {6, 5, 5}, {5, 6, 5}};
  s.triangles = {{0, 1, 2}, {3, 4, 5}};
  CHECK_THROWS_WITH(build_extension(s, +1),
                    Catch::Matchers::ContainsSubstring("not edge-connected"));
}

TEST_CASE("surface validation catches broken input") {
  TriSurface bad_index;
  bad_index.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  bad_index.triangles = {{0, 1, 7}};
  CHECK_THROWS_AS(validate_surface(bad_index), std::invalid_argument);

  TriSurface degen;
  degen.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  degen.triangles = {{0, 1, 2}};
  CHECK_THROWS_AS(validate_surface(degen), std::invalid_argument);

  TriSurface overshared;
  overshared.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}};
  overshared.triangles = {{0, 1, 2}, {0, 1, 3}, {0, 1, 4}};
  CHECK_THROWS_AS(validate_surface(overshared), std::invalid_argument);
}

TEST_CASE("point classification splits space around the surface") {
  TriSurface s;
  s.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  s.triangles = {{0, 1, 2}};
  ExtendedCrack ext = build_extension(s, +1);
  Vector3d g(1.0 / 3, 1.0 / 3, 0);
  Vector3d up = ext.apexes[0] - g;

  CHECK(classify_point(ext, g + 0.1 * up) == Region3::Minus);
  CHECK(classify_point(ext, g - 0.1 * up) == Region3::Plus);
  CHECK(classify_point(ext, g) == Region3::Boundary);
  CHECK(classify_point(ext, ext.apexes[0]) == Region3::Minus);
  // far away is always Plus
  double far = 10.0 * std::sqrt(std::sqrt(0.5));
  CHECK(classify_point(ext, g + Vector3d(far, far, far)) == Region3::Plus);

  // flipping the seed sign swaps the classifications of off-surface points
  ExtendedCrack flipped = build_extension(s, -1);
  CHECK(classify_point(flipped, g + 0.1 * up) == Region3::Plus);
  CHECK(classify_point(flipped, g - 0.1 * up) == Region3::Minus);
}

TEST_CASE("seed sign flip swaps classification on a strip") {
  TriSurface s = make_strip(10, true, 7);
  ExtendedCrack plus = build_extension(s, +1);
  ExtendedCrack minus = build_extension(s, -1);
  std::mt19937 rng(51);
  std::uniform_real_distribution<double> u(-1, 2);
  for (int trial = 0; trial < 400; ++trial) {
    Vector3d p(5 * u(rng), u(rng), u(rng));
    // the strip lies in z = 0, so flipping the seed is a mirror in that plane
    CHECK(classify_point(plus, p) ==
          classify_point(minus, Vector3d(p.x(), p.y(), -p.z())));
  }
  // points inside one cone family are released by the flipped one
  for (int t = 0; t < s.n_triangles(); ++t) {
    const auto& tri = s.triangles[t];
    Vector3d g = (s.vertices[tri[0]] + s.vertices[tri[1]] + s.vertices[tri[2]]) / 3.0;
    Vector3d p = g + 0.3 * (plus.apexes[t] - g);
    CHECK(classify_point(plus, p) == Region3::Minus);
    CHECK(classify_point(minus, p) == Region3::Plus);
  }
}

TEST_CASE("surface files round trip bit-exactly") {
  TriSurface s;
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 7; ++i)
    s.vertices.push_back({std::sqrt(2.0) * u(rng), M_PI * u(rng), u(rng) / 3.0});
  s.triangles = {{0, 1, 2}, {3, 4, 5}, {2, 3, 6}};

  std::stringstream buf;
  write_surface(buf, s);
  TriSurface back = read_surface(buf);
  REQUIRE(back.n_vertices() == s.n_vertices());
  REQUIRE(back.n_triangles() == s.n_triangles());
  for (int i = 0; i < s.n_vertices(); ++i)
    CHECK(back.vertices[i] == s.vertices[i]);  // bit exact
  for (int t = 0; t < s.n_triangles(); ++t) CHECK(back.triangles[t] == s.triangles[t]);
}

TEST_CASE("surface parser reports the offending line") {
  std::stringstream buf("v 0 0 0\nv 1 0 0\nq 1 2 3\n");
  CHECK_THROWS_WITH(read_surface(buf), Catch::Matchers::ContainsSubstring("line 3"));
  std::stringstream buf2("v 0 0\n");
  CHECK_THROWS_WITH(read_surface(buf2), Catch::Matchers::ContainsSubstring("line 1"));
}

TEST_CASE("extension files contain the apexes and cone facets") {
  TriSurface s = make_strip(4, false);
  ExtendedCrack ext = build_extension(s, +1);
  std::stringstream buf;
  write_extension(buf, ext);
  TriSurface combined = read_surface(buf);
  CHECK(combined.n_vertices() == s.n_vertices() + s.n_triangles());
  CHECK(combined.n_triangles() == s.n_triangles() + 3 * s.n_triangles());
  // apex vertices come last and match the construction
  for (int t = 0; t < s.n_triangles(); ++t)
    CHECK(combined.vertices[s.n_vertices() + t] == ext.apexes[t]);
}
