#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fdcrack/mesh.hpp"

using namespace fdcrack;

TEST_CASE("build_mesh produces the structured triangulation") {
  auto m = build_mesh(RectDomain(0, 2, 0, 1), 4, 3);
  CHECK(m.n_vertices() == 5 * 4);
  CHECK(m.n_cells() == 2 * 4 * 3);
  CHECK_THAT(m.h, Catch::Matchers::WithinRel(std::hypot(0.5, 1.0 / 3.0), 1e-15));

  double area = 0;
  for (int c = 0; c < m.n_cells(); ++c) {
    auto v = m.cell_vertices(c);
    // counterclockwise ordering: positive cross product
    double cross = (v[1].x() - v[0].x()) * (v[2].y() - v[0].y()) -
                   (v[2].x() - v[0].x()) * (v[1].y() - v[0].y());
    CHECK(cross > 0);
    CHECK_THAT(m.cell_area(c), Catch::Matchers::WithinRel(0.5 * cross, 1e-13));
    area += m.cell_area(c);
  }
  CHECK_THAT(area, Catch::Matchers::WithinRel(2.0, 1e-13));
}

TEST_CASE("build_mesh rejects empty subdivisions") {
  CHECK_THROWS_AS(build_mesh(RectDomain::unit_square(), 0, 4), std::invalid_argument);
  CHECK_THROWS_AS(build_mesh(RectDomain::unit_square(), 4, 0), std::invalid_argument);
}

TEST_CASE("reference map round trips") {
  auto m = build_mesh(RectDomain(-1, 3, 2, 5), 5, 7);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    int c = static_cast<int>(u(rng) * m.n_cells()) % m.n_cells();
    double r = u(rng), s = u(rng) * (1 - r);
    Vector2d ref(r, s);
    Vector2d back = m.map_to_reference(c, m.map_to_physical(c, ref));
    CHECK((back - ref).norm() < 1e-12);
  }
}

TEST_CASE("shape functions interpolate their nodes") {
  for (int k : {1, 2, 3}) {
    ElementType e(k);
    auto nodes = e.local_nodes();
    REQUIRE(static_cast<int>(nodes.size()) == e.n_local());
    for (int a = 0; a < e.n_local(); ++a) {
      Eigen::VectorXd v = e.values(nodes[a]);
      for (int b = 0; b < e.n_local(); ++b)
        CHECK_THAT(v[b], Catch::Matchers::WithinAbs(a == b ? 1.0 : 0.0, 1e-13));
    }
  }
}

TEST_CASE("shape functions form a partition of unity") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k : {0, 1, 2, 3}) {
    ElementType e(k);
    for (int trial = 0; trial < 50; ++trial) {
      double r = u(rng), s = u(rng) * (1 - r);
      Eigen::VectorXd v = e.values({r, s});
      CHECK_THAT(v.sum(), Catch::Matchers::WithinAbs(1.0, 1e-13));
      Eigen::MatrixX2d g = e.gradients({r, s});
      CHECK(std::abs(g.col(0).sum()) < 1e-12);
      CHECK(std::abs(g.col(1).sum()) < 1e-12);
    }
  }
}

TEST_CASE("shape gradients match finite differences") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(0.05, 0.4);
  const double step = 1e-6;
  for (int k : {1, 2, 3}) {
    ElementType e(k);
    for (int trial = 0; trial < 20; ++trial) {
      Vector2d p(u(rng), u(rng));
      Eigen::MatrixX2d g = e.gradients(p);
      for (int d = 0; d < 2; ++d) {
        Vector2d dp = Vector2d::Zero();
        dp[d] = step;
        Eigen::VectorXd fd = (e.values(p + dp) - e.values(p - dp)) / (2 * step);
        for (int a = 0; a < e.n_local(); ++a)
          CHECK_THAT(g(a, d), Catch::Matchers::WithinAbs(fd[a], 1e-8));
      }
    }
  }
}

TEST_CASE("ElementType rejects unsupported degrees") {
  CHECK_THROWS_AS(ElementType(-1), std::invalid_argument);
  CHECK_THROWS_AS(ElementType(4), std::invalid_argument);
}

TEST_CASE("global node numbering matches the lattice counts") {
  auto m = build_mesh(RectDomain::unit_square(), 6, 4);
  CHECK(global_dof_map(m, ElementType(1), 2).n_nodes == 7 * 5);
  CHECK(global_dof_map(m, ElementType(2), 2).n_nodes == 13 * 9);
  CHECK(global_dof_map(m, ElementType(3), 2).n_nodes == 19 * 13);
  CHECK(global_dof_map(m, ElementType(0), 1).n_nodes == m.n_cells());
}

TEST_CASE("global node coordinates agree with the element placement") {
  auto m = build_mesh(RectDomain(0, 1, 0, 2), 3, 5);
  for (int k : {1, 2, 3}) {
    ElementType e(k);
    DofMap dm = global_dof_map(m, e, 2);
    auto ref = e.local_nodes();
    for (int c = 0; c < m.n_cells(); ++c) {
      for (int a = 0; a < e.n_local(); ++a) {
        Vector2d expect = m.map_to_physical(c, ref[a]);
        Vector2d got = dm.node_coords[dm.cell_nodes[c][a]];
        CHECK((expect - got).norm() < 1e-12);
      }
    }
  }
}

TEST_CASE("blocked DOF layout puts all x components first") {
  auto m = build_mesh(RectDomain::unit_square(), 2, 2);
  DofMap dm = global_dof_map(m, ElementType(1), 2);
  CHECK(dm.n_dofs() == 2 * dm.n_nodes);
  CHECK(dm.dof(3, 0) == 3);
  CHECK(dm.dof(3, 1) == dm.n_nodes + 3);
}
