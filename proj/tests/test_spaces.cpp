#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "fdcrack/manufactured.hpp"
#include "fdcrack/spaces.hpp"

using namespace fdcrack;

namespace {

struct Fixture {
  std::shared_ptr<BackgroundMesh> mesh;
  CutMesh cm;
  std::vector<InterfacePoint> interface;
  FdSpaces sp;

  Fixture(int n, int disp_degree, int mult_degree) {
    mesh = std::make_shared<BackgroundMesh>(
        build_mesh(RectDomain::unit_square(), n, n));
    cm = build_cut_mesh(*mesh, ManufacturedCase().crack());
    interface = interface_quadrature(cm, 2 * disp_degree + 1);
    sp = build_spaces(cm, ElementType(disp_degree), ElementType(mult_degree), interface);
  }
};

}  // namespace

TEST_CASE("reduction followed by extension is the identity") {
  Fixture f(10, 2, 0);
  for (const RestrictedSpace* rs : {&f.sp.plus, &f.sp.minus}) {
    SpMat R = rs->reduction_matrix();
    SpMat E = R.transpose();
    Eigen::MatrixXd RE = Eigen::MatrixXd(R * E);
    CHECK(RE.isIdentity(0.0));  // exact binary product
  }
}

TEST_CASE("nodes near the crack are doubled, the rest appear once") {
  Fixture f(12, 1, 0);
  int doubled = 0;
  for (int n = 0; n < f.sp.uncut.n_nodes(); ++n) {
    bool in_plus = f.sp.plus.node_local[n] >= 0;
    bool in_minus = f.sp.minus.node_local[n] >= 0;
    CHECK((in_plus || in_minus));
    if (in_plus && in_minus) ++doubled;
  }
  CHECK(doubled > 0);
  CHECK(f.sp.plus.n_kept() + f.sp.minus.n_kept() == f.sp.uncut.n_nodes() + doubled);
  // every node of a cut cell lives in both spaces
  for (int c = 0; c < f.cm.n_cells(); ++c) {
    if (f.cm.classes[c] != CellClass::Cut) continue;
    for (int n : f.sp.uncut.dof.cell_nodes[c]) {
      CHECK(f.sp.plus.node_local[n] >= 0);
      CHECK(f.sp.minus.node_local[n] >= 0);
    }
  }
}

TEST_CASE("Dirichlet flags land on the outer boundary only") {
  Fixture f(8, 2, 0);
  double tol = 1e-10;
  for (int l = 0; l < f.sp.plus.n_kept(); ++l) {
    const Vector2d& p = f.sp.uncut.dof.node_coords[f.sp.plus.kept_nodes[l]];
    bool on_bdry = f.mesh->domain.on_boundary(p, tol);
    CHECK(static_cast<bool>(f.sp.plus.local_dirichlet[l]) == on_bdry);
  }
}

TEST_CASE("restriction fails when a side has no cells") {
  auto mesh = build_mesh(RectDomain::unit_square(), 6, 6);
  CrackDescription c;
  c.ls1 = [](double, double) { return 1.0; };  // whole domain on the Plus side
  c.ls2 = [](double, double) { return -1.0; };
  c.ls3 = [](double, double) { return -1.0; };
  auto cm = build_cut_mesh(mesh, c);
  auto us = build_uncut_space(mesh, ElementType(1));
  CHECK_THROWS_WITH(build_restricted(us, cm, Side::Minus),
                    Catch::Matchers::ContainsSubstring("does not split"));
}

TEST_CASE("multiplier construction requires a nonempty Gamma_0") {
  auto mesh = build_mesh(RectDomain::unit_square(), 10, 10);
  CrackDescription c = ManufacturedCase().crack();
  c.ls2 = [](double, double) { return -1.0; };  // the whole interface is Gamma_T
  c.ls3 = [](double, double) { return -1.0; };
  auto cm = build_cut_mesh(mesh, c);
  auto iface = interface_quadrature(cm, 3);
  CHECK_THROWS_WITH(build_multiplier(ElementType(0), cm, iface),
                    Catch::Matchers::ContainsSubstring("Gamma_0"));
}

TEST_CASE("active multiplier traces have a well-conditioned Gram matrix") {
  for (int mult_degree : {0, 1}) {
    Fixture f(14, 2, mult_degree);
    const MultiplierSpace& ms = f.sp.multiplier;
    REQUIRE(ms.n_active() > 0);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(ms.n_active(), ms.n_active());
    for (const auto& ip : f.interface) {
      if (ip.tag != InterfaceTag::Gamma0) continue;
      auto psi = ms.trace_values(*f.mesh, ip.cell, ip.x);
      for (const auto& [a, pa] : psi)
        for (const auto& [b, pb] : psi) gram(a, b) += ip.w * pa * pb;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    // the elimination threshold guarantees a bounded spread
    CHECK(es.eigenvalues().minCoeff() > 1e-12 * es.eigenvalues().maxCoeff());
  }
}

TEST_CASE("trace elimination removes P1 end-node redundancy") {
  // P1 traces on Gamma_0: nodes shared by neighboring cut cells plus nodes
  // whose support barely touches the interface; some candidates must go
  Fixture f(14, 2, 1);
  const MultiplierSpace& ms = f.sp.multiplier;
  int n_candidates = 0;
  std::vector<char> mark(ms.dof.n_nodes, 0);
  for (const auto& ip : f.interface) {
    if (ip.tag != InterfaceTag::Gamma0) continue;
    for (int n : ms.dof.cell_nodes[ip.cell])
      if (!mark[n]) {
        mark[n] = 1;
        ++n_candidates;
      }
  }
  CHECK(ms.n_active() < n_candidates);
  CHECK(ms.n_active() > 0);
}

TEST_CASE("multiplier DOF layout is component blocked") {
  Fixture f(10, 2, 0);
  const MultiplierSpace& ms = f.sp.multiplier;
  CHECK(ms.n_dofs() == 2 * ms.n_active());
  CHECK(ms.mdof(1, 0) == 1);
  CHECK(ms.mdof(1, 1) == ms.n_active() + 1);
}
