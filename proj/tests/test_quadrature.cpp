#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fdcrack/quadrature.hpp"

using namespace fdcrack;

namespace {

double factorial(int n) {
  double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// int_T r^a s^b over the reference triangle = a! b! / (a + b + 2)!
double tri_monomial(int a, int b) {
  return factorial(a) * factorial(b) / factorial(a + b + 2);
}

}  // namespace

TEST_CASE("Gauss-Legendre rule is exact up to degree 2n-1") {
  for (int n = 1; n <= 6; ++n) {
    GaussLegendre g(n);
    REQUIRE(g.points.size() == static_cast<std::size_t>(n));
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += g.weights[i] * std::pow(g.points[i], p);
      // int_0^1 x^p dx = 1/(p+1)
      CHECK_THAT(s, Catch::Matchers::WithinAbs(1.0 / (p + 1), 1e-14));
    }
  }
}

TEST_CASE("Gauss-Legendre nodes lie in (0,1) with positive weights") {
  GaussLegendre g(8);
  double wsum = 0;
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    CHECK(g.points[i] > 0.0);
    CHECK(g.points[i] < 1.0);
    CHECK(g.weights[i] > 0.0);
    wsum += g.weights[i];
  }
  CHECK_THAT(wsum, Catch::Matchers::WithinAbs(1.0, 1e-14));
}

TEST_CASE("triangle rule integrates monomials exactly") {
  for (int degree : {0, 1, 2, 3, 4, 5, 6, 7}) {
    auto rule = triangle_rule(degree);
    for (int a = 0; a + 0 <= degree; ++a) {
      for (int b = 0; a + b <= degree; ++b) {
        double s = 0;
        for (const auto& qp : rule)
          s += qp.w * std::pow(qp.x.x(), a) * std::pow(qp.x.y(), b);
        CHECK_THAT(s, Catch::Matchers::WithinAbs(tri_monomial(a, b), 1e-14));
      }
    }
  }
}

TEST_CASE("triangle rule weights are positive and sum to the area") {
  auto rule = triangle_rule(6);
  double wsum = 0;
  for (const auto& qp : rule) {
    CHECK(qp.w > 0.0);
    CHECK(qp.x.x() >= 0.0);
    CHECK(qp.x.y() >= 0.0);
    CHECK(qp.x.x() + qp.x.y() <= 1.0 + 1e-14);
    wsum += qp.w;
  }
  CHECK_THAT(wsum, Catch::Matchers::WithinAbs(0.5, 1e-14));
}

TEST_CASE("quadrature constructors reject bad arguments") {
  CHECK_THROWS_AS(GaussLegendre(0), std::invalid_argument);
  CHECK_THROWS_AS(triangle_rule(-1), std::invalid_argument);
}
