#pragma once

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace fdcrack {

/// One-dimensional Gauss-Legendre rule on [0,1], exact for polynomials of
/// degree 2n-1. Nodes computed by Newton iteration on the Legendre polynomial.
struct GaussLegendre {
  std::vector<double> points;
  std::vector<double> weights;

  explicit GaussLegendre(int n) {
    if (n < 1) throw std::invalid_argument("GaussLegendre: n must be >= 1");
    points.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
      // initial guess on [-1,1]
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      points[n - 1 - i] = 0.5 * (x + 1.0);
      weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

struct QuadPoint2 {
  Eigen::Vector2d x;
  double w;
};

/// Quadrature on the reference triangle (0,0)-(1,0)-(0,1), exact for
/// polynomials of total degree <= `degree`. Built by collapsing a tensor
/// Gauss-Legendre grid (Duffy transform); all weights are positive.
inline std::vector<QuadPoint2> triangle_rule(int degree) {
  if (degree < 0) throw std::invalid_argument("triangle_rule: negative degree");
  int n = degree / 2 + 2;  // covers the extra Jacobian degree
  GaussLegendre g(n);
  std::vector<QuadPoint2> pts;
  pts.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double xi = g.points[i];
      double eta = g.points[j];
      pts.push_back({Eigen::Vector2d(xi, eta * (1.0 - xi)),
                     g.weights[i] * g.weights[j] * (1.0 - xi)});
    }
  }
  return pts;
}

}  // namespace fdcrack
