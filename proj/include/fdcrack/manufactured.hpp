#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "fdcrack/assembly.hpp"
#include "fdcrack/levelset.hpp"

namespace fdcrack {

/// The reference test problem on the unit square: straight inclined crack
/// extension y = 2(x - x0), physical crack x in (xA, xB), smooth exact
/// displacement with a constant jump D across the extension.
struct ManufacturedCase {
  double x0 = 0.317, x_A = 0.47, x_B = 0.52;
  Vector2d D{0.1, 0.05};
  Material material{1.0, 1.0};

  ManufacturedCase() = default;
  ManufacturedCase(double x0_, double xA_, double xB_) : x0(x0_), x_A(xA_), x_B(xB_) {
    if (!(x_A < x_B)) throw std::invalid_argument("ManufacturedCase: need x_A < x_B");
  }

  CrackDescription crack() const { return CrackDescription::inclined_line(x0, x_A, x_B); }

  double ls1(const Vector2d& p) const { return p.y() - 2.0 * (p.x() - x0); }

  Side side_of(const Vector2d& p) const {
    return ls1(p) > 0 ? Side::Plus : Side::Minus;
  }

  /// Unit normal on Gamma pointing from Omega+ into Omega- (constant for the
  /// straight crack: -grad ls1 / |grad ls1|).
  Vector2d normal_plus() const { return Vector2d(2.0, -1.0) / std::sqrt(5.0); }

  /// Smooth branch of the exact displacement (the Plus side expression; the
  /// Minus branch is this minus the constant jump D).
  static Vector2d smooth_displacement(const Vector2d& p) {
    double x = p.x(), y = p.y();
    return {(x + y) * std::cos(x), (x - y) * std::sin(y)};
  }

  /// Gradient of the smooth branch, row i = grad of component i. Both
  /// branches share it since D is constant.
  static Eigen::Matrix2d displacement_gradient(const Vector2d& p) {
    double x = p.x(), y = p.y();
    Eigen::Matrix2d g;
    g(0, 0) = std::cos(x) - (x + y) * std::sin(x);
    g(0, 1) = std::cos(x);
    g(1, 0) = std::sin(y);
    g(1, 1) = -std::sin(y) + (x - y) * std::cos(y);
    return g;
  }

  Vector2d exact_displacement(const Vector2d& p) const {
    return exact_displacement(p, side_of(p));
  }

  Vector2d exact_displacement(const Vector2d& p, Side branch) const {
    Vector2d u = smooth_displacement(p);
    return branch == Side::Plus ? u : Vector2d(u - D);
  }

  Eigen::Matrix2d exact_stress(const Vector2d& p) const {
    return material.stress(displacement_gradient(p));
  }

  /// f = -div sigma_L(u_ex), from the closed-form second derivatives.
  Vector2d exact_body_force(const Vector2d& p) const {
    double x = p.x(), y = p.y();
    double u1_xx = -2.0 * std::sin(x) - (x + y) * std::cos(x);
    double u1_xy = -std::sin(x);
    double u1_yy = 0.0;
    double u2_xx = 0.0;
    double u2_xy = std::cos(y);
    double u2_yy = -2.0 * std::cos(y) - (x - y) * std::sin(y);
    double lam = material.lambda, mu = material.mu;
    double f1 = -((2 * mu + lam) * u1_xx + lam * u2_xy + mu * (u1_yy + u2_xy));
    double f2 = -(mu * (u1_xy + u2_xx) + (2 * mu + lam) * u2_yy + lam * u1_xy);
    return {f1, f2};
  }

  Vector2d exact_traction(const Vector2d& p, const Vector2d& normal) const {
    return exact_stress(p) * normal;
  }

  /// lambda = -sigma_L(u+) n+ = sigma_L(u-) n- on Gamma_0.
  Vector2d exact_multiplier(const Vector2d& p) const {
    return -exact_traction(p, normal_plus());
  }

  ProblemData problem_data() const {
    ProblemData d;
    d.body_force = [self = *this](const Vector2d& p) { return self.exact_body_force(p); };
    d.traction_plus = [self = *this](const Vector2d& p, const Vector2d& n_plus) {
      return self.exact_traction(p, n_plus);
    };
    d.jump = [D = D](const Vector2d&) { return D; };
    d.dirichlet = [self = *this](const Vector2d& p, Side s) {
      return self.exact_displacement(p, s);
    };
    return d;
  }
};

/// Geometry family of the robustness sweep: x0 = xA - 0.153, xB = xA + 0.05.
inline ManufacturedCase sweep_geometry(double x_A) {
  // tolerate one-ulp overshoot from accumulated sweep steps
  if (x_A < 0.0 && x_A > -1e-9) x_A = 0.0;
  if (x_A > 0.95 && x_A < 0.95 + 1e-9) x_A = 0.95;
  if (x_A < 0.0 || x_A > 0.95)
    throw std::invalid_argument("sweep_geometry: x_A must be in [0, 0.95]");
  return ManufacturedCase(x_A - 0.153, x_A, x_A + 0.05);
}

}  // namespace fdcrack
