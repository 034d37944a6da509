#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "fdcrack/assembly.hpp"

namespace fdcrack {

struct Solution {
  std::array<VecX, 2> U;  // full kept-DOF vectors, Dirichlet values included
  VecX Lambda;
  int iterations = 0;
  double gradient_ratio = 0.0;
  bool converged = true;

  const VecX& on(Side s) const { return U[static_cast<int>(s)]; }
};

struct UzawaConfig {
  double eps = 1e-8;   // relative tolerance on the L2(Gamma_0) gradient norm
  int k_max = 500;
  VecX lambda0;        // empty = zero start

  UzawaConfig() = default;
  UzawaConfig(double eps_, int k_max_) : eps(eps_), k_max(k_max_) {
    if (!(eps > 0) || k_max < 1) throw std::invalid_argument("UzawaConfig: bad parameters");
  }
};

struct UzawaTraceRow {
  int iteration;
  double gradient_ratio;
  double dual_value;
};

namespace detail {

inline Solution expand_solution(const SaddleSystem& sys, const VecX& uf_plus,
                                const VecX& uf_minus, const VecX& lambda) {
  Solution sol;
  for (int si = 0; si < 2; ++si) {
    const VecX& uf = si == 0 ? uf_plus : uf_minus;
    sol.U[si] = sys.dirichlet_values[si];
    for (std::size_t d = 0; d < sys.free_index[si].size(); ++d) {
      int r = sys.free_index[si][d];
      if (r >= 0) sol.U[si][static_cast<int>(d)] = uf[r];
    }
  }
  sol.Lambda = lambda;
  return sol;
}

}  // namespace detail

/// Direct sparse factorization of the full symmetric block system.
inline Solution solve_monolithic(const SaddleSystem& sys) {
  const int n0 = sys.n_free[0], n1 = sys.n_free[1], m = sys.n_mult();
  if (m == 0) throw std::invalid_argument("solve_monolithic: empty multiplier space");
  const int n = n0 + n1 + m;

  std::vector<Eigen::Triplet<double>> t;
  auto add_block = [&t](const SpMat& M, int r0, int c0, double scale) {
    for (int k = 0; k < M.outerSize(); ++k)
      for (SpMat::InnerIterator it(M, k); it; ++it)
        t.emplace_back(r0 + static_cast<int>(it.row()), c0 + static_cast<int>(it.col()),
                       scale * it.value());
  };
  add_block(sys.A_ff[0], 0, 0, 1.0);
  add_block(sys.A_ff[1], n0, n0, 1.0);
  add_block(sys.B_f[0], n0 + n1, 0, 1.0);
  add_block(sys.B_f[1], n0 + n1, n0, -1.0);
  add_block(SpMat(sys.B_f[0].transpose()), 0, n0 + n1, 1.0);
  add_block(SpMat(sys.B_f[1].transpose()), n0, n0 + n1, -1.0);
  add_block(sys.C, n0 + n1, n0 + n1, -1.0);

  SpMat K(n, n);
  K.setFromTriplets(t.begin(), t.end());
  K.makeCompressed();

  VecX rhs(n);
  rhs.segment(0, n0) = sys.F_red[0];
  rhs.segment(n0, n1) = sys.F_red[1];
  rhs.segment(n0 + n1, m) = sys.G_red;

  Eigen::SparseLU<SpMat> lu;
  lu.analyzePattern(K);
  lu.factorize(K);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error(
        "solve_monolithic: singular saddle matrix (multiplier space too rich for the "
        "displacement space?)");
  VecX x = lu.solve(rhs);

  Solution sol = detail::expand_solution(sys, x.segment(0, n0), x.segment(n0, n1),
                                         x.segment(n0 + n1, m));
  sol.iterations = 0;
  double rhs_norm = rhs.norm();
  sol.gradient_ratio = rhs_norm > 0 ? (K * x - rhs).norm() / rhs_norm : 0.0;
  return sol;
}

/// Fletcher-Reeves conjugate gradient on the dual functional. Inner products
/// are taken in L2(Gamma_0), i.e. through the Gamma_0 mass matrix; with the
/// multiplier residual r = B+ U+ - B- U- - C Lambda - G the L2 gradient is
/// M^{-1} r, so the loop is a mass-preconditioned CG on the Schur complement.
inline Solution uzawa_cg(const SaddleSystem& sys, const SpMat& gamma0_mass,
                         const UzawaConfig& config = {},
                         std::vector<UzawaTraceRow>* trace = nullptr) {
  const int m = sys.n_mult();
  if (m == 0) throw std::invalid_argument("uzawa_cg: empty multiplier space");

  Eigen::SimplicialLDLT<SpMat> Afac[2];
  for (int si = 0; si < 2; ++si) {
    Afac[si].compute(sys.A_ff[si]);
    if (Afac[si].info() != Eigen::Success)
      throw std::runtime_error("uzawa_cg: displacement block factorization failed");
  }
  Eigen::SimplicialLDLT<SpMat> Mfac;
  Mfac.compute(gamma0_mass);
  if (Mfac.info() != Eigen::Success)
    throw std::runtime_error("uzawa_cg: Gamma_0 mass matrix factorization failed");

  VecX lambda = config.lambda0.size() == m ? config.lambda0 : VecX::Zero(m);

  // initialization solves: A^± u^± = F^± ∓ B^±T lambda
  VecX uf[2];
  uf[0] = Afac[0].solve(sys.F_red[0] - sys.B_f[0].transpose() * lambda);
  uf[1] = Afac[1].solve(sys.F_red[1] + sys.B_f[1].transpose() * lambda);

  auto residual = [&](const VecX& up, const VecX& um, const VecX& lam) {
    return (sys.B_f[0] * up - sys.B_f[1] * um - sys.C * lam - sys.G_red).eval();
  };
  auto dual_value = [&](const VecX& up, const VecX& um, const VecX& lam) {
    return -0.5 * (up.dot(sys.A_ff[0] * up) + um.dot(sys.A_ff[1] * um)) -
           0.5 * lam.dot(sys.C * lam) - lam.dot(sys.G_red);
  };

  VecX r = residual(uf[0], uf[1], lambda);
  VecX g = Mfac.solve(r);       // L2(Gamma_0) gradient
  double gg0 = r.dot(g);        // (g0, g0)_{L2}
  double gg = gg0;
  VecX dir = g;

  Solution sol;
  sol.iterations = 0;
  sol.gradient_ratio = gg0 > 0 ? 1.0 : 0.0;
  if (trace) trace->push_back({0, sol.gradient_ratio, dual_value(uf[0], uf[1], lambda)});

  if (gg0 <= 0.0) {  // converged start
    sol = detail::expand_solution(sys, uf[0], uf[1], lambda);
    sol.gradient_ratio = 0.0;
    return sol;
  }

  int k = 0;
  bool converged = false;
  while (k < config.k_max) {
    // sensitivity solves for the search direction
    VecX wp = Afac[0].solve((-(sys.B_f[0].transpose() * dir)).eval());
    VecX wm = Afac[1].solve((sys.B_f[1].transpose() * dir).eval());
    VecX s = sys.B_f[0] * wp - sys.B_f[1] * wm - sys.C * dir;

    double denom = dir.dot(s);  // (mu, [omega])_{L2}
    if (denom == 0.0)
      throw std::runtime_error("uzawa_cg: search direction in the coupling kernel");
    double t = -dir.dot(r) / denom;

    lambda += t * dir;
    uf[0] += t * wp;
    uf[1] += t * wm;
    r += t * s;

    VecX g_new = Mfac.solve(r);
    double gg_new = r.dot(g_new);
    ++k;
    if (trace)
      trace->push_back({k, gg0 > 0 ? std::sqrt(std::max(gg_new, 0.0) / gg0) : 0.0,
                        dual_value(uf[0], uf[1], lambda)});
    if (gg_new < config.eps * config.eps * gg0) {
      gg = gg_new;
      converged = true;
      break;
    }
    double beta = gg_new / gg;
    dir = g_new + beta * dir;
    gg = gg_new;
  }

  sol = detail::expand_solution(sys, uf[0], uf[1], lambda);
  sol.iterations = k;
  sol.gradient_ratio = gg0 > 0 ? std::sqrt(std::max(gg, 0.0) / gg0) : 0.0;
  sol.converged = converged;
  return sol;
}

}  // namespace fdcrack
