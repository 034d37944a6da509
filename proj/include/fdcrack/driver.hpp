#pragma once

#include <cstdio>
#include <memory>
#include <string>

#include "fdcrack/levelset.hpp"
#include "fdcrack/manufactured.hpp"
#include "fdcrack/mesh.hpp"
#include "fdcrack/postproc.hpp"
#include "fdcrack/solver.hpp"
#include "fdcrack/spaces.hpp"

namespace fdcrack {

enum class SolverKind { Monolithic, Uzawa };

inline std::string solver_name(SolverKind k) {
  return k == SolverKind::Monolithic ? "monolithic" : "uzawa";
}

/// Everything geometric and discrete for one crack configuration. The mesh is
/// heap-held so the internal pointers stay valid when the setup is moved.
struct CaseSetup {
  std::shared_ptr<BackgroundMesh> mesh;
  CutMesh cm;
  std::vector<InterfacePoint> interface;
  SideQuadrature volume;
  FdSpaces spaces;

  AssemblyInput input() const { return {&cm, &spaces, &volume, &interface}; }
};

inline CaseSetup setup_case(
    const RectDomain& domain, int nx, int ny, const CrackDescription& crack,
    int disp_degree, int mult_degree, double eps_rank = 1e-8,
    const std::function<bool(const Vector2d&)>& dirichlet_predicate = {}) {
  if (disp_degree < 1 || disp_degree > 3)
    throw std::invalid_argument("setup_case: displacement degree must be 1, 2 or 3");
  if (mult_degree < 0 || mult_degree > disp_degree)
    throw std::invalid_argument(
        "setup_case: multiplier degree must be between 0 and the displacement degree");
  CaseSetup s;
  s.mesh = std::make_shared<BackgroundMesh>(build_mesh(domain, nx, ny));
  s.cm = build_cut_mesh(*s.mesh, crack);
  s.interface = interface_quadrature(s.cm, 2 * disp_degree + 1);
  s.volume = subdomain_quadrature(s.cm, 2 * disp_degree);
  s.spaces = build_spaces(s.cm, ElementType{disp_degree}, ElementType{mult_degree},
                          s.interface, eps_rank, dirichlet_predicate);
  return s;
}

struct CaseConfig {
  int nx = 10, ny = 10;
  int disp_degree = 2;
  int mult_degree = 0;
  double gamma0 = 0.0;
  SolverKind solver = SolverKind::Monolithic;
  double uzawa_eps = 1e-8;
  int uzawa_kmax = 500;
  double eps_rank = 1e-8;
};

struct CaseResult {
  Solution sol;
  double h = 0;
  int n_dofs = 0;
  double rel_l2_pct = 0, rel_h1_pct = 0, rel_lambda_pct = 0;
  double jump_ratio = 0;
  std::string solver;
  int iters = 0;
};

/// Full pipeline on the reference test problem: mesh, cut, spaces, assembly,
/// solve, error measures.
inline CaseResult run_manufactured(const ManufacturedCase& mc, const CaseConfig& cfg) {
  CaseSetup s = setup_case(RectDomain::unit_square(), cfg.nx, cfg.ny, mc.crack(),
                           cfg.disp_degree, cfg.mult_degree, cfg.eps_rank);
  SaddleSystem sys = assemble_system(s.input(), mc.material, mc.problem_data(), cfg.gamma0);
  ErrorMatrices em = assemble_error_matrices(s.input(), mc.material);

  CaseResult r;
  r.solver = solver_name(cfg.solver);
  if (cfg.solver == SolverKind::Monolithic) {
    r.sol = solve_monolithic(sys);
  } else {
    r.sol = uzawa_cg(sys, em.All, UzawaConfig(cfg.uzawa_eps, cfg.uzawa_kmax));
  }
  r.iters = r.sol.iterations;
  r.h = s.mesh->h;
  r.n_dofs = sys.n_free[0] + sys.n_free[1] + sys.n_mult();

  DisplacementErrors de = displacement_errors(r.sol, mc, s.cm, s.spaces);
  r.rel_l2_pct = de.rel_l2_pct;
  r.rel_h1_pct = de.rel_h1_pct;

  VecX uexp = interpolate_branch(mc, s.spaces.uncut, s.spaces.plus);
  VecX uexm = interpolate_branch(mc, s.spaces.uncut, s.spaces.minus);
  r.rel_lambda_pct = multiplier_error(r.sol.Lambda, uexp, uexm, em);
  r.jump_ratio = jump_compatibility(mc, s.cm, s.spaces, s.interface, uexp, uexm);
  return r;
}

// ---------------------------------------------------------------------------
// Result CSV schema shared by the experiment drivers.

struct CsvRow {
  std::string elem_u, elem_lambda;
  double gamma0 = 0, h = 0;
  int n_dofs = 0;
  double rel_l2_pct = 0, rel_h1_pct = 0, rel_lambda_pct = 0, jump_ratio = 0;
  std::string solver;
  int iters = 0;
};

inline std::string csv_header() {
  return "elem_u,elem_lambda,gamma0,h,n_dofs,rel_l2_pct,rel_h1_pct,rel_lambda_pct,"
         "jump_ratio,solver,iters";
}

inline std::string csv_number(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string csv_line(const CsvRow& r) {
  std::string out;
  out += r.elem_u;
  out += ',';
  out += r.elem_lambda;
  out += ',';
  out += csv_number(r.gamma0);
  out += ',';
  out += csv_number(r.h);
  out += ',';
  out += std::to_string(r.n_dofs);
  out += ',';
  out += csv_number(r.rel_l2_pct);
  out += ',';
  out += csv_number(r.rel_h1_pct);
  out += ',';
  out += csv_number(r.rel_lambda_pct);
  out += ',';
  out += csv_number(r.jump_ratio);
  out += ',';
  out += r.solver;
  out += ',';
  out += std::to_string(r.iters);
  return out;
}

inline CsvRow to_csv_row(const CaseResult& r, int disp_degree, int mult_degree,
                         double gamma0) {
  CsvRow row;
  row.elem_u = "P" + std::to_string(disp_degree);
  row.elem_lambda = "P" + std::to_string(mult_degree);
  row.gamma0 = gamma0;
  row.h = r.h;
  row.n_dofs = r.n_dofs;
  row.rel_l2_pct = r.rel_l2_pct;
  row.rel_h1_pct = r.rel_h1_pct;
  row.rel_lambda_pct = r.rel_lambda_pct;
  row.jump_ratio = r.jump_ratio;
  row.solver = r.solver;
  row.iters = r.iters;
  return row;
}

}  // namespace fdcrack
