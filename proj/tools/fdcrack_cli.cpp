// Batch driver for the fictitious-domain crack solver: convergence studies,
// stabilization calibration, geometry robustness sweeps, a pressurized-crack
// demo, and the 3D crack-extension utility.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "fdcrack/driver.hpp"
#include "fdcrack/extension3d.hpp"

namespace {

using namespace fdcrack;

// ---------------------------------------------------------------------------
// flat key=value configuration with command-line overrides

class Config {
 public:
  void load_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        if (line.find_first_not_of(" \t\r") != std::string::npos)
          throw std::invalid_argument("config line " + std::to_string(lineno) +
                                      ": expected key=value");
        continue;
      }
      values_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
  }

  void apply_overrides(const std::vector<std::string>& sets) {
    for (const std::string& s : sets) {
      std::size_t eq = s.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("override must look like key=value: " + s);
      values_[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
    }
  }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_num(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size())
      throw std::invalid_argument("config key " + key + ": not a number: " + it->second);
    return v;
  }

  int get_int(const std::string& key, int fallback) const {
    double v = get_num(key, fallback);
    if (v != std::floor(v))
      throw std::invalid_argument("config key " + key + ": expected an integer");
    return static_cast<int>(v);
  }

 private:
  static std::string trim(std::string s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  }

  std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Couple {
  int disp, mult;
};

Couple parse_couple(const std::string& token) {
  // "P2/P0" -> displacement P2, multiplier P0
  if (token.size() != 5 || token[0] != 'P' || token[2] != '/' || token[3] != 'P')
    throw std::invalid_argument("bad element couple (expected e.g. P2/P0): " + token);
  Couple c{token[1] - '0', token[4] - '0'};
  if (c.disp < 1 || c.disp > 3 || c.mult < 0 || c.mult > 3 || c.mult > c.disp)
    throw std::invalid_argument("unsupported element couple: " + token);
  return c;
}

SolverKind parse_solver(const std::string& s) {
  if (s == "monolithic") return SolverKind::Monolithic;
  if (s == "uzawa") return SolverKind::Uzawa;
  throw std::invalid_argument("unknown solver (monolithic|uzawa): " + s);
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::invalid_argument("cannot open output file: " + path);
  return file;
}

/// Runs `jobs` closures on a small worker pool; results land in input order.
template <typename Job>
void run_pool(int n_jobs, int n_threads, const Job& job) {
  n_threads = std::max(1, std::min(n_threads, n_jobs));
  if (n_threads == 1) {
    for (int i = 0; i < n_jobs; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n_jobs; i = next.fetch_add(1)) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

int default_threads(const Config& cfg) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  return cfg.get_int("threads", hw > 0 ? hw : 1);
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_convergence(const Config& cfg) {
  std::vector<Couple> couples;
  for (const auto& tok : split_list(cfg.get("couples", "P1/P0,P2/P0,P2/P1,P3/P1")))
    couples.push_back(parse_couple(tok));
  std::vector<int> subdivisions;
  for (const auto& tok : split_list(cfg.get("subdivisions", "10,20,40,80,160")))
    subdivisions.push_back(std::stoi(tok));
  double gamma0 = cfg.get_num("gamma0", 0.0);
  SolverKind solver = parse_solver(cfg.get("solver", "monolithic"));

  struct JobSpec {
    Couple couple;
    int n;
  };
  std::vector<JobSpec> jobs;
  for (const Couple& c : couples)
    for (int n : subdivisions) jobs.push_back({c, n});

  ManufacturedCase mc;
  std::vector<CaseResult> results(jobs.size());
  run_pool(static_cast<int>(jobs.size()), default_threads(cfg), [&](int i) {
    CaseConfig cc;
    cc.nx = cc.ny = jobs[i].n;
    cc.disp_degree = jobs[i].couple.disp;
    cc.mult_degree = jobs[i].couple.mult;
    cc.gamma0 = gamma0;
    cc.solver = solver;
    cc.uzawa_eps = cfg.get_num("uzawa_eps", 1e-8);
    cc.uzawa_kmax = cfg.get_int("uzawa_kmax", 500);
    results[i] = run_manufactured(mc, cc);
  });

  std::ofstream file;
  std::ostream& out = open_output(file, cfg.get("out", "-"));
  out << csv_header() << "\n";
  std::size_t i = 0;
  for (const Couple& c : couples) {
    std::vector<double> hs, l2, h1, lam;
    for (std::size_t k = 0; k < subdivisions.size(); ++k, ++i) {
      const CaseResult& r = results[i];
      out << csv_line(to_csv_row(r, c.disp, c.mult, gamma0)) << "\n";
      hs.push_back(r.h);
      l2.push_back(r.rel_l2_pct);
      h1.push_back(r.rel_h1_pct);
      lam.push_back(r.rel_lambda_pct);
    }
    if (hs.size() >= 2) {
      // trailing rate row: error columns carry the fitted log-log slopes
      CsvRow rate;
      rate.elem_u = "P" + std::to_string(c.disp);
      rate.elem_lambda = "P" + std::to_string(c.mult);
      rate.gamma0 = gamma0;
      rate.rel_l2_pct = fit_rate(hs, l2);
      rate.rel_h1_pct = fit_rate(hs, h1);
      rate.rel_lambda_pct = fit_rate(hs, lam);
      rate.solver = "rate";
      out << csv_line(rate) << "\n";
    }
  }
  return 0;
}

int cmd_gamma_sweep(const Config& cfg) {
  int n = cfg.get_int("subdivision", 40);
  Couple couple = parse_couple(cfg.get("couple", "P2/P0"));
  std::vector<double> positions;
  for (const auto& tok : split_list(cfg.get("positions", "0.47")))
    positions.push_back(std::stod(tok));

  std::vector<double> grid;
  int count = cfg.get_int("gamma0_count", 60);
  double lo = cfg.get_num("gamma0_min", 1e-4), hi = cfg.get_num("gamma0_max", 1.0);
  if (!(lo > 0) || !(hi > lo)) throw std::invalid_argument("need 0 < gamma0_min < gamma0_max");
  for (int i = 0; i < count; ++i)
    grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  for (double pin : {0.0005, 0.03, 0.04}) grid.push_back(pin);  // reference points
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  struct JobSpec {
    double x_a, gamma0;
  };
  std::vector<JobSpec> jobs;
  for (double xa : positions)
    for (double g0 : grid) jobs.push_back({xa, g0});

  std::vector<CaseResult> results(jobs.size());
  run_pool(static_cast<int>(jobs.size()), default_threads(cfg), [&](int i) {
    CaseConfig cc;
    cc.nx = cc.ny = n;
    cc.disp_degree = couple.disp;
    cc.mult_degree = couple.mult;
    cc.gamma0 = jobs[i].gamma0;
    results[i] = run_manufactured(sweep_geometry(jobs[i].x_a), cc);
  });

  std::ofstream file;
  std::ostream& out = open_output(file, cfg.get("out", "-"));
  out << "x_a," << csv_header() << "\n";
  for (std::size_t i = 0; i < jobs.size(); ++i)
    out << csv_number(jobs[i].x_a) << ","
        << csv_line(to_csv_row(results[i], couple.disp, couple.mult, jobs[i].gamma0))
        << "\n";
  return 0;
}

int cmd_robustness(const Config& cfg) {
  int n = cfg.get_int("subdivision", 40);
  Couple couple = parse_couple(cfg.get("couple", "P2/P0"));
  double xa_min = cfg.get_num("xa_min", 0.0);
  double xa_max = cfg.get_num("xa_max", 0.95);
  double step = cfg.get_num("xa_step", 0.005);
  double threshold = cfg.get_num("threshold", 100.0);
  std::vector<double> gammas;
  for (const auto& tok : split_list(cfg.get("gamma0_list", "0,0.0005,0.03")))
    gammas.push_back(std::stod(tok));

  std::vector<double> xas;
  for (int i = 0;; ++i) {
    double xa = xa_min + i * step;
    if (xa > xa_max + 1e-12) break;
    xas.push_back(std::min(xa, xa_max));
  }

  struct JobSpec {
    double x_a, gamma0;
  };
  std::vector<JobSpec> jobs;
  for (double g0 : gammas)
    for (double xa : xas) jobs.push_back({xa, g0});

  std::vector<double> errors(jobs.size());
  std::vector<CaseResult> results(jobs.size());
  run_pool(static_cast<int>(jobs.size()), default_threads(cfg), [&](int i) {
    CaseConfig cc;
    cc.nx = cc.ny = n;
    cc.disp_degree = couple.disp;
    cc.mult_degree = couple.mult;
    cc.gamma0 = jobs[i].gamma0;
    results[i] = run_manufactured(sweep_geometry(jobs[i].x_a), cc);
    errors[i] = results[i].rel_lambda_pct;
  });

  std::ofstream file;
  std::ostream& out = open_output(file, cfg.get("out", "-"));
  out << "x_a," << csv_header() << "\n";
  for (std::size_t i = 0; i < jobs.size(); ++i)
    out << csv_number(jobs[i].x_a) << ","
        << csv_line(to_csv_row(results[i], couple.disp, couple.mult, jobs[i].gamma0))
        << "\n";
  std::size_t i = 0;
  for (double g0 : gammas) {
    int failures = 0;
    for (std::size_t k = 0; k < xas.size(); ++k, ++i)
      if (errors[i] > threshold) ++failures;
    out << "# failures gamma0=" << csv_number(g0) << ": " << failures << " of "
        << xas.size() << "\n";
  }
  return 0;
}

int cmd_demo(const Config& cfg) {
  std::string grid = cfg.get("grid", "25x12");
  int nx, ny;
  if (std::sscanf(grid.c_str(), "%dx%d", &nx, &ny) != 2 || nx < 1 || ny < 1)
    throw std::invalid_argument("bad grid (expected like 25x12): " + grid);
  double pressure = cfg.get_num("pressure", 1.0);

  // rift-zone scenario: the crack y = 2(x - 48) + 35 lives in [0,100]x[0,50],
  // its pressurized part spans 35 <= y <= 45
  RectDomain domain(0, 100, 0, 50);
  CrackDescription crack;
  crack.ls1 = [](double x, double y) { return y - 2.0 * (x - 48.0) - 35.0; };
  crack.ls2 = [](double, double y) { return 35.0 - y; };
  crack.ls3 = [](double, double y) { return y - 45.0; };

  // bottom and lateral edges clamped, top edge traction-free
  auto dirichlet = [&domain](const Vector2d& p) {
    double tol = 1e-9;
    return std::abs(p.y() - domain.y_min) < tol || std::abs(p.x() - domain.x_min) < tol ||
           std::abs(p.x() - domain.x_max) < tol;
  };

  CaseSetup s = setup_case(domain, nx, ny, crack, 2, 0, 1e-8, dirichlet);
  Material mat = Material::from_young_poisson(cfg.get_num("young", 5000.0),
                                              cfg.get_num("poisson", 0.25));
  SaddleSystem sys =
      assemble_system(s.input(), mat, ProblemData::crack_pressure(pressure), 0.0);
  Solution sol = solve_monolithic(sys);

  // per-vertex displacement, branch picked by the vertex's side of ls1
  std::ofstream file;
  std::ostream& out = open_output(file, cfg.get("out", "-"));
  std::vector<int> vertex_cell[2];
  vertex_cell[0].assign(s.mesh->n_vertices(), -1);
  vertex_cell[1].assign(s.mesh->n_vertices(), -1);
  for (int c = 0; c < s.cm.n_cells(); ++c)
    for (Side sd : {Side::Plus, Side::Minus})
      if (s.cm.cell_on_side(c, sd))
        for (int v : s.mesh->cells[c]) vertex_cell[static_cast<int>(sd)][v] = c;
  for (int v = 0; v < s.mesh->n_vertices(); ++v) {
    const Vector2d& p = s.mesh->vertices[v];
    Side sd = crack.ls1(p.x(), p.y()) > 0 ? Side::Plus : Side::Minus;
    if (vertex_cell[static_cast<int>(sd)][v] < 0) sd = opposite(sd);
    int cell = vertex_cell[static_cast<int>(sd)][v];
    Vector2d u = eval_field(*s.mesh, s.spaces.uncut, s.spaces.restricted(sd),
                            sol.U[static_cast<int>(sd)], cell, p);
    out << csv_number(p.x()) << " " << csv_number(p.y()) << " " << csv_number(u.x())
        << " " << csv_number(u.y()) << "\n";
  }
  std::cerr << "demo: " << s.mesh->n_vertices() << " vertices, "
            << sys.n_free[0] + sys.n_free[1] + sys.n_mult() << " unknowns\n";
  return 0;
}

int cmd_extend3d(const Config& cfg) {
  std::string in = cfg.get("in", "");
  if (in.empty()) throw std::invalid_argument("extend3d: missing `in=<surface file>`");
  TriSurface surf = read_surface_file(in);
  int seed_sign = cfg.get_int("seed_sign", 1);
  double scale = cfg.get_num("scale", 1.0);
  ExtendedCrack ext = build_extension(surf, seed_sign, scale);

  std::ofstream file;
  std::ostream& out = open_output(file, cfg.get("out", "-"));
  write_extension(out, ext);
  std::cerr << "extend3d: " << surf.n_triangles() << " crack triangles, "
            << ext.apexes.size() << " apexes, " << ext.extension_facets.size()
            << " extension facets\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fictitious-domain finite element solver for cracked elastic media"};
  app.require_subcommand(1);
  app.fallthrough();  // allow --config/--set after the subcommand name

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--set", overrides, "override a config key (key=value, repeatable)");

  auto* c_conv = app.add_subcommand("convergence", "mesh refinement study");
  auto* c_gamma = app.add_subcommand("gamma-sweep", "stabilization parameter sweep");
  auto* c_robust = app.add_subcommand("robustness", "crack position sweep");
  auto* c_demo = app.add_subcommand("demo", "pressurized crack illustration");
  auto* c_ext = app.add_subcommand("extend3d", "3D crack extension construction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    Config cfg;
    if (!config_path.empty()) cfg.load_file(config_path);
    cfg.apply_overrides(overrides);
    if (c_conv->parsed()) return cmd_convergence(cfg);
    if (c_gamma->parsed()) return cmd_gamma_sweep(cfg);
    if (c_robust->parsed()) return cmd_robustness(cfg);
    if (c_demo->parsed()) return cmd_demo(cfg);
    if (c_ext->parsed()) return cmd_extend3d(cfg);
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}
