#include "oseen2p/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace oseen2p {

namespace {

std::string fmt(double v, const char* spec = "%.12g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

bool close(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({std::abs(a), std::abs(b), 1e-30});
}

} // namespace

std::string csv_header() {
  return "elements,h,re,rho_ratio,mu_ratio,alpha,dt,precond,picard_steps,avg_gmres,"
         "max_gmres,final_nl_rel_residual,wall_time_s,converged";
}

std::string to_csv_row(const RunRecord& r) {
  std::ostringstream os;
  os << r.elements << ',' << fmt(r.h) << ',' << fmt(r.re) << ',' << fmt(r.rho_ratio) << ','
     << fmt(r.mu_ratio) << ',' << r.alpha << ',' << fmt(r.dt) << ',' << r.precond << ','
     << r.picard_steps << ',' << fmt(r.avg_gmres, "%.17g") << ',' << r.max_gmres << ','
     << fmt(r.final_nl_rel_residual, "%.6g") << ',' << fmt(r.wall_time_s, "%.3f") << ','
     << (r.converged ? 1 : 0);
  return os.str();
}

void write_csv(const std::vector<RunRecord>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << csv_header() << "\n";
  for (const auto& r : rows) out << to_csv_row(r) << "\n";
}

std::vector<RunRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
  if (line != csv_header()) throw std::runtime_error("unexpected csv header in " + path);

  std::vector<RunRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() != 14) throw std::runtime_error("malformed csv row: " + line);
    RunRecord r;
    r.elements = f[0];
    r.h = std::stod(f[1]);
    r.re = std::stod(f[2]);
    r.rho_ratio = std::stod(f[3]);
    r.mu_ratio = std::stod(f[4]);
    r.alpha = std::stoi(f[5]);
    r.dt = std::stod(f[6]);
    r.precond = f[7];
    r.picard_steps = std::stoi(f[8]);
    r.avg_gmres = std::stod(f[9]);
    r.max_gmres = std::stoi(f[10]);
    r.final_nl_rel_residual = std::stod(f[11]);
    r.wall_time_s = std::stod(f[12]);
    r.converged = std::stoi(f[13]) != 0;
    rows.push_back(std::move(r));
  }
  return rows;
}

CavityProblem make_problem(ElementPair pair, double h, double re, double rho_ratio,
                           double mu_ratio, int alpha, double dt, SchurKind schur,
                           const SchurOptions& opts, double linear_tol, int picard_max) {
  const double n_real = 2.0 / h;
  const int n = static_cast<int>(std::llround(n_real));
  if (!(h > 0.0) || std::abs(n - n_real) > 1e-9 || n < 4 || n % 4 != 0) {
    throw std::invalid_argument("h must equal 2/n for n >= 4 divisible by 4");
  }
  if ((schur == SchurKind::Lsc || schur == SchurKind::LscD || schur == SchurKind::Lsc2) &&
      pair == ElementPair::Q1Q1) {
    throw std::invalid_argument(
        "lsc-type strategies need an unstabilised element pair (C = 0); "
        "q1q1 uses pressure-projection stabilisation");
  }
  CavityProblem p;
  p.pair = pair;
  p.n_per_side = n;
  p.reynolds = re;
  p.rho_ratio = rho_ratio;
  p.mu_ratio = mu_ratio;
  p.alpha = alpha;
  p.dt = alpha ? dt : 1.0;
  p.linear_tol = linear_tol;
  p.picard_max = picard_max;
  p.schur = schur;
  p.schur_opts = opts;
  return p;
}

RunRecord execute_run(const CavityProblem& problem) { return execute_run(problem, ""); }

RunRecord execute_run(const CavityProblem& problem, const std::string& dump_dir) {
  RunRecord r;
  r.elements = to_string(problem.pair);
  r.h = 2.0 / problem.n_per_side;
  r.re = problem.reynolds;
  r.rho_ratio = problem.rho_ratio;
  r.mu_ratio = problem.mu_ratio;
  r.alpha = static_cast<int>(problem.alpha);
  r.dt = problem.alpha != 0.0 ? problem.dt : 0.0;
  r.precond = to_string(problem.schur);
  if (problem.schur == SchurKind::LscD && problem.schur_opts.lscd_use_diag) {
    r.precond = "lsc-d-diag"; // records which scaling variant produced the row
  }

  CavitySolver solver(problem);
  const SolveReport report = solver.run();
  if (!dump_dir.empty()) {
    dump_matrices(solver.disc(), solver.grid(), solver.last_state().u_full, problem.alpha,
                  problem.dt, dump_dir);
  }
  r.picard_steps = report.picard_steps;
  r.avg_gmres = report.avg_gmres;
  r.max_gmres = report.max_gmres;
  r.final_nl_rel_residual = report.final_nl_rel_residual;
  r.wall_time_s = report.wall_time_s;
  r.converged = report.converged;
  return r;
}

namespace {

bool record_key_less(const RunRecord& a, const RunRecord& b) {
  auto key = [](const RunRecord& r) {
    return std::make_tuple(r.elements, r.alpha, -r.h, r.re, r.rho_ratio, r.mu_ratio, r.dt,
                           r.precond);
  };
  return key(a) < key(b);
}

} // namespace

std::vector<RunRecord> sweep(const SweepSpec& spec) {
  std::vector<CavityProblem> points;
  std::vector<RunRecord> rows;
  const std::vector<double> dts = spec.alpha ? spec.dts : std::vector<double>{0.0};
  for (double h : spec.hs) {
    for (double re : spec.res) {
      for (double rho : spec.rhos) {
        for (double mu : spec.mus) {
          if (rho > mu * (1.0 + 1e-12)) continue; // second phase would dominate Re
          for (double dt : dts) {
            for (SchurKind kind : spec.strategies) {
              try {
                points.push_back(make_problem(spec.pair, h, re, rho, mu, spec.alpha, dt,
                                              kind, spec.schur_opts, spec.linear_tol,
                                              spec.picard_max));
              } catch (const std::exception&) {
                RunRecord r;
                r.elements = to_string(spec.pair);
                r.h = h;
                r.re = re;
                r.rho_ratio = rho;
                r.mu_ratio = mu;
                r.alpha = spec.alpha;
                r.dt = spec.alpha ? dt : 0.0;
                r.precond = to_string(kind);
                r.converged = false;
                rows.push_back(std::move(r));
              }
            }
          }
        }
      }
    }
  }

  std::vector<RunRecord> results(points.size());
  std::atomic<size_t> next{0};
  const int jobs = std::max(1, spec.jobs);
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      try {
        results[i] = execute_run(points[i]);
      } catch (const std::exception&) {
        RunRecord r;
        const auto& p = points[i];
        r.elements = to_string(p.pair);
        r.h = 2.0 / p.n_per_side;
        r.re = p.reynolds;
        r.rho_ratio = p.rho_ratio;
        r.mu_ratio = p.mu_ratio;
        r.alpha = static_cast<int>(p.alpha);
        r.dt = p.alpha != 0.0 ? p.dt : 0.0;
        r.precond = to_string(p.schur);
        r.converged = false;
        results[i] = std::move(r);
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  rows.insert(rows.end(), results.begin(), results.end());
  std::sort(rows.begin(), rows.end(), record_key_less);
  return rows;
}

std::string markdown_table(const std::vector<RunRecord>& rows,
                           const std::vector<SchurKind>& strategies) {
  if (rows.empty()) return "";

  // ratio grids tabulate mu (rows) by rho (cols); otherwise h or dt rows by Re
  std::vector<double> cols, rkeys;
  auto collect = [](std::vector<double>& v, double x) {
    for (double y : v)
      if (close(x, y)) return;
    v.push_back(x);
  };
  bool ratio_grid = false;
  {
    std::vector<double> res, rhos;
    for (const auto& r : rows) {
      collect(res, r.re);
      collect(rhos, r.rho_ratio);
    }
    ratio_grid = rhos.size() > 1 && res.size() <= 1;
  }
  const bool dt_rows = !ratio_grid && rows.front().alpha != 0;
  for (const auto& r : rows) {
    collect(cols, ratio_grid ? r.rho_ratio : r.re);
    collect(rkeys, ratio_grid ? r.mu_ratio : (dt_rows ? r.dt : r.h));
  }
  std::sort(cols.begin(), cols.end());
  std::sort(rkeys.begin(), rkeys.end());
  if (!ratio_grid && !dt_rows) std::reverse(rkeys.begin(), rkeys.end()); // coarse h first

  std::ostringstream os;
  os << "| " << (ratio_grid ? "mu_ratio \\ rho_ratio" : (dt_rows ? "dt \\ Re" : "h \\ Re"));
  for (double c : cols) os << " | " << fmt(c, "%.6g");
  os << " |\n|---";
  for (size_t i = 0; i < cols.size(); ++i) os << "|---";
  os << "|\n";
  for (double rk : rkeys) {
    os << "| " << fmt(rk, "%.6g");
    for (double c : cols) {
      os << " | ";
      std::string cell;
      for (const auto& kind : strategies) {
        const std::string name = to_string(kind);
        const RunRecord* found = nullptr;
        for (const auto& r : rows) {
          const double rowkey = ratio_grid ? r.mu_ratio : (dt_rows ? r.dt : r.h);
          const double colkey = ratio_grid ? r.rho_ratio : r.re;
          if (close(rowkey, rk) && close(colkey, c) &&
              (r.precond == name || r.precond == name + "-diag")) {
            found = &r;
            break;
          }
        }
        if (!cell.empty()) cell += " / ";
        if (!found) {
          cell += "*";
        } else if (!found->converged) {
          cell += "x";
        } else {
          cell += std::to_string(rounded_average(found->avg_gmres));
        }
      }
      os << cell;
    }
    os << " |\n";
  }
  return os.str();
}

std::vector<ReferenceCell> load_reference_tables(const std::string& path,
                                                 const std::string& table_id) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open reference file " + path);
  std::vector<ReferenceCell> cells;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::stringstream ss(line);
    std::string tok;
    ReferenceCell c;
    bool any = false;
    while (ss >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw std::runtime_error("bad reference token: " + tok);
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      any = true;
      if (key == "table") c.table = val;
      else if (key == "elements") c.elements = val;
      else if (key == "alpha") c.alpha = std::stoi(val);
      else if (key == "h") c.h = std::stod(val);
      else if (key == "re") c.re = std::stod(val);
      else if (key == "rho") c.rho = std::stod(val);
      else if (key == "mu") c.mu = std::stod(val);
      else if (key == "dt") c.dt = std::stod(val);
      else if (key == "precond") c.precond = val;
      else if (key == "iters") c.iters = std::stoi(val);
      else throw std::runtime_error("unknown reference key: " + key);
    }
    if (!any) continue;
    if (table_id.empty() || c.table == table_id) cells.push_back(std::move(c));
  }
  return cells;
}

ComparePolicy default_policy(const std::string& table, const std::string& precond) {
  if (table == "T2") {
    if (precond == "pcd2") return {3.0, 0.0};
    return {5.0, 20.0};
  }
  if (table == "T4a") return {3.0, 0.0};
  if (table == "T4b") return {5.0, 25.0};
  return {5.0, 25.0};
}

std::string CompareReport::summary() const {
  std::ostringstream os;
  os << passed << "/" << compared << " cells within tolerance";
  if (incomparable > 0) os << ", " << incomparable << " incomparable";
  return os.str();
}

CompareReport compare(const std::vector<RunRecord>& rows,
                      const std::vector<ReferenceCell>& reference,
                      std::optional<ComparePolicy> override_policy) {
  CompareReport report;
  for (const auto& cell : reference) {
    CellComparison cc;
    cc.cell = cell;
    const RunRecord* found = nullptr;
    for (const auto& r : rows) {
      if (r.elements == cell.elements && r.alpha == cell.alpha && close(r.h, cell.h) &&
          close(r.re, cell.re) && close(r.rho_ratio, cell.rho) &&
          close(r.mu_ratio, cell.mu) && close(r.dt, cell.dt) &&
          (r.precond == cell.precond ||
           (cell.precond == "lsc-d" && r.precond == "lsc-d-diag"))) {
        found = &r;
        break;
      }
    }
    if (!found || !found->converged) {
      cc.comparable = false;
      ++report.incomparable;
      report.cells.push_back(std::move(cc));
      continue;
    }
    cc.comparable = true;
    cc.avg = found->avg_gmres;
    cc.deviation = cc.avg - cell.iters;
    const ComparePolicy pol =
        override_policy ? *override_policy : default_policy(cell.table, cell.precond);
    const double tol = std::max(pol.abs_tol, pol.pct_tol / 100.0 * cell.iters);
    cc.pass = std::abs(cc.deviation) <= tol;
    ++report.compared;
    if (cc.pass) ++report.passed;
    report.cells.push_back(std::move(cc));
  }
  return report;
}

void dump_matrices(const MixedDiscretization& disc, const PhaseGrid& grid, const Vec& wind,
                   double alpha, double dt, const std::string& dir) {
  const SaddleSystem sys = build_saddle_system(disc, grid, wind, alpha, dt);
  const PressureOperators ops = assemble_pressure_operators(disc, grid, wind);
  auto path = [&dir](const std::string& name) { return dir + "/" + name + ".mtx"; };
  write_matrix_market(sys.F, path("F"));
  write_matrix_market(sys.B, path("B"));
  write_matrix_market(sys.C, path("C"));
  write_matrix_market(ops.Mp_one, path("Mp_one"));
  write_matrix_market(ops.Mp_rho, path("Mp_rho"));
  write_matrix_market(ops.Mp_inv2mu, path("Mp_inv2mu"));
  write_matrix_market(ops.Ap_one, path("Ap_one"));
  write_matrix_market(ops.Ap_invrho, path("Ap_invrho"));
  write_matrix_market(ops.Ap_mu, path("Ap_mu"));
  write_matrix_market(ops.Np_one, path("Np_one"));
  write_matrix_market(ops.Np_rho, path("Np_rho"));
}

} // namespace oseen2p
