#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "oseen2p/bench.hpp"

using namespace oseen2p;

namespace {

struct CommonFlags {
  std::string elements = "q2q1";
  double tol = 1e-6;
  int picard_max = 50;
  bool pin_pressure = false;
  bool lscd_diag = false;
  bool chebyshev_mass = false;
  long seed = 0; // reserved
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->set_help_flag("--help", "print help"); // frees -h/--h for the grid size
  cmd->add_option("--elements", f.elements, "element pair: q2q1 | q1q1 | q2pm1")
      ->check(CLI::IsMember({"q2q1", "q1q1", "q2pm1"}));
  cmd->add_option("--tol", f.tol, "linear (GMRES) relative tolerance");
  cmd->add_option("--picard-max", f.picard_max, "Picard iteration cap");
  cmd->add_flag("--pin-pressure", f.pin_pressure,
                "pin the constant pressure mode instead of projecting it");
  cmd->add_flag("--lscd-diag", f.lscd_diag, "lsc-d scaling from diag(F) instead of row max");
  cmd->add_flag("--chebyshev-mass", f.chebyshev_mass,
                "replace exact pressure mass solves by 3-step Chebyshev semi-iteration");
  cmd->add_option("--seed", f.seed, "reserved");
}

SchurOptions schur_options(const CommonFlags& f) {
  SchurOptions o;
  o.project_pressure = !f.pin_pressure;
  o.lscd_use_diag = f.lscd_diag;
  o.chebyshev_mass = f.chebyshev_mass;
  return o;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-phase lid-driven-cavity Oseen solver and preconditioner benchmark"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);

  // ---- run ----------------------------------------------------------------
  auto* run_cmd = app.add_subcommand("run", "solve one cavity configuration, emit a CSV row");
  CommonFlags rf;
  double r_h = 0.0625, r_re = 100.0, r_rho = 1.0, r_mu = 1.0, r_dt = 1.0;
  int r_alpha = 0;
  std::string r_precond = "pcd2", r_dump, r_out;
  add_common(run_cmd, rf);
  run_cmd->add_option("--h", r_h, "grid size h = 2/n, n divisible by 4")->required();
  run_cmd->add_option("--re", r_re, "Reynolds number of the first phase")->required();
  run_cmd->add_option("--rho-ratio", r_rho, "density ratio rho2/rho1");
  run_cmd->add_option("--mu-ratio", r_mu, "viscosity ratio mu2/mu1");
  run_cmd->add_option("--precond", r_precond,
                      "pcd | cc | gcc | pcd-visc | pcd2-rho | pcd2 | lsc | lsc-d | lsc2 | "
                      "simple | exact");
  run_cmd->add_option("--alpha", r_alpha, "0 steady, 1 single backward-Euler step")
      ->check(CLI::IsMember({0, 1}));
  run_cmd->add_option("--dt", r_dt, "time-step (alpha = 1)");
  run_cmd->add_option("--dump-matrices", r_dump, "directory for MatrixMarket block dumps");
  run_cmd->add_option("--out", r_out, "write the CSV to this file instead of stdout");

  // ---- sweep --------------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand("sweep", "cross-product parameter sweep to CSV");
  CommonFlags sf;
  std::vector<double> s_h, s_re{100.0}, s_rho{1.0}, s_mu{1.0}, s_dt;
  std::vector<std::string> s_precond{"pcd2"};
  int s_alpha = 0, s_jobs = 1;
  std::string s_out = "sweep.csv", s_markdown;
  add_common(sweep_cmd, sf);
  sweep_cmd->add_option("--h", s_h, "grid sizes")->required()->delimiter(',');
  sweep_cmd->add_option("--re", s_re, "Reynolds numbers")->delimiter(',');
  sweep_cmd->add_option("--rho-ratio", s_rho, "density ratios")->delimiter(',');
  sweep_cmd->add_option("--mu-ratio", s_mu, "viscosity ratios")->delimiter(',');
  sweep_cmd->add_option("--dt", s_dt, "time-steps (alpha = 1)")->delimiter(',');
  sweep_cmd->add_option("--precond", s_precond, "strategy keys")->delimiter(',');
  sweep_cmd->add_option("--alpha", s_alpha, "0 steady, 1 time-dependent")
      ->check(CLI::IsMember({0, 1}));
  sweep_cmd->add_option("--jobs", s_jobs, "concurrent runs");
  sweep_cmd->add_option("--out", s_out, "output CSV path");
  sweep_cmd->add_option("--markdown", s_markdown, "also emit a paper-style Markdown table");

  // ---- compare ------------------------------------------------------------
  auto* cmp_cmd = app.add_subcommand("compare", "check a sweep CSV against reference tables");
  cmp_cmd->set_help_flag("--help", "print help");
  std::string c_csv, c_ref = "data/reference_tables.txt", c_table;
  double c_tol_abs = -1.0, c_tol_pct = -1.0;
  cmp_cmd->add_option("--csv", c_csv, "CSV produced by run/sweep")->required();
  cmp_cmd->add_option("--reference", c_ref, "reference table file");
  cmp_cmd->add_option("--table", c_table, "table id: T1 | T2 | T2o | T4a | T4b | T5")
      ->required();
  cmp_cmd->add_option("--tol-abs", c_tol_abs, "override absolute tolerance");
  cmp_cmd->add_option("--tol-pct", c_tol_pct, "override percentage tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const CavityProblem problem = make_problem(
          parse_element_pair(rf.elements), r_h, r_re, r_rho, r_mu, r_alpha, r_dt,
          parse_schur_kind(r_precond), schur_options(rf), rf.tol, rf.picard_max);
      const RunRecord rec = execute_run(problem, r_dump);
      const std::string text = csv_header() + "\n" + to_csv_row(rec) + "\n";
      if (r_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(r_out);
        out << text;
      }
      return rec.converged ? 0 : 2;
    }

    if (*sweep_cmd) {
      SweepSpec spec;
      spec.pair = parse_element_pair(sf.elements);
      spec.hs = s_h;
      spec.res = s_re;
      spec.rhos = s_rho;
      spec.mus = s_mu;
      spec.dts = s_dt;
      spec.alpha = s_alpha;
      for (const auto& key : s_precond) spec.strategies.push_back(parse_schur_kind(key));
      spec.schur_opts = schur_options(sf);
      spec.linear_tol = sf.tol;
      spec.picard_max = sf.picard_max;
      spec.jobs = s_jobs;
      if (s_alpha == 1 && spec.dts.empty()) {
        std::cerr << "sweep: --dt is required when --alpha 1\n";
        return 1;
      }
      const auto rows = sweep(spec);
      write_csv(rows, s_out);
      if (!s_markdown.empty()) {
        std::ofstream md(s_markdown);
        md << markdown_table(rows, spec.strategies);
      }
      std::cout << rows.size() << " rows -> " << s_out << "\n";
      for (const auto& r : rows) {
        if (!r.converged) {
          std::cout << "note: unconverged point " << to_csv_row(r) << "\n";
        }
      }
      return 0;
    }

    if (*cmp_cmd) {
      const auto rows = read_csv(c_csv);
      const auto cells = load_reference_tables(c_ref, c_table);
      if (cells.empty()) {
        std::cerr << "no reference cells for table " << c_table << "\n";
        return 1;
      }
      std::optional<ComparePolicy> pol;
      if (c_tol_abs >= 0.0 || c_tol_pct >= 0.0) {
        pol = ComparePolicy{c_tol_abs >= 0.0 ? c_tol_abs : 0.0,
                            c_tol_pct >= 0.0 ? c_tol_pct : 0.0};
      }
      const CompareReport report = compare(rows, cells, pol);
      for (const auto& c : report.cells) {
        if (!c.comparable) {
          std::printf("INCOMPARABLE %s %s h=%g re=%g rho=%g mu=%g dt=%g %s\n",
                      c.cell.table.c_str(), c.cell.elements.c_str(), c.cell.h, c.cell.re,
                      c.cell.rho, c.cell.mu, c.cell.dt, c.cell.precond.c_str());
          continue;
        }
        std::printf("%s %s %s h=%g re=%g rho=%g mu=%g dt=%g avg=%.2f ref=%d dev=%+.2f\n",
                    c.pass ? "PASS" : "FAIL", c.cell.table.c_str(), c.cell.precond.c_str(),
                    c.cell.h, c.cell.re, c.cell.rho, c.cell.mu, c.cell.dt, c.avg,
                    c.cell.iters, c.deviation);
      }
      std::printf("%s\n", report.summary().c_str());
      return report.all_pass() ? 0 : 3;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
