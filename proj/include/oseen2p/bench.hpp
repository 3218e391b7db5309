#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oseen2p/driver.hpp"

namespace oseen2p {

/// One CSV row of the stable schema
/// elements,h,re,rho_ratio,mu_ratio,alpha,dt,precond,picard_steps,avg_gmres,
/// max_gmres,final_nl_rel_residual,wall_time_s,converged
struct RunRecord {
  std::string elements;
  double h = 0.0;
  double re = 0.0;
  double rho_ratio = 1.0;
  double mu_ratio = 1.0;
  int alpha = 0;
  double dt = 0.0; // 0 when unused (steady)
  std::string precond;
  int picard_steps = 0;
  double avg_gmres = 0.0;
  int max_gmres = 0;
  double final_nl_rel_residual = 0.0;
  double wall_time_s = 0.0;
  bool converged = false;
};

std::string csv_header();
std::string to_csv_row(const RunRecord& r);
void write_csv(const std::vector<RunRecord>& rows, const std::string& path);
std::vector<RunRecord> read_csv(const std::string& path);

/// Builds the CavityProblem for one parameter point. Throws on invalid
/// combinations (h not matching an admissible grid, lsc on q1q1, ...).
CavityProblem make_problem(ElementPair pair, double h, double re, double rho_ratio,
                           double mu_ratio, int alpha, double dt, SchurKind schur,
                           const SchurOptions& opts = {}, double linear_tol = 1e-6,
                           int picard_max = 50);

RunRecord execute_run(const CavityProblem& problem);
/// As above, and also dump the full-space blocks at the final wind.
RunRecord execute_run(const CavityProblem& problem, const std::string& dump_dir);

/// Cross-product sweep; each point is an independent problem. Ratio cells
/// with rho_ratio > mu_ratio are skipped (the second phase would carry the
/// dominating Reynolds number). Failures become converged=0 rows and the
/// sweep continues. Rows come back sorted by key, independent of jobs.
struct SweepSpec {
  ElementPair pair = ElementPair::Q2Q1;
  std::vector<double> hs;
  std::vector<double> res;
  std::vector<double> rhos{1.0};
  std::vector<double> mus{1.0};
  std::vector<double> dts; // empty for steady
  int alpha = 0;
  std::vector<SchurKind> strategies;
  SchurOptions schur_opts;
  double linear_tol = 1e-6;
  int picard_max = 50;
  int jobs = 1;
};

std::vector<RunRecord> sweep(const SweepSpec& spec);

/// Paper-style Markdown table: one row per h (or dt), one column per
/// Reynolds number (or per rho_ratio for ratio grids), iteration averages
/// rounded half-up and joined "pcd2 / lsc2 / ...".
std::string markdown_table(const std::vector<RunRecord>& rows,
                           const std::vector<SchurKind>& strategies);

struct ReferenceCell {
  std::string table;
  std::string elements;
  int alpha = 0;
  double h = 0.0, re = 0.0, rho = 1.0, mu = 1.0, dt = 0.0;
  std::string precond;
  int iters = 0;
};

/// Reads the key=value reference file; table_id empty loads every table.
std::vector<ReferenceCell> load_reference_tables(const std::string& path,
                                                 const std::string& table_id = "");

/// Deviation passes when |avg - ref| <= max(abs_tol, pct_tol/100 * ref).
struct ComparePolicy {
  double abs_tol = 3.0;
  double pct_tol = 0.0;
};

/// Per-table, per-strategy default tolerance policy.
ComparePolicy default_policy(const std::string& table, const std::string& precond);

struct CellComparison {
  ReferenceCell cell;
  bool comparable = false;
  bool pass = false;
  double avg = 0.0;
  double deviation = 0.0;
};

struct CompareReport {
  std::vector<CellComparison> cells;
  int compared = 0, passed = 0, incomparable = 0;
  bool all_pass() const { return compared > 0 && passed == compared; }
  std::string summary() const;
};

CompareReport compare(const std::vector<RunRecord>& rows,
                      const std::vector<ReferenceCell>& reference,
                      std::optional<ComparePolicy> override_policy = std::nullopt);

/// MatrixMarket dump of the full-space blocks built with the given wind.
void dump_matrices(const MixedDiscretization& disc, const PhaseGrid& grid, const Vec& wind,
                   double alpha, double dt, const std::string& dir);

} // namespace oseen2p
