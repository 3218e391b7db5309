#include "oseen2p/driver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace oseen2p {

int rounded_average(double avg) { return static_cast<int>(std::floor(avg + 0.5)); }

CavitySolver::CavitySolver(const CavityProblem& problem)
    : prob_(problem),
      grid_(build_grid(problem.n_per_side, problem.rho_ratio, problem.mu_ratio,
                       problem.reynolds)),
      disc_(build_discretization(grid_, problem.pair)),
      assembler_(disc_, grid_, problem.alpha, problem.dt, problem.quad_order,
                 problem.use_supg) {
  if (grid_.rho_ratio > grid_.mu_ratio) {
    std::fprintf(stderr,
                 "warning: rho_ratio > mu_ratio; the second phase carries the "
                 "larger Reynolds number\n");
  }
  static_ops_ = assemble_pressure_operators(disc_, grid_, Vec(), prob_.quad_order);
}

CavityState CavitySolver::rest_state() const {
  CavityState s;
  s.u_full = disc_.boundary_velocity_values();
  s.p = Vec::Zero(disc_.n_pre_dofs);
  return s;
}

Vec CavitySolver::nonlinear_residual(const CavityState& state) const {
  const SaddleSystem sys = assembler_.build(state.u_full);
  Vec x(sys.dim());
  x.head(sys.n_vel()) = assembler_.reduce_velocity(state.u_full);
  x.tail(sys.n_pre()) = state.p;
  return sys.residual(x);
}

CavitySolver::Step CavitySolver::correction(const CavityState& state, const Vec& wind,
                                            SchurKind kind,
                                            std::shared_ptr<const SaddleSystem> sys) {
  if (!sys) sys = std::make_shared<const SaddleSystem>(assembler_.build(wind));

  PressureOperators ops = static_ops_;
  ops.Np_one = assemble_convection(disc_, grid_, wind, Weight::One, OperatorSpace::Pressure,
                                   prob_.quad_order);
  ops.Np_rho = assemble_convection(disc_, grid_, wind, Weight::Rho, OperatorSpace::Pressure,
                                   prob_.quad_order);

  SchurStrategy schur = SchurStrategy::build(kind, sys, ops, disc_, grid_, prob_.schur_opts);
  BlockTriangularPreconditioner precon(sys, std::move(schur));

  Vec x(sys->dim());
  x.head(sys->n_vel()) = assembler_.reduce_velocity(state.u_full);
  x.tail(sys->n_pre()) = state.p;
  const Vec s = sys->residual(x);
  const double snorm = s.norm();

  GmresOptions opts;
  opts.rel_tol = prob_.linear_tol;
  opts.ref_norm = snorm;
  opts.max_iter = prob_.gmres_max_iter;
  auto [delta, stats] = gmres(sys->op(), precon.op(), Vec(-s), Vec(Vec::Zero(sys->dim())), opts);

  Step step;
  step.residual_norm_before = snorm;
  step.stats = std::move(stats);
  step.state.u_full =
      assembler_.expand_velocity(Vec(x.head(sys->n_vel()) + delta.head(sys->n_vel())));
  step.state.p = x.tail(sys->n_pre()) + delta.tail(sys->n_pre());
  return step;
}

CavitySolver::Step CavitySolver::solve_stokes_bootstrap() {
  // Stokes problem (wind = 0) preconditioned with generalised Cahouet-Chabard
  return correction(rest_state(), Vec(), SchurKind::Gcc);
}

CavitySolver::Step CavitySolver::picard_step(const CavityState& state) {
  return correction(state, state.u_full, prob_.schur);
}

SolveReport CavitySolver::run() {
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport report;

  Step boot = solve_stokes_bootstrap();
  report.stokes_gmres = boot.stats.iterations;
  if (!boot.stats.converged) {
    report.failure = boot.stats.breakdown ? "gmres breakdown in the Stokes bootstrap"
                                          : "gmres did not converge in the Stokes bootstrap";
    return report;
  }
  CavityState state = std::move(boot.state);

  double s0 = -1.0;
  for (int k = 0; k <= prob_.picard_max; ++k) {
    auto sys = std::make_shared<const SaddleSystem>(assembler_.build(state.u_full));
    Vec x(sys->dim());
    x.head(sys->n_vel()) = assembler_.reduce_velocity(state.u_full);
    x.tail(sys->n_pre()) = state.p;
    const double snorm = sys->residual(x).norm();
    report.nonlinear_residuals.push_back(snorm);
    if (s0 < 0.0) s0 = snorm;
    report.final_nl_rel_residual = s0 > 0.0 ? snorm / s0 : 0.0;
    if (snorm <= prob_.picard_rel_tol * s0) {
      report.converged = true;
      break;
    }
    if (k == prob_.picard_max) {
      report.failure = "picard_max reached without the requested residual reduction";
      break;
    }

    Step step = correction(state, state.u_full, prob_.schur, sys);
    report.gmres_counts.push_back(step.stats.iterations);
    if (!step.stats.converged) {
      report.failure = step.stats.breakdown ? "gmres breakdown in a Picard step"
                                            : "gmres did not converge in a Picard step";
      break;
    }
    state = std::move(step.state);
    ++report.picard_steps;
  }

  // report the solution pressure up to the projected constant mode
  const Vec e = disc_.pressure_nullvector();
  state.p -= (e.dot(state.p) / e.squaredNorm()) * e;
  last_state_ = std::move(state);

  finalize_statistics(report);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

void finalize_statistics(SolveReport& report) {
  report.avg_gmres = 0.0;
  report.max_gmres = 0;
  if (report.gmres_counts.empty()) return;
  long sum = 0;
  for (int c : report.gmres_counts) {
    sum += c;
    report.max_gmres = std::max(report.max_gmres, c);
  }
  report.avg_gmres = static_cast<double>(sum) / report.gmres_counts.size();
}

SolveReport run_cavity(const CavityProblem& problem) {
  if (problem.alpha != 0.0) {
    throw std::invalid_argument("run_cavity expects a steady problem (alpha = 0)");
  }
  return CavitySolver(problem).run();
}

SolveReport run_single_timestep(const CavityProblem& problem) {
  if (problem.alpha != 1.0) {
    throw std::invalid_argument("run_single_timestep expects alpha = 1");
  }
  return CavitySolver(problem).run();
}

} // namespace oseen2p
