#pragma once

#include <string>
#include <vector>

#include "oseen2p/precond.hpp"

namespace oseen2p {

/// Lid-driven-cavity configuration. h = 2 / n_per_side.
struct CavityProblem {
  ElementPair pair = ElementPair::Q2Q1;
  int n_per_side = 32;
  double reynolds = 100.0;
  double rho_ratio = 1.0;
  double mu_ratio = 1.0;
  double alpha = 0.0; // 0 steady, 1 single backward-Euler step
  double dt = 1.0;    // used iff alpha = 1
  double linear_tol = 1e-6;
  double picard_rel_tol = 1e-5;
  int picard_max = 50;
  int gmres_max_iter = 400;
  SchurKind schur = SchurKind::Pcd2;
  SchurOptions schur_opts;
  int quad_order = 0;
  bool use_supg = false;
};

/// Per-run GMRES statistics. gmres_counts and the averages cover the Picard
/// corrections only; the Stokes bootstrap count is reported separately.
struct SolveReport {
  bool converged = false;
  int picard_steps = 0;
  int stokes_gmres = 0;
  std::vector<int> gmres_counts;
  double avg_gmres = 0.0; // exact mean; rounded half-up for table emission
  int max_gmres = 0;
  std::vector<double> nonlinear_residuals;
  double final_nl_rel_residual = 0.0;
  double wall_time_s = 0.0;
  std::string failure;
};

/// Half-up rounding used when printing iteration averages.
int rounded_average(double avg);

/// Velocity iterate as a full coefficient vector (Dirichlet values included)
/// plus the pressure vector.
struct CavityState {
  Vec u_full;
  Vec p;
};

class CavitySolver {
 public:
  explicit CavitySolver(const CavityProblem& problem);

  const PhaseGrid& grid() const { return grid_; }
  const MixedDiscretization& disc() const { return disc_; }
  const CavityProblem& problem() const { return prob_; }

  struct Step {
    CavityState state;
    GmresStats stats;
    double residual_norm_before = 0.0; // ||s|| entering the solve
  };

  /// Stokes solve (wind = 0) from rest with the generalised Cahouet-Chabard
  /// preconditioner; provides the Picard initial iterate.
  Step solve_stokes_bootstrap();
  /// One Picard correction: wind = state velocity, K d = -s, zero guess.
  Step picard_step(const CavityState& state);
  /// Full protocol: bootstrap, then Picard until the nonlinear residual
  /// drops by picard_rel_tol.
  SolveReport run();

  Vec nonlinear_residual(const CavityState& state) const;
  CavityState rest_state() const;
  /// State after the most recent run().
  const CavityState& last_state() const { return last_state_; }

 private:
  Step correction(const CavityState& state, const Vec& wind, SchurKind kind,
                  std::shared_ptr<const SaddleSystem> sys = nullptr);

  CavityProblem prob_;
  PhaseGrid grid_;
  MixedDiscretization disc_;
  CavityAssembler assembler_;
  PressureOperators static_ops_; // wind-independent pieces; Np filled per step
  CavityState last_state_;
};

/// Fills avg_gmres/max_gmres from gmres_counts (bootstrap excluded by
/// construction: it is never part of gmres_counts).
void finalize_statistics(SolveReport& report);

SolveReport run_cavity(const CavityProblem& problem);
SolveReport run_single_timestep(const CavityProblem& problem);

} // namespace oseen2p
