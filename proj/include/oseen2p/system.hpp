#pragma once

#include <vector>

#include "oseen2p/assembly.hpp"
#include "oseen2p/grid.hpp"
#include "oseen2p/krylov.hpp"

namespace oseen2p {

/// Dirichlet-eliminated saddle-point system
///   [ F   B^T ] [u]   [rhs_u]
///   [ B  -C   ] [p] = [rhs_p],  F = (alpha/dt) M_rho + N_rho + A_mu,
/// over interior velocity DOFs (x-block, then y-block) and all pressure DOFs.
struct SaddleSystem {
  double alpha = 0.0;
  double dt = 1.0;
  SpMat A_mu, N_rho, M_rho; // reduced velocity blocks (N is empty for zero wind)
  SpMat F;
  SpMat B; // n_pre x n_int_vel
  SpMat C; // n_pre x n_pre, no stored entries for stable pairs
  Vec rhs_u, rhs_p;

  Index n_vel() const { return F.rows(); }
  Index n_pre() const { return B.rows(); }
  Index dim() const { return n_vel() + n_pre(); }

  Vec apply(const Vec& x) const;
  LinearOperator op() const;
  /// residual K x - rhs for the stacked iterate (u_int; p)
  Vec residual(const Vec& x) const;
};

/// Caches the wind-independent pieces (viscous/mass/divergence blocks,
/// Dirichlet data) and produces a SaddleSystem for each Picard wind.
class CavityAssembler {
 public:
  CavityAssembler(const MixedDiscretization& disc, const PhaseGrid& grid, double alpha,
                  double dt, int quad_order = 0, bool use_supg = false);

  /// wind is a full velocity coefficient vector (2Nv), or empty for zero wind.
  SaddleSystem build(const Vec& wind) const;

  const std::vector<int>& vel_keep() const { return vel_keep_; } // full-space DOF ids
  const Vec& boundary_values() const { return u_bc_; }

  Vec reduce_velocity(const Vec& full) const;
  /// Scatter interior values into a full vector carrying the Dirichlet data.
  Vec expand_velocity(const Vec& interior) const;

 private:
  const MixedDiscretization* disc_;
  const PhaseGrid* grid_;
  double alpha_, dt_;
  int quad_order_;
  bool use_supg_;
  SpMat A_full_, M_full_, B_full_, C_;
  std::vector<int> vel_keep_, pre_all_;
  Vec u_bc_;
  Vec e_p_;
  double e_p_sq_ = 1.0;
};

/// One-shot convenience wrapper around CavityAssembler.
SaddleSystem build_saddle_system(const MixedDiscretization& disc, const PhaseGrid& grid,
                                 const Vec& wind, double alpha, double dt,
                                 int quad_order = 0, bool use_supg = false);

} // namespace oseen2p
