#pragma once

#include <memory>
#include <string>

#include "oseen2p/system.hpp"

namespace oseen2p {

/// Schur-complement inverse approximation strategies.
///   pcd       A_p^-1 F_p M_p^-1 with unweighted A_p, M_p
///   cc        mu M_p^-1 + (1/dt) A_p^-1 (phase-1 viscosity; Stokes limit)
///   gcc       Mp[1/(2mu)]^-1 + (1/dt) Ap[1/rho]^-1
///   pcd-visc  (Ap[mu])^-1 F_p (Mp[1/(2mu)])^-1
///   pcd2-rho  Mp[1/(2mu)]^-1 + Ap[1/rho]^-1 (Np[rho] + (a/dt) Mp[rho]) Mp[rho]^-1
///   pcd2      Mp[1/(2mu)]^-1 + Ap[1/rho]^-1 (Np[1] + (a/dt) Mp[1]) Mp[1]^-1
///   lsc       (B T^-1 B^T)^-1 (B T^-1 F T^-1 B^T) (B T^-1 B^T)^-1, T = diag(M)
///   lsc-d     as lsc with D_ii = max_j |F_ij| (or diag(F) behind a toggle)
///   lsc2      as lsc with T = diag(M^(mu))
///   simple    (B diag(F)^-1 B^T + C)^-1
///   exact     (B F^-1 B^T + C)^-1 by dense factorization (small grids)
enum class SchurKind { Pcd, Cc, Gcc, PcdVisc, Pcd2Rho, Pcd2, Lsc, LscD, Lsc2, Simple, ExactOracle };

std::string to_string(SchurKind kind);
SchurKind parse_schur_kind(const std::string& key);

struct SchurOptions {
  /// Project the constant-pressure mode around Laplacian-type solves and
  /// from every strategy output; when false the mode is pinned instead.
  bool project_pressure = true;
  /// Keep the deformation-tensor factor two in the pcd2 mass weight; the
  /// toggle drops it for the single-phase reduction identity.
  bool pcd2_factor_two = true;
  /// Use diag(F) for the lsc-d scaling instead of the row-max.
  bool lscd_use_diag = false;
  /// Replace exact pressure mass solves by Chebyshev semi-iteration.
  bool chebyshev_mass = false;
  int chebyshev_steps = 3;
};

/// Exact solve of a Laplacian-type SPSD matrix with a known one-dimensional
/// nullspace: the null component is pinned out of the factorization, the
/// right-hand side and result are mean-projected when projection is on.
class NullspaceSolver {
 public:
  NullspaceSolver() = default;
  NullspaceSolver(const SpMat& A, Vec nullvec, bool project);
  Vec solve(const Vec& b) const;
  Index dim() const { return e_.size(); }

 private:
  std::shared_ptr<SparseFactorization> lu_;
  Vec e_;
  double e_sq_ = 1.0;
  Index pin_ = 0;
  bool project_ = true;
};

/// A fixed linear map v -> \hat S^{-1} v built from one SaddleSystem and its
/// PressureOperators; immutable and safe for concurrent application.
class SchurStrategy {
 public:
  static SchurStrategy build(SchurKind kind, std::shared_ptr<const SaddleSystem> sys,
                             const PressureOperators& ops, const MixedDiscretization& disc,
                             const PhaseGrid& grid, const SchurOptions& opts = {});

  Vec apply(const Vec& v) const;
  SchurKind kind() const { return kind_; }

 private:
  SchurKind kind_ = SchurKind::Pcd2;
  std::function<Vec(const Vec&)> apply_;
  Vec e_;
  double e_sq_ = 1.0;
  bool project_ = true;
};

/// Block triangular right preconditioner P = [Fhat, B^T; 0, -Shat]:
/// z_p = -Shat^-1 r_p, then z_u = Fhat^-1 (r_u - B^T z_p). Fhat is the exact
/// sparse factorization of F.
class BlockTriangularPreconditioner {
 public:
  BlockTriangularPreconditioner(std::shared_ptr<const SaddleSystem> sys, SchurStrategy schur);

  Vec apply(const Vec& r) const;
  LinearOperator op() const;
  const SparseFactorization& F_solver() const { return *Fhat_; }

 private:
  std::shared_ptr<const SaddleSystem> sys_;
  std::shared_ptr<SparseFactorization> Fhat_;
  SchurStrategy schur_;
};

/// Frobenius norm of the discrete commutator
///   (Mp^-1 B)(M^-1 F) - (Mp^-1 Fp)(Mp^-1 B)
/// built with unweighted mass matrices and grad-grad viscous forms;
/// constant-coefficient diagnostic for small grids.
double commutator_norm(const MixedDiscretization& disc, const PhaseGrid& grid,
                       const Vec& wind);

} // namespace oseen2p
