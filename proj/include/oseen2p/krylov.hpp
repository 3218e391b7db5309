#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "oseen2p/types.hpp"

namespace oseen2p {

/// A dimension-preserving linear map (matrix action or composite
/// preconditioner action). Anything captured by `apply` must outlive the
/// operator.
struct LinearOperator {
  Index dim = 0;
  std::function<Vec(const Vec&)> apply;

  static LinearOperator identity(Index n) {
    return {n, [](const Vec& v) { return v; }};
  }
  /// Wraps a matrix action; the matrix must outlive the operator.
  static LinearOperator from_matrix(const SpMat& A) {
    return {A.rows(), [&A](const Vec& v) -> Vec { return A * v; }};
  }
};

struct GmresOptions {
  double rel_tol = 1e-6;
  /// Reference norm for the stopping test ||r_l|| <= rel_tol * ref_norm
  /// (the nonlinear residual norm in the Picard loop). Non-positive values
  /// fall back to ||b||.
  double ref_norm = -1.0;
  int max_iter = 400;
  /// Store x_i for every iteration (test instrumentation).
  bool collect_iterates = false;
};

struct GmresStats {
  int iterations = 0; // Arnoldi steps = preconditioner applications
  std::vector<double> residual_history; // true residual norms, entry 0 at x0
  bool converged = false;
  bool breakdown = false; // zero Arnoldi norm, reported distinctly
  std::vector<Vec> iterates;
};

/// Right-preconditioned full GMRES (no restart) with modified Gram-Schmidt
/// and one reorthogonalisation pass whenever the measured loss of
/// orthogonality exceeds 1e-8. Residuals are non-preconditioned.
std::pair<Vec, GmresStats> gmres(const LinearOperator& A, const LinearOperator& M_right,
                                 const Vec& b, const Vec& x0,
                                 const GmresOptions& opts = {});

/// Exact sparse solver contract (direct factorization).
class SparseFactorization {
 public:
  explicit SparseFactorization(const SpMat& A);
  Vec solve(const Vec& b) const;
  Index dim() const { return dim_; }

 private:
  std::shared_ptr<Eigen::SparseLU<SpMat>> lu_;
  Index dim_ = 0;
};

/// Chebyshev semi-iteration for a mass matrix, Jacobi-preconditioned with
/// spectral bounds [lo, hi] for diag(M)^-1 M (Wathen-type bounds for
/// bilinear elements in 2D). steps = 0 returns diag(M)^-1 b.
Vec chebyshev_mass_solve(const SpMat& M, const Vec& b, int steps = 3,
                         double lo = 0.25, double hi = 2.25);

} // namespace oseen2p
