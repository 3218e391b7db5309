#include "oseen2p/krylov.hpp"

#include <cmath>
#include <stdexcept>

namespace oseen2p {

std::pair<Vec, GmresStats> gmres(const LinearOperator& A, const LinearOperator& M_right,
                                 const Vec& b, const Vec& x0, const GmresOptions& opts) {
  const Index n = b.size();
  if (A.dim != n || M_right.dim != n || x0.size() != n) {
    throw std::invalid_argument("gmres: operator/vector dimensions disagree");
  }
  GmresStats stats;

  Vec r0 = b - A.apply(x0);
  const double beta = r0.norm();
  const double ref = opts.ref_norm > 0.0 ? opts.ref_norm : b.norm();
  const double tol = opts.rel_tol * ref;
  stats.residual_history.push_back(beta);
  if (beta <= tol) {
    stats.converged = true;
    return {x0, stats};
  }

  const int max_iter = std::min<Index>(opts.max_iter, n);
  std::vector<Vec> V;
  V.reserve(max_iter + 1);
  V.push_back(r0 / beta);

  // H stored column-wise, column j holds H(0..j+1, j)
  std::vector<std::vector<double>> H;
  std::vector<double> cs, sn;
  std::vector<double> g{beta};

  auto solve_iterate = [&](int m) -> Vec {
    // back substitution on the rotated Hessenberg (upper triangular in H)
    Vec y(m);
    for (int i = m - 1; i >= 0; --i) {
      double s = g[i];
      for (int k = i + 1; k < m; ++k) s -= H[k][i] * y[k];
      y[i] = s / H[i][i];
    }
    Vec w = Vec::Zero(n);
    for (int i = 0; i < m; ++i) w += y[i] * V[i];
    return x0 + M_right.apply(w);
  };

  int m = 0;
  for (int j = 0; j < max_iter; ++j) {
    Vec w = A.apply(M_right.apply(V[j]));
    const double norm_before = w.norm();

    std::vector<double> h(j + 2, 0.0);
    for (int i = 0; i <= j; ++i) {
      h[i] = V[i].dot(w);
      w -= h[i] * V[i];
    }
    // measured loss of orthogonality triggers one extra MGS pass
    double loss = 0.0;
    const double wnorm = w.norm();
    for (int i = 0; i <= j; ++i) loss = std::max(loss, std::abs(V[i].dot(w)));
    if (wnorm > 0.0 && loss > 1e-8 * wnorm) {
      for (int i = 0; i <= j; ++i) {
        const double c = V[i].dot(w);
        h[i] += c;
        w -= c * V[i];
      }
    }
    h[j + 1] = w.norm();

    const bool broke_down = h[j + 1] <= 1e-14 * std::max(norm_before, 1.0);
    if (!broke_down) V.push_back(w / h[j + 1]);

    // apply accumulated Givens rotations, then form the new one
    for (int i = 0; i < j; ++i) {
      const double t = cs[i] * h[i] + sn[i] * h[i + 1];
      h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
      h[i] = t;
    }
    const double denom = std::hypot(h[j], h[j + 1]);
    const double c = denom > 0.0 ? h[j] / denom : 1.0;
    const double s = denom > 0.0 ? h[j + 1] / denom : 0.0;
    cs.push_back(c);
    sn.push_back(s);
    h[j] = denom;
    h[j + 1] = 0.0;
    g.push_back(-s * g[j]);
    g[j] = c * g[j];
    H.push_back(std::move(h));

    m = j + 1;
    stats.iterations = m;
    const double res = std::abs(g[m]);
    stats.residual_history.push_back(res);
    if (opts.collect_iterates) stats.iterates.push_back(solve_iterate(m));

    if (res <= tol) {
      stats.converged = true;
      break;
    }
    if (broke_down) {
      stats.breakdown = true;
      break;
    }
  }

  Vec x = solve_iterate(m);
  return {x, stats};
}

SparseFactorization::SparseFactorization(const SpMat& A)
    : lu_(std::make_shared<Eigen::SparseLU<SpMat>>()), dim_(A.rows()) {
  if (A.rows() != A.cols()) throw std::invalid_argument("factorization needs a square matrix");
  SpMat Ac = A;
  Ac.makeCompressed();
  lu_->compute(Ac);
  if (lu_->info() != Eigen::Success) {
    throw std::runtime_error("sparse factorization failed (matrix singular?)");
  }
}

Vec SparseFactorization::solve(const Vec& b) const {
  if (b.size() != dim_) throw std::invalid_argument("factorization: rhs dimension mismatch");
  return lu_->solve(b);
}

Vec chebyshev_mass_solve(const SpMat& M, const Vec& b, int steps, double lo, double hi) {
  const Vec dinv = M.diagonal().cwiseInverse();
  Vec x = dinv.cwiseProduct(b);
  if (steps <= 0) return x;

  const double theta = 0.5 * (hi + lo);
  const double delta = 0.5 * (hi - lo);
  const double sigma1 = theta / delta;

  Vec r = dinv.cwiseProduct(b - M * x);
  Vec d = r / theta;
  double rho = 1.0 / sigma1;
  for (int k = 0; k < steps; ++k) {
    x += d;
    r -= dinv.cwiseProduct(M * d);
    const double rho_next = 1.0 / (2.0 * sigma1 - rho);
    d = (rho_next * rho) * d + (2.0 * rho_next / delta) * r;
    rho = rho_next;
  }
  return x;
}

} // namespace oseen2p
