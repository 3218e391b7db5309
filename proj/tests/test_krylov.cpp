#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oseen2p/assembly.hpp"
#include "oseen2p/krylov.hpp"

using namespace oseen2p;

namespace {

SpMat random_spd(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> dist;
  Mat A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = dist(rng);
  Mat S = 0.5 * (A + A.transpose()) + n * Mat::Identity(n, n);
  return S.sparseView();
}

Vec random_vec(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> dist;
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

// dense Arnoldi/GMRES oracle: residual norms of unpreconditioned GMRES
std::vector<double> dense_gmres_residuals(const Mat& A, const Vec& b, int steps) {
  const int n = static_cast<int>(A.rows());
  std::vector<double> out;
  const double beta = b.norm();
  out.push_back(beta);
  Mat V(n, steps + 1);
  V.col(0) = b / beta;
  Mat H = Mat::Zero(steps + 1, steps);
  for (int j = 0; j < steps; ++j) {
    Vec w = A * V.col(j);
    for (int i = 0; i <= j; ++i) {
      H(i, j) = V.col(i).dot(w);
      w -= H(i, j) * V.col(i);
    }
    // full reorthogonalisation keeps the oracle trustworthy
    for (int i = 0; i <= j; ++i) {
      const double c = V.col(i).dot(w);
      H(i, j) += c;
      w -= c * V.col(i);
    }
    H(j + 1, j) = w.norm();
    V.col(j + 1) = w / H(j + 1, j);
    // solve the small least-squares problem from scratch
    Mat Hj = H.topLeftCorner(j + 2, j + 1);
    Vec g = Vec::Zero(j + 2);
    g[0] = beta;
    Vec y = Hj.colPivHouseholderQr().solve(g);
    out.push_back((g - Hj * y).norm());
  }
  return out;
}

} // namespace

TEST_CASE("gmres: identity converges immediately") {
  const int n = 17;
  const Vec b = random_vec(n, 3);
  GmresOptions opts;
  opts.rel_tol = 1e-12;
  auto [x, stats] = gmres(LinearOperator::identity(n), LinearOperator::identity(n), b,
                          Vec(Vec::Zero(n)), opts);
  CHECK(stats.converged);
  CHECK(stats.iterations == 1);
  CHECK((x - b).norm() < 1e-12 * b.norm());

  // zero right-hand side: nothing to do
  auto [x0, s0] = gmres(LinearOperator::identity(n), LinearOperator::identity(n),
                        Vec(Vec::Zero(n)), Vec(Vec::Zero(n)), opts);
  CHECK(s0.converged);
  CHECK(s0.iterations == 0);
}

TEST_CASE("gmres matches a dense Arnoldi oracle on a random SPD system") {
  const int n = 50;
  const SpMat A = random_spd(n, 11);
  const Vec b = random_vec(n, 12);

  GmresOptions opts;
  opts.rel_tol = 1e-9;
  opts.max_iter = 40;
  auto [x, stats] = gmres(LinearOperator::from_matrix(A), LinearOperator::identity(n), b,
                          Vec(Vec::Zero(n)), opts);

  const auto oracle = dense_gmres_residuals(Mat(A), b, stats.iterations);
  REQUIRE(stats.residual_history.size() <= oracle.size());
  for (size_t i = 0; i < stats.residual_history.size(); ++i) {
    CHECK(stats.residual_history[i] ==
          doctest::Approx(oracle[i]).epsilon(1e-10).scale(b.norm()));
  }
}

TEST_CASE("gmres: monotone history equal to true residuals") {
  const int n = 60;
  const SpMat A = random_spd(n, 21);
  const SpMat M = random_spd(n, 22); // SPD preconditioner
  SparseFactorization Minv(M);
  const Vec b = random_vec(n, 23);
  const Vec x0 = random_vec(n, 24);

  GmresOptions opts;
  opts.rel_tol = 1e-10;
  opts.max_iter = 60;
  opts.collect_iterates = true;
  LinearOperator Mop{n, [&](const Vec& v) { return Minv.solve(v); }};
  auto [x, stats] = gmres(LinearOperator::from_matrix(A), Mop, b, x0, opts);
  CHECK(stats.converged);

  for (size_t i = 1; i < stats.residual_history.size(); ++i) {
    CHECK(stats.residual_history[i] <=
          stats.residual_history[i - 1] + 1e-14 * b.norm());
  }
  REQUIRE(stats.iterates.size() == static_cast<size_t>(stats.iterations));
  for (int i = 0; i < stats.iterations; ++i) {
    const double true_res = (b - A * stats.iterates[i]).norm();
    CHECK(true_res == doctest::Approx(stats.residual_history[i + 1])
                          .epsilon(1e-10)
                          .scale(b.norm()));
  }
  CHECK((x - stats.iterates.back()).norm() < 1e-12 * x.norm());
}

TEST_CASE("gmres honours the reference-norm stopping rule") {
  const int n = 40;
  const SpMat A = random_spd(n, 31);
  const Vec b = random_vec(n, 32);
  GmresOptions opts;
  opts.rel_tol = 1e-6;
  opts.ref_norm = 10.0 * b.norm(); // looser than ||b||
  auto [x, stats] = gmres(LinearOperator::from_matrix(A), LinearOperator::identity(n), b,
                          Vec(Vec::Zero(n)), opts);
  CHECK(stats.converged);
  CHECK((b - A * x).norm() <= opts.rel_tol * opts.ref_norm * (1 + 1e-12));

  GmresOptions tight = opts;
  tight.ref_norm = b.norm();
  auto [x2, s2] = gmres(LinearOperator::from_matrix(A), LinearOperator::identity(n), b,
                        Vec(Vec::Zero(n)), tight);
  CHECK(s2.iterations >= stats.iterations);
}

TEST_CASE("sparse factorization: exact solver contract") {
  // frozen 2x2 example
  SpMat D(2, 2);
  D.insert(0, 0) = 2.0;
  D.insert(1, 1) = 4.0;
  SparseFactorization lu(D);
  Vec b(2);
  b << 2.0, 8.0;
  const Vec x = lu.solve(b);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-15));

  // F block of the h = 1/8 Stokes cavity: relative residual <= 1e-12
  const auto grid = build_grid(16, 1.0, 1.0, 100.0);
  const auto disc = build_discretization(grid, ElementPair::Q2Q1);
  const SpMat A_full = assemble_velocity_diffusion(disc, grid);
  std::vector<int> keep;
  for (int node : disc.interior_nodes) keep.push_back(node);
  for (int node : disc.interior_nodes) keep.push_back(disc.n_vel_nodes + node);
  const SpMat F = select_submatrix(A_full, keep, keep);
  SparseFactorization Finv(F);
  const Vec bf = random_vec(F.rows(), 41);
  CHECK((F * Finv.solve(bf) - bf).norm() <= 1e-12 * bf.norm());

  // velocity mass matrix: agree with a conjugate-gradient oracle
  const SpMat M = assemble_velocity_mass(disc, grid, Weight::One);
  SparseFactorization Mlu(M);
  const Vec bm = random_vec(M.rows(), 42);
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg(M);
  cg.setTolerance(1e-14);
  const Vec xcg = cg.solve(bm);
  CHECK((Mlu.solve(bm) - xcg).norm() < 1e-10 * xcg.norm());

  // singular matrix reports a factorization error
  SpMat S(2, 2);
  S.insert(0, 0) = 1.0;
  S.insert(0, 1) = 1.0;
  S.insert(1, 0) = 1.0;
  S.insert(1, 1) = 1.0;
  CHECK_THROWS_AS(SparseFactorization{S}, std::runtime_error);
}

TEST_CASE("chebyshev mass solve") {
  // diagonal matrix: the scaled system is the identity, one step is exact
  SpMat D(4, 4);
  for (int i = 0; i < 4; ++i) D.insert(i, i) = 1.0 + i;
  const Vec b = random_vec(4, 51);
  const Vec exact = D.diagonal().cwiseInverse().cwiseProduct(b);
  CHECK((chebyshev_mass_solve(D, b, 1) - exact).norm() < 1e-14 * exact.norm());
  // steps = 0 returns the Jacobi starting value
  CHECK((chebyshev_mass_solve(D, b, 0) - exact).norm() == 0.0);

  // Q1 pressure mass, h = 1/8: three steps contract the starting error by at
  // least the Chebyshev factor for [1/4, 9/4]
  const auto grid = build_grid(16, 1.0, 1.0, 1.0);
  const auto disc = build_discretization(grid, ElementPair::Q2Q1);
  const SpMat M = assemble_pressure_mass(disc, grid, Weight::One);
  SparseFactorization Mlu(M);
  const Vec bm = random_vec(M.rows(), 52);
  const Vec xstar = Mlu.solve(bm);
  const Vec d = M.diagonal();

  auto dnorm = [&](const Vec& v) { return std::sqrt(v.dot(d.cwiseProduct(v))); };
  const Vec x0 = d.cwiseInverse().cwiseProduct(bm);
  const Vec x3 = chebyshev_mass_solve(M, bm, 3);
  // 1/T_3(theta/delta) with theta/delta = 1.25
  const double t3 = 4 * std::pow(1.25, 3) - 3 * 1.25;
  CHECK(dnorm(x3 - xstar) <= (1.0 / t3) * dnorm(x0 - xstar) * (1 + 1e-10));

  // convergence with increasing steps (contraction factor 1/2 per step)
  const Vec x30 = chebyshev_mass_solve(M, bm, 30);
  CHECK((x30 - xstar).norm() < 2.0 * std::pow(0.5, 30) * (x0 - xstar).norm());
}
