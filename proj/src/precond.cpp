#include "oseen2p/precond.hpp"

#include <cmath>
#include <stdexcept>

namespace oseen2p {

std::string to_string(SchurKind kind) {
  switch (kind) {
    case SchurKind::Pcd: return "pcd";
    case SchurKind::Cc: return "cc";
    case SchurKind::Gcc: return "gcc";
    case SchurKind::PcdVisc: return "pcd-visc";
    case SchurKind::Pcd2Rho: return "pcd2-rho";
    case SchurKind::Pcd2: return "pcd2";
    case SchurKind::Lsc: return "lsc";
    case SchurKind::LscD: return "lsc-d";
    case SchurKind::Lsc2: return "lsc2";
    case SchurKind::Simple: return "simple";
    case SchurKind::ExactOracle: return "exact";
  }
  return "?";
}

SchurKind parse_schur_kind(const std::string& key) {
  if (key == "pcd") return SchurKind::Pcd;
  if (key == "cc") return SchurKind::Cc;
  if (key == "gcc") return SchurKind::Gcc;
  if (key == "pcd-visc") return SchurKind::PcdVisc;
  if (key == "pcd2-rho") return SchurKind::Pcd2Rho;
  if (key == "pcd2") return SchurKind::Pcd2;
  if (key == "lsc") return SchurKind::Lsc;
  if (key == "lsc-d") return SchurKind::LscD;
  if (key == "lsc2") return SchurKind::Lsc2;
  if (key == "simple") return SchurKind::Simple;
  if (key == "exact") return SchurKind::ExactOracle;
  throw std::invalid_argument("unknown Schur strategy: " + key);
}

namespace {

std::vector<int> all_but(Index n, Index pin) {
  std::vector<int> keep;
  keep.reserve(n - 1);
  for (Index i = 0; i < n; ++i)
    if (i != pin) keep.push_back(static_cast<int>(i));
  return keep;
}

} // namespace

NullspaceSolver::NullspaceSolver(const SpMat& A, Vec nullvec, bool project)
    : e_(std::move(nullvec)), project_(project) {
  e_sq_ = e_.squaredNorm();
  pin_ = 0;
  while (pin_ < e_.size() && e_[pin_] == 0.0) ++pin_;
  if (pin_ == e_.size()) throw std::invalid_argument("nullspace vector is zero");
  const auto keep = all_but(A.rows(), pin_);
  lu_ = std::make_shared<SparseFactorization>(select_submatrix(A, keep, keep));
}

Vec NullspaceSolver::solve(const Vec& b) const {
  Vec rhs = b;
  if (project_) rhs -= (e_.dot(rhs) / e_sq_) * e_;

  Vec sub(rhs.size() - 1);
  sub.head(pin_) = rhs.head(pin_);
  sub.tail(rhs.size() - 1 - pin_) = rhs.tail(rhs.size() - 1 - pin_);
  const Vec zsub = lu_->solve(sub);

  Vec z(rhs.size());
  z.head(pin_) = zsub.head(pin_);
  z[pin_] = 0.0;
  z.tail(rhs.size() - 1 - pin_) = zsub.tail(rhs.size() - 1 - pin_);
  if (project_) z -= (e_.dot(z) / e_sq_) * e_;
  return z;
}

namespace {

// pressure mass solve: exact factorization or Chebyshev semi-iteration
struct MassSolve {
  std::shared_ptr<SparseFactorization> lu;
  std::shared_ptr<SpMat> M;
  bool cheb = false;
  int steps = 3;

  Vec solve(const Vec& b) const {
    return cheb ? chebyshev_mass_solve(*M, b, steps) : lu->solve(b);
  }
};

MassSolve make_mass_solver(const SpMat& M, const SchurOptions& opts) {
  MassSolve s;
  s.cheb = opts.chebyshev_mass;
  s.steps = opts.chebyshev_steps;
  if (s.cheb) {
    s.M = std::make_shared<SpMat>(M);
  } else {
    s.lu = std::make_shared<SparseFactorization>(M);
  }
  return s;
}

struct DenseNullspaceSolver {
  std::shared_ptr<Eigen::PartialPivLU<Mat>> lu;
  Vec e;
  double e_sq = 1.0;
  Index pin = 0;
  bool project = true;

  Vec solve(const Vec& b) const {
    Vec rhs = b;
    if (project) rhs -= (e.dot(rhs) / e_sq) * e;
    Vec sub(rhs.size() - 1);
    sub.head(pin) = rhs.head(pin);
    sub.tail(rhs.size() - 1 - pin) = rhs.tail(rhs.size() - 1 - pin);
    const Vec zsub = lu->solve(sub);
    Vec z(rhs.size());
    z.head(pin) = zsub.head(pin);
    z[pin] = 0.0;
    z.tail(rhs.size() - 1 - pin) = zsub.tail(rhs.size() - 1 - pin);
    if (project) z -= (e.dot(z) / e_sq) * e;
    return z;
  }
};

DenseNullspaceSolver make_dense_nullspace_solver(const Mat& S, const Vec& e, bool project) {
  DenseNullspaceSolver s;
  s.e = e;
  s.e_sq = e.squaredNorm();
  s.pin = 0;
  while (s.pin < e.size() && e[s.pin] == 0.0) ++s.pin;
  const Index n = S.rows();
  Mat sub(n - 1, n - 1);
  Index r = 0;
  for (Index i = 0; i < n; ++i) {
    if (i == s.pin) continue;
    Index c = 0;
    for (Index j = 0; j < n; ++j) {
      if (j == s.pin) continue;
      sub(r, c++) = S(i, j);
    }
    ++r;
  }
  s.lu = std::make_shared<Eigen::PartialPivLU<Mat>>(sub);
  s.project = project;
  return s;
}

Vec interior_velocity_diagonal(const SpMat& full, const MixedDiscretization& disc) {
  const Vec d = full.diagonal();
  const int ni = disc.n_interior_nodes();
  Vec r(2 * ni);
  for (int i = 0; i < ni; ++i) {
    r[i] = d[disc.interior_nodes[i]];
    r[ni + i] = d[disc.n_vel_nodes + disc.interior_nodes[i]];
  }
  return r;
}

Vec rowmax_abs(const SpMat& A) {
  Vec r = Vec::Zero(A.rows());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      r[it.row()] = std::max(r[it.row()], std::abs(it.value()));
  return r;
}

} // namespace

SchurStrategy SchurStrategy::build(SchurKind kind, std::shared_ptr<const SaddleSystem> sys,
                                   const PressureOperators& ops,
                                   const MixedDiscretization& disc, const PhaseGrid& grid,
                                   const SchurOptions& opts) {
  SchurStrategy s;
  s.kind_ = kind;
  s.e_ = disc.pressure_nullvector();
  s.e_sq_ = s.e_.squaredNorm();
  s.project_ = opts.project_pressure;

  const double alpha = sys->alpha;
  const double dt = sys->dt;
  const bool project = opts.project_pressure;

  switch (kind) {
    case SchurKind::Pcd: {
      auto mp = make_mass_solver(ops.Mp_one, opts);
      auto ap = std::make_shared<NullspaceSolver>(ops.Ap_one, s.e_, project);
      auto fp = std::make_shared<SpMat>(build_Fp(ops, alpha, dt, Weight::Rho, Weight::Rho));
      s.apply_ = [mp, ap, fp](const Vec& v) { return ap->solve(*fp * mp.solve(v)); };
      break;
    }
    case SchurKind::Cc: {
      auto mp = make_mass_solver(ops.Mp_one, opts);
      auto ap = std::make_shared<NullspaceSolver>(ops.Ap_one, s.e_, project);
      const double mu1 = 1.0 / grid.reynolds;
      if (alpha == 0.0) {
        s.apply_ = [mp, mu1](const Vec& v) -> Vec { return mu1 * mp.solve(v); };
      } else {
        const double idt = 1.0 / dt;
        s.apply_ = [mp, ap, mu1, idt](const Vec& v) -> Vec {
          return mu1 * mp.solve(v) + idt * ap->solve(v);
        };
      }
      break;
    }
    case SchurKind::Gcc: {
      auto mp = make_mass_solver(ops.Mp_inv2mu, opts);
      if (alpha == 0.0) {
        s.apply_ = [mp](const Vec& v) { return mp.solve(v); };
      } else {
        auto ap = std::make_shared<NullspaceSolver>(ops.Ap_invrho, s.e_, project);
        const double idt = 1.0 / dt;
        s.apply_ = [mp, ap, idt](const Vec& v) -> Vec {
          return mp.solve(v) + idt * ap->solve(v);
        };
      }
      break;
    }
    case SchurKind::PcdVisc: {
      auto mp = make_mass_solver(ops.Mp_inv2mu, opts);
      auto ap = std::make_shared<NullspaceSolver>(ops.Ap_mu, s.e_, project);
      auto fp = std::make_shared<SpMat>(build_Fp(ops, alpha, dt, Weight::Rho, Weight::Rho));
      s.apply_ = [mp, ap, fp](const Vec& v) { return ap->solve(*fp * mp.solve(v)); };
      break;
    }
    case SchurKind::Pcd2Rho:
    case SchurKind::Pcd2: {
      const bool unit = kind == SchurKind::Pcd2;
      auto mvisc = make_mass_solver(opts.pcd2_factor_two ? ops.Mp_inv2mu : ops.Mp_invmu, opts);
      auto ap = std::make_shared<NullspaceSolver>(ops.Ap_invrho, s.e_, project);
      auto mp = make_mass_solver(unit ? ops.Mp_one : ops.Mp_rho, opts);
      auto X = std::make_shared<SpMat>(unit ? ops.Np_one : ops.Np_rho);
      const SpMat& Mp = unit ? ops.Mp_one : ops.Mp_rho;
      if (alpha != 0.0) {
        if (X->nonZeros() > 0) {
          *X += SpMat((alpha / dt) * Mp);
        } else {
          *X = (alpha / dt) * Mp;
        }
      }
      s.apply_ = [mvisc, ap, mp, X](const Vec& v) -> Vec {
        Vec out = mvisc.solve(v);
        if (X->nonZeros() > 0) out += ap->solve(*X * mp.solve(v));
        return out;
      };
      break;
    }
    case SchurKind::Lsc:
    case SchurKind::LscD:
    case SchurKind::Lsc2: {
      if (sys->C.nonZeros() > 0) {
        throw std::invalid_argument(
            "lsc-type strategies need an unstabilised element pair (C = 0); "
            "q1q1 uses pressure-projection stabilisation");
      }
      Vec w;
      if (kind == SchurKind::Lsc) {
        w = interior_velocity_diagonal(assemble_velocity_mass(disc, grid, Weight::One), disc);
      } else if (kind == SchurKind::Lsc2) {
        w = interior_velocity_diagonal(assemble_velocity_mass(disc, grid, Weight::Mu), disc);
      } else {
        w = opts.lscd_use_diag ? Vec(sys->F.diagonal()) : rowmax_abs(sys->F);
      }
      if ((w.array() <= 0.0).any()) {
        throw std::runtime_error("lsc scaling diagonal has nonpositive entries");
      }
      auto winv = std::make_shared<Vec>(w.cwiseInverse());
      SpMat Bt = sys->B.transpose();
      SpMat BW = sys->B * winv->asDiagonal();
      SpMat L = BW * Bt;
      auto lsolve = std::make_shared<NullspaceSolver>(L, s.e_, project);
      s.apply_ = [sys, winv, lsolve](const Vec& v) -> Vec {
        Vec z = lsolve->solve(v);
        Vec t = sys->B.transpose() * z;
        t.array() *= winv->array();
        t = sys->F * t;
        t.array() *= winv->array();
        return lsolve->solve(sys->B * t);
      };
      break;
    }
    case SchurKind::Simple: {
      Vec dinv = sys->F.diagonal();
      if ((dinv.array() == 0.0).any()) {
        throw std::runtime_error("simple scaling: diag(F) has zero entries");
      }
      dinv = dinv.cwiseInverse();
      SpMat Bt = sys->B.transpose();
      SpMat BW = sys->B * dinv.asDiagonal();
      SpMat X = BW * Bt;
      if (sys->C.nonZeros() > 0) X += sys->C;
      auto xsolve = std::make_shared<NullspaceSolver>(X, s.e_, project);
      s.apply_ = [xsolve](const Vec& v) { return xsolve->solve(v); };
      break;
    }
    case SchurKind::ExactOracle: {
      if (sys->n_vel() > 8000) {
        throw std::invalid_argument("exact Schur oracle is dense; use grids with h >= 1/8");
      }
      Mat Fd(sys->F);
      Eigen::PartialPivLU<Mat> flu(Fd);
      Mat Bt(sys->B.transpose());
      Mat S = Mat(sys->B) * flu.solve(Bt);
      if (sys->C.nonZeros() > 0) S += Mat(sys->C);
      auto ssolve = std::make_shared<DenseNullspaceSolver>(
          make_dense_nullspace_solver(S, s.e_, project));
      s.apply_ = [ssolve](const Vec& v) { return ssolve->solve(v); };
      break;
    }
  }
  return s;
}

Vec SchurStrategy::apply(const Vec& v) const {
  Vec out = apply_(v);
  if (project_) out -= (e_.dot(out) / e_sq_) * e_;
  return out;
}

BlockTriangularPreconditioner::BlockTriangularPreconditioner(
    std::shared_ptr<const SaddleSystem> sys, SchurStrategy schur)
    : sys_(std::move(sys)), schur_(std::move(schur)) {
  Fhat_ = std::make_shared<SparseFactorization>(sys_->F);
}

Vec BlockTriangularPreconditioner::apply(const Vec& r) const {
  const Index nu = sys_->n_vel(), np = sys_->n_pre();
  Vec z(nu + np);
  const Vec zp = -schur_.apply(r.tail(np));
  z.tail(np) = zp;
  z.head(nu) = Fhat_->solve(r.head(nu) - sys_->B.transpose() * zp);
  return z;
}

LinearOperator BlockTriangularPreconditioner::op() const {
  return {sys_->dim(), [this](const Vec& r) { return apply(r); }};
}

double commutator_norm(const MixedDiscretization& disc, const PhaseGrid& grid,
                       const Vec& wind) {
  std::vector<int> keep;
  keep.reserve(2 * disc.interior_nodes.size());
  for (int node : disc.interior_nodes) keep.push_back(node);
  for (int node : disc.interior_nodes) keep.push_back(disc.n_vel_nodes + node);
  std::vector<int> pre_all(disc.n_pre_dofs);
  for (int i = 0; i < disc.n_pre_dofs; ++i) pre_all[i] = i;

  SpMat F_full = assemble_velocity_diffusion(disc, grid, false);
  SpMat N = assemble_convection(disc, grid, wind, Weight::Rho, OperatorSpace::Velocity);
  if (N.nonZeros() > 0) F_full += N;
  const SpMat F = select_submatrix(F_full, keep, keep);
  const SpMat B = select_submatrix(assemble_divergence(disc, grid), pre_all, keep);
  const SpMat M = select_submatrix(assemble_velocity_mass(disc, grid, Weight::One), keep, keep);
  const SpMat Mp = assemble_pressure_mass(disc, grid, Weight::One);
  SpMat Fp = assemble_pressure_laplacian(disc, grid, Weight::Mu);
  SpMat Np = assemble_convection(disc, grid, wind, Weight::Rho, OperatorSpace::Pressure);
  if (Np.nonZeros() > 0) Fp += Np;

  SparseFactorization Minv(M), Mpinv(Mp);
  double sq = 0.0;
  for (Index j = 0; j < F.cols(); ++j) {
    const Vec t1 = B * Minv.solve(Vec(F.col(j)));
    const Vec t2 = Fp * Mpinv.solve(Vec(B.col(j)));
    sq += Mpinv.solve(t1 - t2).squaredNorm();
  }
  return std::sqrt(sq);
}

} // namespace oseen2p
