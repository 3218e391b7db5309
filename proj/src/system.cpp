#include "oseen2p/system.hpp"

#include <stdexcept>

namespace oseen2p {

Vec SaddleSystem::apply(const Vec& x) const {
  const Index nu = n_vel(), np = n_pre();
  Vec y(nu + np);
  const auto u = x.head(nu);
  const auto p = x.tail(np);
  y.head(nu) = F * u + B.transpose() * p;
  y.tail(np) = B * u;
  if (C.nonZeros() > 0) y.tail(np) -= C * p;
  return y;
}

LinearOperator SaddleSystem::op() const {
  return {dim(), [this](const Vec& x) { return apply(x); }};
}

Vec SaddleSystem::residual(const Vec& x) const {
  Vec r = apply(x);
  r.head(n_vel()) -= rhs_u;
  r.tail(n_pre()) -= rhs_p;
  return r;
}

CavityAssembler::CavityAssembler(const MixedDiscretization& disc, const PhaseGrid& grid,
                                 double alpha, double dt, int quad_order, bool use_supg)
    : disc_(&disc), grid_(&grid), alpha_(alpha), dt_(dt), quad_order_(quad_order),
      use_supg_(use_supg) {
  if (alpha != 0.0 && alpha != 1.0) throw std::invalid_argument("alpha must be 0 or 1");
  if (alpha == 1.0 && !(dt > 0.0)) throw std::invalid_argument("dt must be positive");

  A_full_ = assemble_velocity_diffusion(disc, grid, true, quad_order);
  if (alpha == 1.0) M_full_ = assemble_velocity_mass(disc, grid, Weight::Rho, quad_order);
  B_full_ = assemble_divergence(disc, grid, quad_order);
  C_ = assemble_stabilization(disc, grid, quad_order);

  vel_keep_.reserve(2 * disc.interior_nodes.size());
  for (int node : disc.interior_nodes) vel_keep_.push_back(node);
  for (int node : disc.interior_nodes) vel_keep_.push_back(disc.n_vel_nodes + node);
  pre_all_.resize(disc.n_pre_dofs);
  for (int i = 0; i < disc.n_pre_dofs; ++i) pre_all_[i] = i;

  u_bc_ = disc.boundary_velocity_values();
  e_p_ = disc.pressure_nullvector();
  e_p_sq_ = e_p_.squaredNorm();
}

Vec CavityAssembler::reduce_velocity(const Vec& full) const {
  Vec r(vel_keep_.size());
  for (size_t i = 0; i < vel_keep_.size(); ++i) r[i] = full[vel_keep_[i]];
  return r;
}

Vec CavityAssembler::expand_velocity(const Vec& interior) const {
  Vec full = u_bc_;
  for (size_t i = 0; i < vel_keep_.size(); ++i) full[vel_keep_[i]] = interior[i];
  return full;
}

SaddleSystem CavityAssembler::build(const Vec& wind) const {
  SaddleSystem sys;
  sys.alpha = alpha_;
  sys.dt = dt_;

  SpMat F_full = A_full_;
  SpMat N_full = assemble_convection(*disc_, *grid_, wind, Weight::Rho,
                                     OperatorSpace::Velocity, quad_order_);
  if (N_full.nonZeros() > 0) F_full += N_full;
  if (alpha_ != 0.0) F_full += SpMat((alpha_ / dt_) * M_full_);
  if (use_supg_) {
    SpMat SD = assemble_streamline_diffusion(*disc_, *grid_, wind, quad_order_);
    if (SD.nonZeros() > 0) F_full += SD;
  }

  sys.A_mu = select_submatrix(A_full_, vel_keep_, vel_keep_);
  sys.N_rho = N_full.nonZeros() > 0 ? select_submatrix(N_full, vel_keep_, vel_keep_)
                                    : SpMat(vel_keep_.size(), vel_keep_.size());
  sys.M_rho = alpha_ != 0.0 ? select_submatrix(M_full_, vel_keep_, vel_keep_)
                            : SpMat(vel_keep_.size(), vel_keep_.size());
  sys.F = select_submatrix(F_full, vel_keep_, vel_keep_);
  sys.B = select_submatrix(B_full_, pre_all_, vel_keep_);
  sys.C = C_;

  // Dirichlet lift: eliminated columns move to the right-hand side
  Vec lift_u = F_full * u_bc_;
  sys.rhs_u = -reduce_velocity(lift_u);
  sys.rhs_p = -(B_full_ * u_bc_);
  // keep the singular system consistent: remove any constant-pressure
  // component from the continuity right-hand side
  sys.rhs_p -= (e_p_.dot(sys.rhs_p) / e_p_sq_) * e_p_;
  return sys;
}

SaddleSystem build_saddle_system(const MixedDiscretization& disc, const PhaseGrid& grid,
                                 const Vec& wind, double alpha, double dt, int quad_order,
                                 bool use_supg) {
  return CavityAssembler(disc, grid, alpha, dt, quad_order, use_supg).build(wind);
}

} // namespace oseen2p
