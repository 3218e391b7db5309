#pragma once

#include <string>
#include <vector>

#include "oseen2p/grid.hpp"
#include "oseen2p/types.hpp"

namespace oseen2p {

/// Piecewise-constant coefficient applied inside an integral.
enum class Weight { One, Rho, InvRho, Mu, InvMu, Inv2Mu };

enum class OperatorSpace { Velocity, Pressure };

// All assembly routines return full (pre-elimination) matrices over every
// DOF of the requested space; Dirichlet reduction happens when the saddle
// system is formed. quad_order = 0 picks the pair default (3x3 Gauss for
// Q2 pairs, 2x2 for Q1-Q1), which integrates every piecewise-polynomial
// form here exactly.

/// rho/mu/unit-weighted velocity mass, both components (2Nv x 2Nv).
SpMat assemble_velocity_mass(const MixedDiscretization& disc, const PhaseGrid& grid,
                             Weight weight, int quad_order = 0);

/// Viscous block. deformation_form=true gives the 2 mu D(u):D(v) form of the
/// momentum equation (couples components); false gives the mu grad:grad form
/// used only by diagnostics.
SpMat assemble_velocity_diffusion(const MixedDiscretization& disc, const PhaseGrid& grid,
                                  bool deformation_form = true, int quad_order = 0);

/// Convection matrix int w (wind . grad basis_j) basis_i over the velocity or
/// pressure space. `wind` is a full velocity coefficient vector (2Nv); a zero
/// wind yields the zero matrix. For discontinuous pressure the transport of
/// the element means uses upwind edge fluxes and the slope components couple
/// through broken element gradients.
SpMat assemble_convection(const MixedDiscretization& disc, const PhaseGrid& grid,
                          const Vec& wind, Weight weight, OperatorSpace space,
                          int quad_order = 0);

/// Divergence block B (n_pre x 2Nv), entries -int psi_i div phi_j.
SpMat assemble_divergence(const MixedDiscretization& disc, const PhaseGrid& grid,
                          int quad_order = 0);

/// Pressure-projection stabilisation, mu^-1-scaled; zero for stable pairs.
SpMat assemble_stabilization(const MixedDiscretization& disc, const PhaseGrid& grid,
                             int quad_order = 0);

SpMat assemble_pressure_mass(const MixedDiscretization& disc, const PhaseGrid& grid,
                             Weight weight, int quad_order = 0);

/// Weighted pressure Laplacian-type operator. Continuous pressure assembles
/// int w grad psi_j . grad psi_i; P-1 pressure uses the nonconforming
/// construction whose centroid couplings are the five-point stencil with the
/// primitive coefficient averaged arithmetically across each edge.
SpMat assemble_pressure_laplacian(const MixedDiscretization& disc, const PhaseGrid& grid,
                                  Weight weight, int quad_order = 0);

/// Streamline-diffusion stabilisation of the convection form. Off by default
/// throughout the solver; provided as an opt-in hook.
SpMat assemble_streamline_diffusion(const MixedDiscretization& disc, const PhaseGrid& grid,
                                    const Vec& wind, int quad_order = 0);

/// Every pressure-space operator needed by the Schur strategies.
struct PressureOperators {
  SpMat Mp_one, Mp_rho, Mp_inv2mu, Mp_invmu;
  SpMat Ap_one, Ap_invrho, Ap_mu;
  SpMat Np_one, Np_rho; // built with the current wind; zero matrices for wind = 0
};

PressureOperators assemble_pressure_operators(const MixedDiscretization& disc,
                                              const PhaseGrid& grid, const Vec& wind,
                                              int quad_order = 0);

/// F_p = Ap[mu] + Np[conv_weight] + (alpha/dt) Mp[mass_weight]; weights are
/// restricted to {One, Rho}.
SpMat build_Fp(const PressureOperators& ops, double alpha, double dt,
               Weight conv_weight, Weight mass_weight);

/// A[rows, cols] extraction preserving order (used for Dirichlet elimination).
SpMat select_submatrix(const SpMat& A, const std::vector<int>& rows,
                       const std::vector<int>& cols);

/// MatrixMarket coordinate-format dump (1-based, general real).
void write_matrix_market(const SpMat& A, const std::string& path);

} // namespace oseen2p
