#pragma once

#include <array>
#include <string>
#include <vector>

#include "oseen2p/types.hpp"

namespace oseen2p {

/// Mixed element pairs on the structured square grid.
enum class ElementPair { Q2Q1, Q1Q1, Q2Pm1 };

std::string to_string(ElementPair pair);
ElementPair parse_element_pair(const std::string& key);

/// Structured square-element mesh of (-1,1)^2 carrying the two-phase
/// coefficient field. Phase 2 occupies the inner square (-1/2,1/2)^2,
/// which lies on element edges because n_per_side is divisible by 4.
struct PhaseGrid {
  int n_per_side = 0;    // elements per side, = 2/h
  double h = 0.0;        // element side length
  double reynolds = 1.0;
  double rho_ratio = 1.0; // rho_2 / rho_1
  double mu_ratio = 1.0;  // mu_2 / mu_1
  std::vector<int> elem_phase; // 1 or 2, row-major from lower-left corner
  Vec rho; // per-element density (phase 1 value 1)
  Vec mu;  // per-element dynamic viscosity (phase 1 value 1/Re)

  int n_elems() const { return n_per_side * n_per_side; }
  int elem_index(int ex, int ey) const { return ey * n_per_side + ex; }
  // lower-left corner of element (ex, ey)
  std::array<double, 2> elem_origin(int ex, int ey) const {
    return {-1.0 + ex * h, -1.0 + ey * h};
  }
  std::array<double, 2> elem_centroid(int ex, int ey) const {
    return {-1.0 + (ex + 0.5) * h, -1.0 + (ey + 0.5) * h};
  }
};

PhaseGrid build_grid(int n_per_side, double rho_ratio, double mu_ratio, double reynolds);

/// Prescribed lid profile (1 - x^4, 0) on y = 1; zero at the corners, which
/// makes the corner velocity values compatible with the no-flow side walls.
std::array<double, 2> lid_values(double x);

/// DOF maps for one mixed element pair on a PhaseGrid. Velocity DOFs are
/// numbered x-component first (one per scalar node), then y-component;
/// pressure DOFs follow in the solved block ordering.
struct MixedDiscretization {
  ElementPair pair = ElementPair::Q2Q1;
  int n_per_side = 0;
  double h = 0.0;

  int vel_nodes_per_side = 0;
  int n_vel_nodes = 0; // scalar nodes per component
  int n_vel_dofs = 0;  // both components
  int n_pre_dofs = 0;

  int vel_nodes_per_elem = 0;
  int pre_dofs_per_elem = 0;
  std::vector<int> vel_conn; // n_elems * vel_nodes_per_elem, tensor-ordered
  std::vector<int> pre_conn; // n_elems * pre_dofs_per_elem

  std::vector<std::array<double, 2>> vel_coords; // per scalar node
  std::vector<std::array<double, 2>> pre_coords; // per pressure DOF

  std::vector<int> boundary_nodes; // scalar node ids on the boundary, sorted
  std::vector<int> dirichlet_vel;  // velocity DOF ids (both components), sorted
  std::vector<int> interior_nodes; // scalar node ids not on the boundary, sorted

  int n_interior_nodes() const { return static_cast<int>(interior_nodes.size()); }
  // size of the Dirichlet-eliminated system: interior velocity + all pressure
  int n_solve_dofs() const { return 2 * n_interior_nodes() + n_pre_dofs; }

  /// Discrete representation of the constant pressure function
  /// (all ones for continuous pressure, centroid indicator for P-1).
  Vec pressure_nullvector() const;

  /// Full velocity coefficient vector holding the Dirichlet values
  /// (lid profile on y = 1, zero elsewhere) and zero at interior nodes.
  Vec boundary_velocity_values() const;
};

MixedDiscretization build_discretization(const PhaseGrid& grid, ElementPair pair);

/// Closed-form count of the eliminated-system DOFs (interior velocity plus
/// all pressure, constant mode included) for an n x n grid.
long expected_dof_count(ElementPair pair, int n_per_side);

} // namespace oseen2p
