#include "oseen2p/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace oseen2p {

std::string to_string(ElementPair pair) {
  switch (pair) {
    case ElementPair::Q2Q1: return "q2q1";
    case ElementPair::Q1Q1: return "q1q1";
    case ElementPair::Q2Pm1: return "q2pm1";
  }
  return "?";
}

ElementPair parse_element_pair(const std::string& key) {
  if (key == "q2q1") return ElementPair::Q2Q1;
  if (key == "q1q1") return ElementPair::Q1Q1;
  if (key == "q2pm1") return ElementPair::Q2Pm1;
  throw std::invalid_argument("unknown element pair: " + key);
}

PhaseGrid build_grid(int n_per_side, double rho_ratio, double mu_ratio, double reynolds) {
  if (n_per_side < 4 || n_per_side % 4 != 0) {
    throw std::invalid_argument(
        "n_per_side must be >= 4 and divisible by 4 so the interface square "
        "(-1/2,1/2)^2 lies on element edges; got " + std::to_string(n_per_side));
  }
  if (!(rho_ratio > 0.0) || !(mu_ratio > 0.0) || !(reynolds > 0.0)) {
    throw std::invalid_argument("rho_ratio, mu_ratio and reynolds must be positive");
  }

  PhaseGrid grid;
  grid.n_per_side = n_per_side;
  grid.h = 2.0 / n_per_side;
  grid.reynolds = reynolds;
  grid.rho_ratio = rho_ratio;
  grid.mu_ratio = mu_ratio;

  const int ne = grid.n_elems();
  grid.elem_phase.resize(ne);
  grid.rho.resize(ne);
  grid.mu.resize(ne);

  const double mu1 = 1.0 / reynolds;
  for (int ey = 0; ey < n_per_side; ++ey) {
    for (int ex = 0; ex < n_per_side; ++ex) {
      const auto c = grid.elem_centroid(ex, ey);
      const bool inner = std::abs(c[0]) < 0.5 && std::abs(c[1]) < 0.5;
      const int e = grid.elem_index(ex, ey);
      grid.elem_phase[e] = inner ? 2 : 1;
      grid.rho[e] = inner ? rho_ratio : 1.0;
      grid.mu[e] = inner ? mu_ratio * mu1 : mu1;
    }
  }
  return grid;
}

std::array<double, 2> lid_values(double x) {
  const double x2 = x * x;
  return {1.0 - x2 * x2, 0.0};
}

namespace {

void fill_connectivity(MixedDiscretization& disc) {
  const int n = disc.n_per_side;
  const int ne = n * n;

  // scalar velocity nodes
  const bool q2 = disc.pair != ElementPair::Q1Q1;
  const int vps = q2 ? 2 * n + 1 : n + 1;
  disc.vel_nodes_per_side = vps;
  disc.n_vel_nodes = vps * vps;
  disc.n_vel_dofs = 2 * disc.n_vel_nodes;
  disc.vel_nodes_per_elem = q2 ? 9 : 4;
  const double node_h = 2.0 / (vps - 1);

  disc.vel_coords.resize(disc.n_vel_nodes);
  for (int gy = 0; gy < vps; ++gy)
    for (int gx = 0; gx < vps; ++gx)
      disc.vel_coords[gy * vps + gx] = {-1.0 + gx * node_h, -1.0 + gy * node_h};

  disc.vel_conn.resize(static_cast<size_t>(ne) * disc.vel_nodes_per_elem);
  const int span = q2 ? 2 : 1;
  const int per_side = q2 ? 3 : 2;
  for (int ey = 0; ey < n; ++ey) {
    for (int ex = 0; ex < n; ++ex) {
      const int e = ey * n + ex;
      int* conn = disc.vel_conn.data() + static_cast<size_t>(e) * disc.vel_nodes_per_elem;
      for (int j = 0; j < per_side; ++j)
        for (int i = 0; i < per_side; ++i)
          conn[j * per_side + i] = (span * ey + j) * vps + (span * ex + i);
    }
  }

  // pressure DOFs
  if (disc.pair == ElementPair::Q2Pm1) {
    disc.n_pre_dofs = 3 * ne;
    disc.pre_dofs_per_elem = 3;
    disc.pre_conn.resize(static_cast<size_t>(ne) * 3);
    disc.pre_coords.resize(disc.n_pre_dofs);
    for (int ey = 0; ey < n; ++ey) {
      for (int ex = 0; ex < n; ++ex) {
        const int e = ey * n + ex;
        const double cx = -1.0 + (ex + 0.5) * disc.h;
        const double cy = -1.0 + (ey + 0.5) * disc.h;
        for (int k = 0; k < 3; ++k) {
          disc.pre_conn[3 * e + k] = 3 * e + k;
          disc.pre_coords[3 * e + k] = {cx, cy};
        }
      }
    }
  } else {
    const int pps = n + 1;
    disc.n_pre_dofs = pps * pps;
    disc.pre_dofs_per_elem = 4;
    disc.pre_conn.resize(static_cast<size_t>(ne) * 4);
    disc.pre_coords.resize(disc.n_pre_dofs);
    for (int gy = 0; gy < pps; ++gy)
      for (int gx = 0; gx < pps; ++gx)
        disc.pre_coords[gy * pps + gx] = {-1.0 + gx * disc.h, -1.0 + gy * disc.h};
    for (int ey = 0; ey < n; ++ey) {
      for (int ex = 0; ex < n; ++ex) {
        const int e = ey * n + ex;
        int* conn = disc.pre_conn.data() + static_cast<size_t>(e) * 4;
        for (int j = 0; j < 2; ++j)
          for (int i = 0; i < 2; ++i)
            conn[j * 2 + i] = (ey + j) * pps + (ex + i);
      }
    }
  }

  // boundary / interior split (enclosed flow: every boundary node is Dirichlet)
  disc.boundary_nodes.clear();
  disc.interior_nodes.clear();
  for (int gy = 0; gy < vps; ++gy) {
    for (int gx = 0; gx < vps; ++gx) {
      const int node = gy * vps + gx;
      const bool on_boundary = gx == 0 || gx == vps - 1 || gy == 0 || gy == vps - 1;
      (on_boundary ? disc.boundary_nodes : disc.interior_nodes).push_back(node);
    }
  }
  disc.dirichlet_vel.clear();
  disc.dirichlet_vel.reserve(2 * disc.boundary_nodes.size());
  for (int node : disc.boundary_nodes) disc.dirichlet_vel.push_back(node);
  for (int node : disc.boundary_nodes) disc.dirichlet_vel.push_back(disc.n_vel_nodes + node);
}

} // namespace

Vec MixedDiscretization::pressure_nullvector() const {
  Vec e = Vec::Zero(n_pre_dofs);
  if (pair == ElementPair::Q2Pm1) {
    for (int k = 0; k < n_pre_dofs; k += 3) e[k] = 1.0;
  } else {
    e.setOnes();
  }
  return e;
}

Vec MixedDiscretization::boundary_velocity_values() const {
  Vec u = Vec::Zero(n_vel_dofs);
  const int vps = vel_nodes_per_side;
  for (int node : boundary_nodes) {
    const int gy = node / vps;
    if (gy == vps - 1) {
      const auto v = lid_values(vel_coords[node][0]);
      u[node] = v[0];
      u[n_vel_nodes + node] = v[1];
    }
  }
  return u;
}

MixedDiscretization build_discretization(const PhaseGrid& grid, ElementPair pair) {
  MixedDiscretization disc;
  disc.pair = pair;
  disc.n_per_side = grid.n_per_side;
  disc.h = grid.h;
  fill_connectivity(disc);
  return disc;
}

long expected_dof_count(ElementPair pair, int n) {
  const long nl = n;
  switch (pair) {
    case ElementPair::Q2Q1: return 2 * (2 * nl - 1) * (2 * nl - 1) + (nl + 1) * (nl + 1);
    case ElementPair::Q1Q1: return 2 * (nl - 1) * (nl - 1) + (nl + 1) * (nl + 1);
    case ElementPair::Q2Pm1: return 2 * (2 * nl - 1) * (2 * nl - 1) + 3 * nl * nl;
  }
  return 0;
}

} // namespace oseen2p
