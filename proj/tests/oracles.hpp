#pragma once

// Test-local reference-element machinery, independent of the library's
// quadrature and shape-function code paths. Everything here evaluates basis
// functions from explicit formulas in physical coordinates and integrates
// with a hardcoded 5x5 Gauss rule.

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "oseen2p/grid.hpp"
#include "oseen2p/types.hpp"

namespace oracle {

using oseen2p::Mat;
using oseen2p::Vec;

inline const std::array<double, 5> kGx = {
    -0.9061798459386639937, -0.5384693101056830910, 0.0, 0.5384693101056830910,
    0.9061798459386639937};
inline const std::array<double, 5> kGw = {
    0.2369268850561890875, 0.4786286704993664680, 0.5688888888888888889,
    0.4786286704993664680, 0.2369268850561890875};

// integrate f(x, y) over the square [x0, x0+h] x [y0, y0+h]
inline double integrate(double x0, double y0, double h,
                        const std::function<double(double, double)>& f) {
  double s = 0.0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double x = x0 + 0.5 * h * (1.0 + kGx[i]);
      const double y = y0 + 0.5 * h * (1.0 + kGx[j]);
      s += kGw[i] * kGw[j] * f(x, y);
    }
  }
  return s * 0.25 * h * h;
}

struct Basis {
  std::function<double(double, double)> val;
  std::function<double(double, double)> dx;
  std::function<double(double, double)> dy;
};

// 1D Lagrange shapes on [a, a+h] with 2 or 3 equispaced nodes
inline double lag(int deg, int k, double a, double h, double t) {
  if (deg == 1) {
    const double s = (t - a) / h;
    return k == 0 ? 1.0 - s : s;
  }
  const double s = 2.0 * (t - a) / h - 1.0; // in [-1, 1]
  if (k == 0) return 0.5 * s * (s - 1.0);
  if (k == 1) return 1.0 - s * s;
  return 0.5 * s * (s + 1.0);
}

inline double dlag(int deg, int k, double a, double h, double t) {
  if (deg == 1) return (k == 0 ? -1.0 : 1.0) / h;
  const double s = 2.0 * (t - a) / h - 1.0;
  const double ds = 2.0 / h;
  if (k == 0) return (s - 0.5) * ds;
  if (k == 1) return -2.0 * s * ds;
  return (s + 0.5) * ds;
}

// tensor-product basis `local` (x-fastest ordering) on one element
inline Basis tensor_basis(int deg, int local, double x0, double y0, double h) {
  const int per = deg + 1;
  const int i = local % per, j = local / per;
  Basis b;
  b.val = [=](double x, double y) { return lag(deg, i, x0, h, x) * lag(deg, j, y0, h, y); };
  b.dx = [=](double x, double y) { return dlag(deg, i, x0, h, x) * lag(deg, j, y0, h, y); };
  b.dy = [=](double x, double y) { return lag(deg, i, x0, h, x) * dlag(deg, j, y0, h, y); };
  return b;
}

// P-1 basis {1, x-xc, y-yc}
inline Basis pm1_basis(int local, double x0, double y0, double h) {
  const double xc = x0 + 0.5 * h, yc = y0 + 0.5 * h;
  Basis b;
  if (local == 0) {
    b.val = [](double, double) { return 1.0; };
    b.dx = [](double, double) { return 0.0; };
    b.dy = [](double, double) { return 0.0; };
  } else if (local == 1) {
    b.val = [=](double x, double) { return x - xc; };
    b.dx = [](double, double) { return 1.0; };
    b.dy = [](double, double) { return 0.0; };
  } else {
    b.val = [=](double, double y) { return y - yc; };
    b.dx = [](double, double) { return 0.0; };
    b.dy = [](double, double) { return 1.0; };
  }
  return b;
}

inline int velocity_degree(const oseen2p::MixedDiscretization& disc) {
  return disc.pair == oseen2p::ElementPair::Q1Q1 ? 1 : 2;
}

inline Basis velocity_basis(const oseen2p::MixedDiscretization& disc,
                            const oseen2p::PhaseGrid& grid, int e, int local) {
  const int n = grid.n_per_side;
  const auto org = grid.elem_origin(e % n, e / n);
  return tensor_basis(velocity_degree(disc), local, org[0], org[1], grid.h);
}

inline Basis pressure_basis(const oseen2p::MixedDiscretization& disc,
                            const oseen2p::PhaseGrid& grid, int e, int local) {
  const int n = grid.n_per_side;
  const auto org = grid.elem_origin(e % n, e / n);
  if (disc.pair == oseen2p::ElementPair::Q2Pm1) {
    return pm1_basis(local, org[0], org[1], grid.h);
  }
  return tensor_basis(1, local, org[0], org[1], grid.h);
}

// dense global assembly of int w(e) * kernel(a, b) over a scalar space
using ElementKernel = std::function<double(int e, const Basis& a, const Basis& b)>;

inline Mat assemble_scalar(const oseen2p::MixedDiscretization& disc,
                           const oseen2p::PhaseGrid& grid, bool pressure_space,
                           const ElementKernel& kernel) {
  const int dim = pressure_space ? disc.n_pre_dofs : disc.n_vel_nodes;
  const int nsf = pressure_space ? disc.pre_dofs_per_elem : disc.vel_nodes_per_elem;
  const int* conn = pressure_space ? disc.pre_conn.data() : disc.vel_conn.data();
  Mat M = Mat::Zero(dim, dim);
  for (int e = 0; e < grid.n_elems(); ++e) {
    for (int a = 0; a < nsf; ++a) {
      const Basis ba = pressure_space ? pressure_basis(disc, grid, e, a)
                                      : velocity_basis(disc, grid, e, a);
      for (int b = 0; b < nsf; ++b) {
        const Basis bb = pressure_space ? pressure_basis(disc, grid, e, b)
                                        : velocity_basis(disc, grid, e, b);
        M(conn[e * nsf + a], conn[e * nsf + b]) += kernel(e, ba, bb);
      }
    }
  }
  return M;
}

inline double elem_integral(const oseen2p::PhaseGrid& grid, int e,
                            const std::function<double(double, double)>& f) {
  const int n = grid.n_per_side;
  const auto org = grid.elem_origin(e % n, e / n);
  return integrate(org[0], org[1], grid.h, f);
}

} // namespace oracle
