#include "oseen2p/assembly.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace oseen2p {

namespace {

struct GaussRule {
  std::vector<double> x, w;
};

GaussRule gauss1d(int order) {
  GaussRule r;
  switch (order) {
    case 1:
      r.x = {0.0};
      r.w = {2.0};
      break;
    case 2: {
      const double a = 1.0 / std::sqrt(3.0);
      r.x = {-a, a};
      r.w = {1.0, 1.0};
      break;
    }
    case 3: {
      const double a = std::sqrt(0.6);
      r.x = {-a, 0.0, a};
      r.w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      break;
    }
    case 4: {
      const double a = 0.3399810435848562648;
      const double b = 0.8611363115940525752;
      const double wa = 0.6521451548625461426;
      const double wb = 0.3478548451374538574;
      r.x = {-b, -a, a, b};
      r.w = {wb, wa, wa, wb};
      break;
    }
    case 5: {
      const double a = 0.5384693101056830910;
      const double b = 0.9061798459386639937;
      const double wa = 0.4786286704993664680;
      const double wb = 0.2369268850561890875;
      r.x = {-b, -a, 0.0, a, b};
      r.w = {wb, wa, 128.0 / 225.0, wa, wb};
      break;
    }
    default:
      throw std::invalid_argument("unsupported quadrature order");
  }
  return r;
}

void shape1d(int deg, double t, double* v, double* d) {
  if (deg == 1) {
    v[0] = 0.5 * (1.0 - t);
    v[1] = 0.5 * (1.0 + t);
    d[0] = -0.5;
    d[1] = 0.5;
  } else {
    v[0] = 0.5 * t * (t - 1.0);
    v[1] = 1.0 - t * t;
    v[2] = 0.5 * t * (t + 1.0);
    d[0] = t - 0.5;
    d[1] = -2.0 * t;
    d[2] = t + 0.5;
  }
}

// Tensor-product shapes evaluated at the points of a tensor Gauss rule.
// val/dxi/deta are indexed [q * nsf + a]; derivatives are reference ones.
struct ShapeTable {
  int nsf = 0;
  int nq = 0;
  std::vector<double> qw;
  std::vector<double> val, dxi, deta;
};

ShapeTable tensor_shapes(int deg, const GaussRule& g) {
  ShapeTable t;
  const int per = deg + 1;
  t.nsf = per * per;
  t.nq = static_cast<int>(g.x.size() * g.x.size());
  t.qw.resize(t.nq);
  t.val.resize(static_cast<size_t>(t.nq) * t.nsf);
  t.dxi.resize(t.val.size());
  t.deta.resize(t.val.size());
  double vx[3], dx[3], vy[3], dy[3];
  int q = 0;
  for (size_t qy = 0; qy < g.x.size(); ++qy) {
    shape1d(deg, g.x[qy], vy, dy);
    for (size_t qx = 0; qx < g.x.size(); ++qx, ++q) {
      shape1d(deg, g.x[qx], vx, dx);
      t.qw[q] = g.w[qx] * g.w[qy];
      for (int j = 0; j < per; ++j) {
        for (int i = 0; i < per; ++i) {
          const int a = j * per + i;
          t.val[static_cast<size_t>(q) * t.nsf + a] = vx[i] * vy[j];
          t.dxi[static_cast<size_t>(q) * t.nsf + a] = dx[i] * vy[j];
          t.deta[static_cast<size_t>(q) * t.nsf + a] = vx[i] * dy[j];
        }
      }
    }
  }
  return t;
}

// P-1 basis {1, x - xc, y - yc} evaluated in reference coordinates.
ShapeTable pm1_shapes(double h, const GaussRule& g) {
  ShapeTable t;
  t.nsf = 3;
  t.nq = static_cast<int>(g.x.size() * g.x.size());
  t.qw.resize(t.nq);
  t.val.resize(static_cast<size_t>(t.nq) * 3);
  t.dxi.assign(static_cast<size_t>(t.nq) * 3, 0.0);
  t.deta.assign(static_cast<size_t>(t.nq) * 3, 0.0);
  int q = 0;
  for (size_t qy = 0; qy < g.x.size(); ++qy) {
    for (size_t qx = 0; qx < g.x.size(); ++qx, ++q) {
      t.qw[q] = g.w[qx] * g.w[qy];
      t.val[3 * q + 0] = 1.0;
      t.val[3 * q + 1] = 0.5 * h * g.x[qx];
      t.val[3 * q + 2] = 0.5 * h * g.x[qy];
      t.dxi[3 * q + 1] = 0.5 * h;
      t.deta[3 * q + 2] = 0.5 * h;
    }
  }
  return t;
}

int effective_order(const MixedDiscretization& disc, int quad_order) {
  if (quad_order > 0) return quad_order;
  return disc.pair == ElementPair::Q1Q1 ? 2 : 3;
}

int velocity_degree(const MixedDiscretization& disc) {
  return disc.pair == ElementPair::Q1Q1 ? 1 : 2;
}

ShapeTable pressure_shapes(const MixedDiscretization& disc, const GaussRule& g) {
  if (disc.pair == ElementPair::Q2Pm1) return pm1_shapes(disc.h, g);
  return tensor_shapes(1, g);
}

double weight_value(Weight w, const PhaseGrid& grid, int e) {
  switch (w) {
    case Weight::One: return 1.0;
    case Weight::Rho: return grid.rho[e];
    case Weight::InvRho: return 1.0 / grid.rho[e];
    case Weight::Mu: return grid.mu[e];
    case Weight::InvMu: return 1.0 / grid.mu[e];
    case Weight::Inv2Mu: return 0.5 / grid.mu[e];
  }
  return 1.0;
}

// Edge coefficient for the P-1 Laplacian: the primitive field (rho or mu) is
// averaged arithmetically across the edge before the weight transform.
double edge_weight_value(Weight w, const PhaseGrid& grid, int e, int f) {
  switch (w) {
    case Weight::One: return 1.0;
    case Weight::Rho: return 0.5 * (grid.rho[e] + grid.rho[f]);
    case Weight::InvRho: return 2.0 / (grid.rho[e] + grid.rho[f]);
    case Weight::Mu: return 0.5 * (grid.mu[e] + grid.mu[f]);
    case Weight::InvMu: return 2.0 / (grid.mu[e] + grid.mu[f]);
    case Weight::Inv2Mu: return 1.0 / (grid.mu[e] + grid.mu[f]);
  }
  return 1.0;
}

bool is_zero_wind(const Vec& wind) {
  return wind.size() == 0 || wind.lpNorm<Eigen::Infinity>() == 0.0;
}

void check_wind(const MixedDiscretization& disc, const Vec& wind) {
  if (wind.size() != 0 && wind.size() != disc.n_vel_dofs) {
    throw std::invalid_argument("wind vector does not match the velocity space");
  }
}

SpMat from_triplets(Index rows, Index cols, const std::vector<Triplet>& trips) {
  SpMat A(rows, cols);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  return A;
}

} // namespace

SpMat assemble_velocity_mass(const MixedDiscretization& disc, const PhaseGrid& grid,
                             Weight weight, int quad_order) {
  const GaussRule g = gauss1d(effective_order(disc, quad_order));
  const ShapeTable t = tensor_shapes(velocity_degree(disc), g);
  const double detj = 0.25 * disc.h * disc.h;
  const int nv = disc.n_vel_nodes;
  const int nsf = t.nsf;

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(grid.n_elems()) * nsf * nsf * 2);
  std::vector<double> local(static_cast<size_t>(nsf) * nsf);
  for (int e = 0; e < grid.n_elems(); ++e) {
    const double we = weight_value(weight, grid, e);
    std::fill(local.begin(), local.end(), 0.0);
    for (int q = 0; q < t.nq; ++q) {
      const double c = t.qw[q] * detj;
      const double* v = &t.val[static_cast<size_t>(q) * nsf];
      for (int a = 0; a < nsf; ++a)
        for (int b = 0; b < nsf; ++b) local[a * nsf + b] += c * (v[a] * v[b]);
    }
    const int* conn = disc.vel_conn.data() + static_cast<size_t>(e) * nsf;
    for (int a = 0; a < nsf; ++a) {
      for (int b = 0; b < nsf; ++b) {
        const double m = we * local[a * nsf + b];
        trips.emplace_back(conn[a], conn[b], m);
        trips.emplace_back(nv + conn[a], nv + conn[b], m);
      }
    }
  }
  return from_triplets(disc.n_vel_dofs, disc.n_vel_dofs, trips);
}

SpMat assemble_velocity_diffusion(const MixedDiscretization& disc, const PhaseGrid& grid,
                                  bool deformation_form, int quad_order) {
  const GaussRule g = gauss1d(effective_order(disc, quad_order));
  const ShapeTable t = tensor_shapes(velocity_degree(disc), g);
  const double detj = 0.25 * disc.h * disc.h;
  const double jinv = 2.0 / disc.h;
  const int nv = disc.n_vel_nodes;
  const int nsf = t.nsf;

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(grid.n_elems()) * nsf * nsf * 4);
  std::vector<double> a11(static_cast<size_t>(nsf) * nsf), a22(a11.size()), a12(a11.size());
  std::vector<double> gx(nsf), gy(nsf);
  for (int e = 0; e < grid.n_elems(); ++e) {
    const double mue = grid.mu[e];
    std::fill(a11.begin(), a11.end(), 0.0);
    std::fill(a22.begin(), a22.end(), 0.0);
    std::fill(a12.begin(), a12.end(), 0.0);
    for (int q = 0; q < t.nq; ++q) {
      const double c = t.qw[q] * detj;
      for (int a = 0; a < nsf; ++a) {
        gx[a] = jinv * t.dxi[static_cast<size_t>(q) * nsf + a];
        gy[a] = jinv * t.deta[static_cast<size_t>(q) * nsf + a];
      }
      if (deformation_form) {
        for (int a = 0; a < nsf; ++a) {
          for (int b = 0; b < nsf; ++b) {
            a11[a * nsf + b] += c * (2.0 * (gx[a] * gx[b]) + gy[a] * gy[b]);
            a22[a * nsf + b] += c * (gx[a] * gx[b] + 2.0 * (gy[a] * gy[b]));
            a12[a * nsf + b] += c * gy[a] * gx[b];
          }
        }
      } else {
        for (int a = 0; a < nsf; ++a) {
          for (int b = 0; b < nsf; ++b) {
            const double k = c * (gx[a] * gx[b] + gy[a] * gy[b]);
            a11[a * nsf + b] += k;
            a22[a * nsf + b] += k;
          }
        }
      }
    }
    const int* conn = disc.vel_conn.data() + static_cast<size_t>(e) * nsf;
    for (int a = 0; a < nsf; ++a) {
      for (int b = 0; b < nsf; ++b) {
        trips.emplace_back(conn[a], conn[b], mue * a11[a * nsf + b]);
        trips.emplace_back(nv + conn[a], nv + conn[b], mue * a22[a * nsf + b]);
        if (deformation_form) {
          trips.emplace_back(conn[a], nv + conn[b], mue * a12[a * nsf + b]);
          trips.emplace_back(nv + conn[b], conn[a], mue * a12[a * nsf + b]);
        }
      }
    }
  }
  return from_triplets(disc.n_vel_dofs, disc.n_vel_dofs, trips);
}

namespace {

// Upwind edge fluxes transporting the P-1 element means; the slope
// components are handled by the broken-gradient volume term in the caller.
void pm1_upwind_fluxes(const MixedDiscretization& disc, const PhaseGrid& grid,
                       const Vec& wind, Weight weight, std::vector<Triplet>& trips) {
  const int n = disc.n_per_side;
  const int vps = disc.vel_nodes_per_side;
  const int nv = disc.n_vel_nodes;
  const GaussRule g = gauss1d(3);
  double v1[3], d1[3];

  auto add_flux = [&](int e, int f, double q) {
    // q is the wind flux from e to f through the shared edge
    const int pe = 3 * e, pf = 3 * f;
    if (q >= 0.0) {
      const double wq = (weight == Weight::Rho ? grid.rho[e] : 1.0) * q;
      trips.emplace_back(pe, pe, wq);
      trips.emplace_back(pf, pe, -wq);
    } else {
      const double wq = (weight == Weight::Rho ? grid.rho[f] : 1.0) * q;
      trips.emplace_back(pe, pf, wq);
      trips.emplace_back(pf, pf, -wq);
    }
  };

  for (int ey = 0; ey < n; ++ey) {
    for (int ex = 0; ex + 1 < n; ++ex) {
      const int e = ey * n + ex;
      const int f = e + 1;
      const int gx = 2 * (ex + 1);
      double q = 0.0;
      for (size_t k = 0; k < g.x.size(); ++k) {
        shape1d(2, g.x[k], v1, d1);
        double wx = 0.0;
        for (int j = 0; j < 3; ++j) wx += v1[j] * wind[(2 * ey + j) * vps + gx];
        q += 0.5 * disc.h * g.w[k] * wx;
      }
      add_flux(e, f, q);
    }
  }
  for (int ey = 0; ey + 1 < n; ++ey) {
    for (int ex = 0; ex < n; ++ex) {
      const int e = ey * n + ex;
      const int f = e + n;
      const int gy = 2 * (ey + 1);
      double q = 0.0;
      for (size_t k = 0; k < g.x.size(); ++k) {
        shape1d(2, g.x[k], v1, d1);
        double wy = 0.0;
        for (int i = 0; i < 3; ++i) wy += v1[i] * wind[nv + gy * vps + 2 * ex + i];
        q += 0.5 * disc.h * g.w[k] * wy;
      }
      add_flux(e, f, q);
    }
  }
}

} // namespace

SpMat assemble_convection(const MixedDiscretization& disc, const PhaseGrid& grid,
                          const Vec& wind, Weight weight, OperatorSpace space,
                          int quad_order) {
  check_wind(disc, wind);
  const bool pressure = space == OperatorSpace::Pressure;
  const Index dim = pressure ? disc.n_pre_dofs : disc.n_vel_dofs;
  if (is_zero_wind(wind)) return SpMat(dim, dim);

  // P-1 pressure: the convection operator lives on the element means only
  // (upwind edge fluxes); slope components carry no transport.
  if (pressure && disc.pair == ElementPair::Q2Pm1) {
    std::vector<Triplet> trips;
    pm1_upwind_fluxes(disc, grid, wind, weight, trips);
    return from_triplets(dim, dim, trips);
  }

  const GaussRule g = gauss1d(effective_order(disc, quad_order));
  const ShapeTable tv = tensor_shapes(velocity_degree(disc), g);
  const ShapeTable ts = pressure ? pressure_shapes(disc, g) : tv;
  const double detj = 0.25 * disc.h * disc.h;
  const double jinv = 2.0 / disc.h;
  const int nv = disc.n_vel_nodes;
  const int nsf = ts.nsf;

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(grid.n_elems()) * nsf * nsf * (pressure ? 1 : 2));
  std::vector<double> local(static_cast<size_t>(nsf) * nsf);
  for (int e = 0; e < grid.n_elems(); ++e) {
    const double we = weight_value(weight, grid, e);
    const int* vconn = disc.vel_conn.data() + static_cast<size_t>(e) * tv.nsf;
    std::fill(local.begin(), local.end(), 0.0);
    for (int q = 0; q < ts.nq; ++q) {
      double wx = 0.0, wy = 0.0;
      for (int a = 0; a < tv.nsf; ++a) {
        const double v = tv.val[static_cast<size_t>(q) * tv.nsf + a];
        wx += v * wind[vconn[a]];
        wy += v * wind[nv + vconn[a]];
      }
      const double c = ts.qw[q] * detj;
      const double* sv = &ts.val[static_cast<size_t>(q) * nsf];
      const double* sx = &ts.dxi[static_cast<size_t>(q) * nsf];
      const double* sy = &ts.deta[static_cast<size_t>(q) * nsf];
      for (int b = 0; b < nsf; ++b) {
        const double adv = wx * jinv * sx[b] + wy * jinv * sy[b];
        for (int a = 0; a < nsf; ++a) local[a * nsf + b] += c * adv * sv[a];
      }
    }
    if (pressure) {
      const int* conn = disc.pre_conn.data() + static_cast<size_t>(e) * nsf;
      for (int a = 0; a < nsf; ++a)
        for (int b = 0; b < nsf; ++b)
          trips.emplace_back(conn[a], conn[b], we * local[a * nsf + b]);
    } else {
      const int* conn = vconn;
      for (int a = 0; a < nsf; ++a) {
        for (int b = 0; b < nsf; ++b) {
          const double m = we * local[a * nsf + b];
          trips.emplace_back(conn[a], conn[b], m);
          trips.emplace_back(nv + conn[a], nv + conn[b], m);
        }
      }
    }
  }
  return from_triplets(dim, dim, trips);
}

SpMat assemble_divergence(const MixedDiscretization& disc, const PhaseGrid& grid,
                          int quad_order) {
  const GaussRule g = gauss1d(effective_order(disc, quad_order));
  const ShapeTable tv = tensor_shapes(velocity_degree(disc), g);
  const ShapeTable tp = pressure_shapes(disc, g);
  const double detj = 0.25 * disc.h * disc.h;
  const double jinv = 2.0 / disc.h;
  const int nv = disc.n_vel_nodes;

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(grid.n_elems()) * tp.nsf * tv.nsf * 2);
  std::vector<double> bx(static_cast<size_t>(tp.nsf) * tv.nsf), by(bx.size());
  for (int e = 0; e < grid.n_elems(); ++e) {
    std::fill(bx.begin(), bx.end(), 0.0);
    std::fill(by.begin(), by.end(), 0.0);
    for (int q = 0; q < tp.nq; ++q) {
      const double c = tp.qw[q] * detj;
      const double* pv = &tp.val[static_cast<size_t>(q) * tp.nsf];
      const double* vx = &tv.dxi[static_cast<size_t>(q) * tv.nsf];
      const double* vy = &tv.deta[static_cast<size_t>(q) * tv.nsf];
      for (int a = 0; a < tp.nsf; ++a) {
        for (int b = 0; b < tv.nsf; ++b) {
          bx[a * tv.nsf + b] -= c * pv[a] * jinv * vx[b];
          by[a * tv.nsf + b] -= c * pv[a] * jinv * vy[b];
        }
      }
    }
    const int* pconn = disc.pre_conn.data() + static_cast<size_t>(e) * tp.nsf;
    const int* vconn = disc.vel_conn.data() + static_cast<size_t>(e) * tv.nsf;
    for (int a = 0; a < tp.nsf; ++a) {
      for (int b = 0; b < tv.nsf; ++b) {
        trips.emplace_back(pconn[a], vconn[b], bx[a * tv.nsf + b]);
        trips.emplace_back(pconn[a], nv + vconn[b], by[a * tv.nsf + b]);
      }
    }
  }
  return from_triplets(disc.n_pre_dofs, disc.n_vel_dofs, trips);
}

SpMat assemble_stabilization(const MixedDiscretization& disc, const PhaseGrid& grid,
                             int quad_order) {
  if (disc.pair != ElementPair::Q1Q1) return SpMat(disc.n_pre_dofs, disc.n_pre_dofs);

  const GaussRule g = gauss1d(effective_order(disc, quad_order));
  const ShapeTable tp = tensor_shapes(1, g);
  const double detj = 0.25 * disc.h * disc.h;
  const double area = disc.h * disc.h;
  const int nsf = tp.nsf;

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(grid.n_elems()) * nsf * nsf);
  std::vector<double> me(static_cast<size_t>(nsf) * nsf), avg(nsf);
  for (int e = 0; e < grid.n_elems(); ++e) {
    std::fill(me.begin(), me.end(), 0.0);
    std::fill(avg.begin(), avg.end(), 0.0);
    for (int q = 0; q < tp.nq; ++q) {
      const double c = tp.qw[q] * detj;
      const double* v = &tp.val[static_cast<size_t>(q) * nsf];
      for (int a = 0; a < nsf; ++a) {
        avg[a] += c * v[a];
        for (int b = 0; b < nsf; ++b) me[a * nsf + b] += c * (v[a] * v[b]);
      }
    }
    const double winv = 1.0 / grid.mu[e];
    const int* conn = disc.pre_conn.data() + static_cast<size_t>(e) * nsf;
    for (int a = 0; a < nsf; ++a)
      for (int b = 0; b < nsf; ++b)
        trips.emplace_back(conn[a], conn[b],
                           winv * (me[a * nsf + b] - avg[a] * avg[b] / area));
  }
  return from_triplets(disc.n_pre_dofs, disc.n_pre_dofs, trips);
}

SpMat assemble_pressure_mass(const MixedDiscretization& disc, const PhaseGrid& grid,
                             Weight weight, int quad_order) {
  const GaussRule g = gauss1d(effective_order(disc, quad_order));
  const ShapeTable tp = pressure_shapes(disc, g);
  const double detj = 0.25 * disc.h * disc.h;
  const int nsf = tp.nsf;

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(grid.n_elems()) * nsf * nsf);
  std::vector<double> local(static_cast<size_t>(nsf) * nsf);
  for (int e = 0; e < grid.n_elems(); ++e) {
    const double we = weight_value(weight, grid, e);
    std::fill(local.begin(), local.end(), 0.0);
    for (int q = 0; q < tp.nq; ++q) {
      const double c = tp.qw[q] * detj;
      const double* v = &tp.val[static_cast<size_t>(q) * nsf];
      for (int a = 0; a < nsf; ++a)
        for (int b = 0; b < nsf; ++b) local[a * nsf + b] += c * (v[a] * v[b]);
    }
    const int* conn = disc.pre_conn.data() + static_cast<size_t>(e) * nsf;
    for (int a = 0; a < nsf; ++a)
      for (int b = 0; b < nsf; ++b)
        trips.emplace_back(conn[a], conn[b], we * local[a * nsf + b]);
  }
  return from_triplets(disc.n_pre_dofs, disc.n_pre_dofs, trips);
}

namespace {

// Nonconforming Laplacian for P-1 pressure. The element means couple through
// the five-point edge stencil with the primitive coefficient averaged
// arithmetically across each edge; the slope components carry their broken
// element-gradient energy and stay decoupled from the means, mirroring the
// P0-shadow construction the preconditioner operators are built on.
SpMat pm1_pressure_laplacian(const MixedDiscretization& disc, const PhaseGrid& grid,
                             Weight weight) {
  const int n = disc.n_per_side;
  const double h = disc.h;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(grid.n_elems()) * 6);

  for (int e = 0; e < grid.n_elems(); ++e) {
    const double we = weight_value(weight, grid, e);
    trips.emplace_back(3 * e + 1, 3 * e + 1, we * h * h);
    trips.emplace_back(3 * e + 2, 3 * e + 2, we * h * h);
  }

  auto add_edge = [&](int e, int f, double omega) {
    trips.emplace_back(3 * e, 3 * e, omega);
    trips.emplace_back(3 * f, 3 * f, omega);
    trips.emplace_back(3 * e, 3 * f, -omega);
    trips.emplace_back(3 * f, 3 * e, -omega);
  };

  for (int ey = 0; ey < n; ++ey)
    for (int ex = 0; ex + 1 < n; ++ex) {
      const int e = ey * n + ex;
      add_edge(e, e + 1, edge_weight_value(weight, grid, e, e + 1));
    }
  for (int ey = 0; ey + 1 < n; ++ey)
    for (int ex = 0; ex < n; ++ex) {
      const int e = ey * n + ex;
      add_edge(e, e + n, edge_weight_value(weight, grid, e, e + n));
    }
  return from_triplets(disc.n_pre_dofs, disc.n_pre_dofs, trips);
}

} // namespace

SpMat assemble_pressure_laplacian(const MixedDiscretization& disc, const PhaseGrid& grid,
                                  Weight weight, int quad_order) {
  if (disc.pair == ElementPair::Q2Pm1) return pm1_pressure_laplacian(disc, grid, weight);

  const GaussRule g = gauss1d(effective_order(disc, quad_order));
  const ShapeTable tp = tensor_shapes(1, g);
  const double detj = 0.25 * disc.h * disc.h;
  const double jinv = 2.0 / disc.h;
  const int nsf = tp.nsf;

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(grid.n_elems()) * nsf * nsf);
  std::vector<double> local(static_cast<size_t>(nsf) * nsf);
  for (int e = 0; e < grid.n_elems(); ++e) {
    const double we = weight_value(weight, grid, e);
    std::fill(local.begin(), local.end(), 0.0);
    for (int q = 0; q < tp.nq; ++q) {
      const double c = tp.qw[q] * detj * jinv * jinv;
      const double* sx = &tp.dxi[static_cast<size_t>(q) * nsf];
      const double* sy = &tp.deta[static_cast<size_t>(q) * nsf];
      for (int a = 0; a < nsf; ++a)
        for (int b = 0; b < nsf; ++b)
          local[a * nsf + b] += c * (sx[a] * sx[b] + sy[a] * sy[b]);
    }
    const int* conn = disc.pre_conn.data() + static_cast<size_t>(e) * nsf;
    for (int a = 0; a < nsf; ++a)
      for (int b = 0; b < nsf; ++b)
        trips.emplace_back(conn[a], conn[b], we * local[a * nsf + b]);
  }
  return from_triplets(disc.n_pre_dofs, disc.n_pre_dofs, trips);
}

SpMat assemble_streamline_diffusion(const MixedDiscretization& disc, const PhaseGrid& grid,
                                    const Vec& wind, int quad_order) {
  check_wind(disc, wind);
  if (is_zero_wind(wind)) return SpMat(disc.n_vel_dofs, disc.n_vel_dofs);

  const GaussRule g = gauss1d(effective_order(disc, quad_order));
  const ShapeTable t = tensor_shapes(velocity_degree(disc), g);
  const GaussRule gc = gauss1d(1);
  const ShapeTable tc = tensor_shapes(velocity_degree(disc), gc);
  const double detj = 0.25 * disc.h * disc.h;
  const double jinv = 2.0 / disc.h;
  const int nv = disc.n_vel_nodes;
  const int nsf = t.nsf;

  std::vector<Triplet> trips;
  std::vector<double> local(static_cast<size_t>(nsf) * nsf);
  for (int e = 0; e < grid.n_elems(); ++e) {
    const int* conn = disc.vel_conn.data() + static_cast<size_t>(e) * nsf;
    double cx = 0.0, cy = 0.0;
    for (int a = 0; a < nsf; ++a) {
      cx += tc.val[a] * wind[conn[a]];
      cy += tc.val[a] * wind[nv + conn[a]];
    }
    const double speed = std::hypot(cx, cy);
    if (speed == 0.0) continue;
    const double peclet = grid.rho[e] * speed * disc.h / (2.0 * grid.mu[e]);
    if (peclet <= 1.0) continue;
    const double delta = 0.5 * disc.h / speed * (1.0 - 1.0 / peclet);

    std::fill(local.begin(), local.end(), 0.0);
    for (int q = 0; q < t.nq; ++q) {
      double wx = 0.0, wy = 0.0;
      for (int a = 0; a < nsf; ++a) {
        const double v = t.val[static_cast<size_t>(q) * nsf + a];
        wx += v * wind[conn[a]];
        wy += v * wind[nv + conn[a]];
      }
      const double c = t.qw[q] * detj;
      for (int a = 0; a < nsf; ++a) {
        const double da = wx * jinv * t.dxi[static_cast<size_t>(q) * nsf + a] +
                          wy * jinv * t.deta[static_cast<size_t>(q) * nsf + a];
        for (int b = 0; b < nsf; ++b) {
          const double db = wx * jinv * t.dxi[static_cast<size_t>(q) * nsf + b] +
                            wy * jinv * t.deta[static_cast<size_t>(q) * nsf + b];
          local[a * nsf + b] += c * da * db;
        }
      }
    }
    const double scale = delta * grid.rho[e];
    for (int a = 0; a < nsf; ++a) {
      for (int b = 0; b < nsf; ++b) {
        const double m = scale * local[a * nsf + b];
        trips.emplace_back(conn[a], conn[b], m);
        trips.emplace_back(nv + conn[a], nv + conn[b], m);
      }
    }
  }
  return from_triplets(disc.n_vel_dofs, disc.n_vel_dofs, trips);
}

PressureOperators assemble_pressure_operators(const MixedDiscretization& disc,
                                              const PhaseGrid& grid, const Vec& wind,
                                              int quad_order) {
  PressureOperators ops;
  ops.Mp_one = assemble_pressure_mass(disc, grid, Weight::One, quad_order);
  ops.Mp_rho = assemble_pressure_mass(disc, grid, Weight::Rho, quad_order);
  ops.Mp_inv2mu = assemble_pressure_mass(disc, grid, Weight::Inv2Mu, quad_order);
  ops.Mp_invmu = assemble_pressure_mass(disc, grid, Weight::InvMu, quad_order);
  ops.Ap_one = assemble_pressure_laplacian(disc, grid, Weight::One, quad_order);
  ops.Ap_invrho = assemble_pressure_laplacian(disc, grid, Weight::InvRho, quad_order);
  ops.Ap_mu = assemble_pressure_laplacian(disc, grid, Weight::Mu, quad_order);
  ops.Np_one = assemble_convection(disc, grid, wind, Weight::One, OperatorSpace::Pressure, quad_order);
  ops.Np_rho = assemble_convection(disc, grid, wind, Weight::Rho, OperatorSpace::Pressure, quad_order);
  return ops;
}

SpMat build_Fp(const PressureOperators& ops, double alpha, double dt,
               Weight conv_weight, Weight mass_weight) {
  if ((conv_weight != Weight::One && conv_weight != Weight::Rho) ||
      (mass_weight != Weight::One && mass_weight != Weight::Rho)) {
    throw std::invalid_argument("build_Fp weights must be One or Rho");
  }
  const SpMat& Np = conv_weight == Weight::Rho ? ops.Np_rho : ops.Np_one;
  const SpMat& Mp = mass_weight == Weight::Rho ? ops.Mp_rho : ops.Mp_one;
  if (ops.Ap_mu.rows() != Mp.rows() || (Np.rows() != 0 && Np.rows() != Mp.rows())) {
    throw std::invalid_argument("build_Fp operators live on different spaces");
  }
  SpMat Fp = ops.Ap_mu;
  if (Np.nonZeros() > 0) Fp += Np;
  if (alpha != 0.0) Fp += SpMat((alpha / dt) * Mp);
  Fp.makeCompressed();
  return Fp;
}

SpMat select_submatrix(const SpMat& A, const std::vector<int>& rows,
                       const std::vector<int>& cols) {
  std::vector<Index> rmap(A.rows(), -1), cmap(A.cols(), -1);
  for (size_t i = 0; i < rows.size(); ++i) rmap[rows[i]] = static_cast<Index>(i);
  for (size_t j = 0; j < cols.size(); ++j) cmap[cols[j]] = static_cast<Index>(j);

  std::vector<Triplet> trips;
  trips.reserve(A.nonZeros());
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      const Index r = rmap[it.row()];
      const Index c = cmap[it.col()];
      if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
    }
  }
  SpMat S(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  S.setFromTriplets(trips.begin(), trips.end());
  S.makeCompressed();
  return S;
}

void write_matrix_market(const SpMat& A, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << " " << A.cols() << " " << A.nonZeros() << "\n";
  char buf[64];
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%ld %ld %.17g\n", static_cast<long>(it.row() + 1),
                    static_cast<long>(it.col() + 1), it.value());
      out << buf;
    }
  }
}

} // namespace oseen2p
