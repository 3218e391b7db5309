#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <stdexcept>

#include "oseen2p/grid.hpp"

using namespace oseen2p;

TEST_CASE("air-water grid carries the scaled coefficients") {
  const auto grid = build_grid(32, 1.2e-3, 1.8e-2, 100.0);
  CHECK(grid.n_elems() == 1024);
  CHECK(grid.h == doctest::Approx(2.0 / 32).epsilon(1e-15));

  int inner = 0;
  for (int ey = 0; ey < 32; ++ey) {
    for (int ex = 0; ex < 32; ++ex) {
      const int e = grid.elem_index(ex, ey);
      const bool expect_inner = ex >= 8 && ex < 24 && ey >= 8 && ey < 24;
      CHECK(grid.elem_phase[e] == (expect_inner ? 2 : 1));
      if (expect_inner) {
        ++inner;
        CHECK(grid.rho[e] == doctest::Approx(1.2e-3).epsilon(1e-14));
        CHECK(grid.mu[e] == doctest::Approx(1.8e-4).epsilon(1e-14));
      } else {
        CHECK(grid.rho[e] == 1.0);
        CHECK(grid.mu[e] == doctest::Approx(1e-2).epsilon(1e-14));
      }
    }
  }
  CHECK(inner == 16 * 16);
}

TEST_CASE("unit ratios still mark the inner block") {
  const auto grid = build_grid(4, 1.0, 1.0, 1.0);
  CHECK(grid.rho.minCoeff() == 1.0);
  CHECK(grid.rho.maxCoeff() == 1.0);
  CHECK(grid.mu.minCoeff() == 1.0);
  int inner = 0;
  for (int e = 0; e < grid.n_elems(); ++e) inner += grid.elem_phase[e] == 2;
  CHECK(inner == 4);
}

TEST_CASE("piecewise-constant density integrates by phase area") {
  const auto grid = build_grid(8, 10.0, 10.0, 1.0);
  const double cell = grid.h * grid.h;
  double integral = 0.0;
  for (int e = 0; e < grid.n_elems(); ++e) integral += grid.rho[e] * cell;
  CHECK(integral == doctest::Approx(13.0).epsilon(1e-13)); // 3*1 + 1*10

  double area1 = 0.0, area2 = 0.0;
  for (int e = 0; e < grid.n_elems(); ++e) {
    (grid.elem_phase[e] == 1 ? area1 : area2) += cell;
  }
  CHECK(area1 == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(area2 == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("grid construction rejects bad input") {
  CHECK_THROWS_AS(build_grid(6, 1, 1, 1), std::invalid_argument);  // not divisible by 4
  CHECK_THROWS_AS(build_grid(2, 1, 1, 1), std::invalid_argument);  // too coarse
  CHECK_THROWS_AS(build_grid(8, -1, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(8, 1, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(8, 1, 1, -2), std::invalid_argument);
}

TEST_CASE("interface edges lie on |x| = 1/2 or |y| = 1/2") {
  const auto grid = build_grid(16, 0.5, 0.5, 1.0);
  const int n = grid.n_per_side;
  auto phase = [&](int ex, int ey) { return grid.elem_phase[grid.elem_index(ex, ey)]; };
  for (int ey = 0; ey < n; ++ey) {
    for (int ex = 0; ex + 1 < n; ++ex) {
      if (phase(ex, ey) != phase(ex + 1, ey)) {
        const double x_edge = -1.0 + (ex + 1) * grid.h;
        CHECK(std::abs(std::abs(x_edge) - 0.5) < 1e-14);
      }
    }
  }
  for (int ey = 0; ey + 1 < n; ++ey) {
    for (int ex = 0; ex < n; ++ex) {
      if (phase(ex, ey) != phase(ex, ey + 1)) {
        const double y_edge = -1.0 + (ey + 1) * grid.h;
        CHECK(std::abs(std::abs(y_edge) - 0.5) < 1e-14);
      }
    }
  }
}

TEST_CASE("eliminated-system DOF counts match the published table") {
  struct Row {
    ElementPair pair;
    int n;
    long dofs;
  };
  const Row rows[] = {
      {ElementPair::Q2Q1, 32, 9027},     {ElementPair::Q2Q1, 64, 36483},
      {ElementPair::Q2Q1, 128, 146691},  {ElementPair::Q2Q1, 256, 588291},
      {ElementPair::Q2Q1, 512, 2356227}, {ElementPair::Q2Pm1, 32, 11010},
      {ElementPair::Q2Pm1, 64, 44546},   {ElementPair::Q2Pm1, 128, 179202},
      {ElementPair::Q2Pm1, 256, 718850}, {ElementPair::Q2Pm1, 512, 2879490},
      {ElementPair::Q1Q1, 64, 12163},    {ElementPair::Q1Q1, 128, 48899},
      {ElementPair::Q1Q1, 256, 196099},  {ElementPair::Q1Q1, 512, 785411},
      {ElementPair::Q1Q1, 1024, 3143683},
  };
  for (const auto& row : rows) {
    CHECK(expected_dof_count(row.pair, row.n) == row.dofs);
    const auto grid = build_grid(row.n, 1.0, 1.0, 1.0);
    const auto disc = build_discretization(grid, row.pair);
    CHECK(disc.n_solve_dofs() == row.dofs);
  }
  // coarsest-grid formula value (grid itself requires n divisible by 4)
  CHECK(expected_dof_count(ElementPair::Q1Q1, 2) == 11);
}

TEST_CASE("lid profile is the regularised polynomial") {
  CHECK(lid_values(0.0)[0] == 1.0);
  CHECK(lid_values(0.0)[1] == 0.0);
  CHECK(lid_values(1.0)[0] == 0.0);
  CHECK(lid_values(-1.0)[0] == 0.0);
  CHECK(lid_values(0.5)[0] == doctest::Approx(15.0 / 16).epsilon(1e-15));
}

TEST_CASE("every boundary velocity DOF is Dirichlet and carries lid data") {
  const auto grid = build_grid(8, 1.0, 1.0, 1.0);
  for (const auto pair : {ElementPair::Q2Q1, ElementPair::Q1Q1, ElementPair::Q2Pm1}) {
    const auto disc = build_discretization(grid, pair);
    const int vps = disc.vel_nodes_per_side;
    CHECK(static_cast<int>(disc.boundary_nodes.size()) == 4 * vps - 4);
    CHECK(disc.dirichlet_vel.size() == 2 * disc.boundary_nodes.size());
    CHECK(disc.n_interior_nodes() + static_cast<int>(disc.boundary_nodes.size()) ==
          disc.n_vel_nodes);

    const Vec u = disc.boundary_velocity_values();
    std::set<int> dirichlet(disc.dirichlet_vel.begin(), disc.dirichlet_vel.end());
    for (int node = 0; node < disc.n_vel_nodes; ++node) {
      const auto [x, y] = disc.vel_coords[node];
      const bool boundary = dirichlet.count(node) > 0;
      CHECK(boundary == (std::abs(std::abs(x) - 1.0) < 1e-14 ||
                         std::abs(std::abs(y) - 1.0) < 1e-14));
      if (std::abs(y - 1.0) < 1e-14) {
        CHECK(u[node] == doctest::Approx(lid_values(x)[0]).epsilon(1e-15));
      } else {
        CHECK(u[node] == 0.0);
      }
      CHECK(u[disc.n_vel_nodes + node] == 0.0);
    }
  }
}
