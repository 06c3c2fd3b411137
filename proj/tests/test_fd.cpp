// SPDX-FileCopyrightText: Copyright (c) 2026 The heatinv authors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <heatinv/fd.hpp>
#include <heatinv/rng.hpp>

using namespace heatinv;

namespace {

std::vector<HeatSource> single_source() {
  return {{{0.05, 0.05}, 0.02, 0.02, 10000.0, 12000.0}};
}

// Independent assembly oracle: builds the dense system for an all-Dirichlet
// spec with straight loops, written separately from the production path.
struct DenseOracle {
  Eigen::MatrixXd A1;
  Eigen::MatrixXd B;
  Eigen::VectorXd C1;
};

DenseOracle dirichlet_oracle(const DomainSpec& spec, int K, double T0) {
  const int m = K * K;
  const double h = spec.Lx / (K - 1);
  DenseOracle o;
  o.A1.setZero(m, m);
  o.B.setZero(m, spec.sources.size());
  o.C1.setZero(m);
  for (int r = 0; r < K; ++r) {
    for (int c = 0; c < K; ++c) {
      const int i = r * K + c;
      if (r == 0 || c == 0 || r == K - 1 || c == K - 1) {
        o.A1(i, i) = 1.0;
        o.C1[i] = T0;
        continue;
      }
      o.A1(i, i) = 4.0;
      o.A1(i, i - 1) = o.A1(i, i + 1) = o.A1(i, i - K) = o.A1(i, i + K) = -1.0;
      const double x = c * h;
      const double y = r * h;
      for (std::size_t j = 0; j < spec.sources.size(); ++j) {
        const auto& s = spec.sources[j];
        if (std::abs(x - s.center.x) <= s.width / 2 + 1e-12 &&
            std::abs(y - s.center.y) <= s.height / 2 + 1e-12)
          o.B(i, j) = 1.0;
      }
    }
  }
  return o;
}

}  // namespace

TEST_CASE("grid_index numbers nodes bottom-to-top, left-to-right") {
  CHECK(grid_index(0, 0, 50) == 0);
  CHECK(grid_index(1, 0, 50) == 50);
  CHECK(grid_index(49, 49, 50) == 2499);
  CHECK_THROWS_AS(grid_index(50, 0, 50), index_error);
  CHECK_THROWS_AS(grid_index(0, -1, 50), index_error);

  Grid g(17, 0.1);
  for (int r = 0; r < 17; ++r)
    for (int c = 0; c < 17; ++c) {
      const int i = grid_index(r, c, 17);
      CHECK(g.row_of(i) == r);
      CHECK(g.col_of(i) == c);
    }
}

TEST_CASE("assembled system matches the hand-built 5x5 oracle") {
  DomainSpec spec = case_preset(CasePreset::Case1, single_source());
  const int K = 5;
  CoefficientSystem sys = assemble(spec, K);
  DenseOracle oracle = dirichlet_oracle(spec, K, 298.0);

  CHECK((Eigen::MatrixXd(sys.A1) - oracle.A1).cwiseAbs().maxCoeff() == 0.0);
  CHECK((Eigen::MatrixXd(sys.B) - oracle.B).cwiseAbs().maxCoeff() == 0.0);
  CHECK((sys.C1 - oracle.C1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("interior operator is the block-tridiagonal Laplacian") {
  DomainSpec spec = case_preset(CasePreset::Case1, single_source());
  const int K = 8;
  const int L = K - 2;
  Eigen::MatrixXd interior(interior_submatrix(assemble(spec, K)));

  // expected: diagonal blocks tridiag(-1, 4, -1), off-diagonal blocks -I
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(L * L, L * L);
  for (int br = 0; br < L; ++br) {
    for (int i = 0; i < L; ++i) {
      const int d = br * L + i;
      expected(d, d) = 4.0;
      if (i > 0) expected(d, d - 1) = -1.0;
      if (i < L - 1) expected(d, d + 1) = -1.0;
      if (br > 0) expected(d, d - L) = -1.0;
      if (br < L - 1) expected(d, d + L) = -1.0;
    }
  }
  CHECK((interior - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero sources with uniform Dirichlet gives a constant field") {
  DomainSpec spec = case_preset(CasePreset::Case1, single_source());
  CoefficientSystem sys = assemble(spec, 21);
  ScalarField T = solve_forward(sys, Eigen::VectorXd::Zero(1));
  CHECK((T.values.array() - 298.0).abs().maxCoeff() < 1e-10);
}

TEST_CASE("manufactured solution converges at second order") {
  DomainSpec spec = case_preset(CasePreset::Case1, {});
  const auto max_err = [&](int K) {
    CoefficientSystem sys = assemble(spec, K);
    const double L = spec.Lx;
    Eigen::VectorXd phi(sys.nodes()), exact(sys.nodes());
    for (int r = 0; r < K; ++r)
      for (int c = 0; c < K; ++c) {
        const Point2 p = sys.grid.node(r, c);
        const double s = std::sin(M_PI * p.x / L) * std::sin(M_PI * p.y / L);
        exact[grid_index(r, c, K)] = 298.0 + s;
        // phi = -k lap T*, so the solve should reproduce T*
        phi[grid_index(r, c, K)] = 2.0 * (M_PI / L) * (M_PI / L) * s * spec.conductivity;
      }
    ScalarField T = solve_with_node_source(sys, phi);
    return (T.values - exact).cwiseAbs().maxCoeff();
  };
  const double e21 = max_err(21);
  const double e41 = max_err(41);
  const double ratio = e21 / e41;
  INFO("e21=" << e21 << " e41=" << e41 << " ratio=" << ratio);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("sparse solve matches a dense direct solve at K=11") {
  DomainSpec spec = case_preset(CasePreset::Case1, single_source());
  CoefficientSystem sys = assemble(spec, 11);
  ScalarField T = solve_forward(sys, true_intensities(spec));

  DenseOracle oracle = dirichlet_oracle(spec, 11, 298.0);
  const double h = sys.grid.h;
  Eigen::VectorXd rhs = h * h / spec.conductivity * (oracle.B * true_intensities(spec)) + oracle.C1;
  Eigen::VectorXd dense = oracle.A1.lu().solve(rhs);
  CHECK((T.values - dense).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("discrete maximum principle holds on Case 1") {
  DomainSpec spec = case_preset(CasePreset::Case1, single_source());
  CoefficientSystem sys = assemble(spec, 31);
  ScalarField T = solve_forward(sys, true_intensities(spec));
  CHECK(T.values.minCoeff() >= 298.0 - 1e-9);
}

TEST_CASE("solve_forward is linear in the intensities") {
  DomainSpec spec = case_preset(
      CasePreset::Case2, {{{0.03, 0.03}, 0.02, 0.02, 1.0, 1.0}, {{0.07, 0.07}, 0.02, 0.02, 1.0, 1.0}});
  CoefficientSystem sys = assemble(spec, 15);
  Eigen::VectorXd y1(2), y2(2);
  y1 << 5000.0, -2000.0;
  y2 << 1000.0, 4000.0;
  const double a = 1.7, b = -0.4;
  ScalarField lhs = solve_forward(sys, a * y1 + b * y2);
  ScalarField t1 = solve_forward(sys, y1);
  ScalarField t2 = solve_forward(sys, y2);
  ScalarField t0 = solve_forward(sys, Eigen::VectorXd::Zero(2));
  Eigen::VectorXd combo = a * t1.values + b * t2.values + (1.0 - a - b) * t0.values;
  const double scale = lhs.values.cwiseAbs().maxCoeff();
  CHECK((lhs.values - combo).cwiseAbs().maxCoeff() <= 1e-8 * scale);
}

TEST_CASE("B column sums count the nodes inside each source") {
  DomainSpec spec = case_preset(CasePreset::Case1,
                                {{{0.03, 0.03}, 0.02, 0.02, 1.0, 1.0},
                                 {{0.071, 0.052}, 0.014, 0.018, 1.0, 1.0}});
  const int K = 23;
  CoefficientSystem sys = assemble(spec, K);
  const double h = sys.grid.h;
  for (int j = 0; j < sys.n_sources(); ++j) {
    const auto& s = spec.sources[j];
    int count = 0;
    // interval-arithmetic oracle over interior nodes
    for (int r = 1; r < K - 1; ++r)
      for (int c = 1; c < K - 1; ++c) {
        if (std::abs(c * h - s.center.x) <= s.width / 2 + 1e-12 &&
            std::abs(r * h - s.center.y) <= s.height / 2 + 1e-12)
          ++count;
      }
    CHECK(Eigen::VectorXd(sys.B.col(j)).sum() == Catch::Approx(count));
    CHECK(count > 0);
  }
}

TEST_CASE("all-Neumann assembly reports a singular system") {
  DomainSpec bad;
  for (int e = 0; e < 4; ++e)
    bad.boundaries[e] = {EdgeSegment{0.0, bad.edge_length(static_cast<Edge>(e)),
                                     BoundaryCondition{BcKind::Neumann, 0.0, 0.0}}};
  CHECK_THROWS_AS(assemble(bad, 9), singular_error);
}

TEST_CASE("Neumann and Robin rows use one-sided differences") {
  DomainSpec spec = case_preset(CasePreset::Case2, {});
  spec.boundaries[static_cast<int>(Edge::Top)] = {
      EdgeSegment{0.0, 0.1, BoundaryCondition{BcKind::Robin, 290.0, 15.0}}};
  const int K = 7;
  CoefficientSystem sys = assemble(spec, K);
  const double h = sys.grid.h;
  const double k = spec.conductivity;
  Eigen::MatrixXd A1(sys.A1);

  // Neumann node on the left edge: t_b - t_inner = 0
  const int left = grid_index(3, 0, K);
  CHECK(A1(left, left) == 1.0);
  CHECK(A1(left, grid_index(3, 1, K)) == -1.0);
  CHECK(sys.C1[left] == 0.0);

  // Robin node on the top edge: (k/h + h_conv) t_b - (k/h) t_inner = h_conv T0
  const int top = grid_index(K - 1, 3, K);
  CHECK(A1(top, top) == Catch::Approx(k / h + 15.0));
  CHECK(A1(top, grid_index(K - 2, 3, K)) == Catch::Approx(-k / h));
  CHECK(sys.C1[top] == Catch::Approx(15.0 * 290.0));

  // Dirichlet wins at the bottom corners
  const int corner = grid_index(0, 0, K);
  CHECK(A1(corner, corner) == 1.0);
  CHECK(sys.C1[corner] == 298.0);
}

TEST_CASE("Robin-cooled plate solves consistently with its BC") {
  DomainSpec spec = case_preset(CasePreset::Case2, single_source());
  spec.boundaries[static_cast<int>(Edge::Top)] = {
      EdgeSegment{0.0, 0.1, BoundaryCondition{BcKind::Robin, 298.0, 40.0}}};
  CoefficientSystem sys = assemble(spec, 21);
  ScalarField T = solve_forward(sys, true_intensities(spec));
  // residual of the Robin relation at a top node
  const int K = 21;
  const double h = sys.grid.h;
  const double tb = T.at(K - 1, 10);
  const double ti = T.at(K - 2, 10);
  CHECK(spec.conductivity * (tb - ti) / h + 40.0 * (tb - 298.0) == Catch::Approx(0.0).margin(1e-8));
  CHECK(T.values.maxCoeff() > 298.0);
}

TEST_CASE("field files round-trip bitwise") {
  DomainSpec spec = case_preset(CasePreset::Case1, single_source());
  CoefficientSystem sys = assemble(spec, 9);
  ScalarField T = solve_forward(sys, true_intensities(spec));
  const std::string path = "field_roundtrip_test.txt";
  save_field(T, path);
  ScalarField back = load_field(path);
  REQUIRE(back.grid.K == T.grid.K);
  CHECK(back.grid.h == T.grid.h);
  CHECK((back.values - T.values).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("bilinear interpolation reproduces node values and plane fields") {
  ScalarField f;
  f.grid = Grid(5, 0.1);
  f.values.resize(25);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) {
      const Point2 p = f.grid.node(r, c);
      f.values[grid_index(r, c, 5)] = 2.0 + 3.0 * p.x + 7.0 * p.y;
    }
  CHECK(f.interpolate({0.05, 0.075}) == Catch::Approx(2.0 + 3.0 * 0.05 + 7.0 * 0.075));
  CHECK(f.interpolate(f.grid.node(2, 3)) == Catch::Approx(f.at(2, 3)));
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const Point2 p{rng.uniform(0.0, 0.1), rng.uniform(0.0, 0.1)};
    CHECK(f.interpolate(p) == Catch::Approx(2.0 + 3.0 * p.x + 7.0 * p.y));
  }
}
