// SPDX-FileCopyrightText: Copyright (c) 2026 The heatinv authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <string>
#include <vector>

#include "heatinv/errors.hpp"
#include "heatinv/geometry.hpp"
#include "heatinv/grid.hpp"

namespace heatinv {

// Finite-difference discretization of the steady conduction problem on a
// K x K grid:
//   interior node:  4 t - sum(neighbors) = h^2 phi / k
//   Dirichlet node: t = T0
//   Neumann node:   t - t_inner = 0            (first-order one-sided)
//   Robin node:     (k/h + h_conv) t - (k/h) t_inner = h_conv T0
// Boundary rows are kept inside the m x m matrix so m = K^2 exactly.
struct CoefficientSystem {
  Eigen::SparseMatrix<double> A1;  // m x m
  Eigen::SparseMatrix<double> B;   // m x n, 0/1; nonzero only on interior rows
  Eigen::VectorXd C1;              // m
  Grid grid;
  double conductivity = 1.0;

  int nodes() const { return grid.nodes(); }
  int n_sources() const { return static_cast<int>(B.cols()); }
};

namespace detail {

// Boundary nodes can lie on two edges (corners). The governing condition is
// chosen by kind first (Dirichlet beats Robin beats Neumann), then by fixed
// edge order, so assembly is deterministic.
struct EdgeHit {
  Edge edge;
  BoundaryCondition bc;
};

inline int bc_rank(BcKind k) {
  switch (k) {
    case BcKind::Dirichlet: return 0;
    case BcKind::Robin: return 1;
    case BcKind::Neumann: return 2;
  }
  return 3;
}

inline EdgeHit boundary_condition_for(const DomainSpec& spec, const Grid& grid, int row, int col) {
  std::vector<EdgeHit> hits;
  const Point2 p = grid.node(row, col);
  if (row == 0) hits.push_back({Edge::Bottom, spec.bc_at(Edge::Bottom, p.x)});
  if (col == grid.K - 1) hits.push_back({Edge::Right, spec.bc_at(Edge::Right, p.y)});
  if (row == grid.K - 1) hits.push_back({Edge::Top, spec.bc_at(Edge::Top, p.x)});
  if (col == 0) hits.push_back({Edge::Left, spec.bc_at(Edge::Left, p.y)});
  EdgeHit best = hits.front();
  for (const auto& h : hits) {
    if (bc_rank(h.bc.kind) < bc_rank(best.bc.kind)) best = h;
  }
  return best;
}

inline int inward_neighbor(const Grid& grid, Edge e, int row, int col) {
  switch (e) {
    case Edge::Bottom: return grid_index(row + 1, col, grid.K);
    case Edge::Top: return grid_index(row - 1, col, grid.K);
    case Edge::Left: return grid_index(row, col + 1, grid.K);
    case Edge::Right: return grid_index(row, col - 1, grid.K);
  }
  return -1;
}

}  // namespace detail

inline CoefficientSystem assemble(const DomainSpec& spec, int K) {
  detail::validate_geometry(spec);
  if (K < 3) throw validation_error("assemble: K must be >= 3");

  CoefficientSystem sys;
  sys.grid = Grid(K, spec.Lx);
  sys.conductivity = spec.conductivity;
  const int m = sys.grid.nodes();
  const int n = static_cast<int>(spec.sources.size());
  const double h = sys.grid.h;
  const double k = spec.conductivity;

  std::vector<Eigen::Triplet<double>> a1;
  std::vector<Eigen::Triplet<double>> b;
  sys.C1 = Eigen::VectorXd::Zero(m);
  a1.reserve(static_cast<std::size_t>(5) * m);

  bool anchored = false;
  for (int row = 0; row < K; ++row) {
    for (int col = 0; col < K; ++col) {
      const int i = grid_index(row, col, K);
      if (!sys.grid.on_boundary(row, col)) {
        a1.emplace_back(i, i, 4.0);
        a1.emplace_back(i, grid_index(row - 1, col, K), -1.0);
        a1.emplace_back(i, grid_index(row + 1, col, K), -1.0);
        a1.emplace_back(i, grid_index(row, col - 1, K), -1.0);
        a1.emplace_back(i, grid_index(row, col + 1, K), -1.0);
        const int j = source_index_at(spec, sys.grid.node(row, col));
        if (j >= 0) b.emplace_back(i, j, 1.0);
      } else {
        const auto hit = detail::boundary_condition_for(spec, sys.grid, row, col);
        switch (hit.bc.kind) {
          case BcKind::Dirichlet:
            a1.emplace_back(i, i, 1.0);
            sys.C1[i] = hit.bc.T0;
            anchored = true;
            break;
          case BcKind::Neumann:
            a1.emplace_back(i, i, 1.0);
            a1.emplace_back(i, detail::inward_neighbor(sys.grid, hit.edge, row, col), -1.0);
            break;
          case BcKind::Robin:
            a1.emplace_back(i, i, k / h + hit.bc.h_conv);
            a1.emplace_back(i, detail::inward_neighbor(sys.grid, hit.edge, row, col), -k / h);
            sys.C1[i] = hit.bc.h_conv * hit.bc.T0;
            anchored = true;
            break;
        }
      }
    }
  }
  if (!anchored)
    throw singular_error("assemble: no Dirichlet or Robin boundary rows; system is singular");

  sys.A1.resize(m, m);
  sys.A1.setFromTriplets(a1.begin(), a1.end());
  sys.B.resize(m, n);
  sys.B.setFromTriplets(b.begin(), b.end());
  return sys;
}

namespace detail {

// Crude 1-norm condition estimate from a factorized A1, for diagnostics only.
inline double condition_estimate(Eigen::SparseLU<Eigen::SparseMatrix<double>>& lu,
                                 const Eigen::SparseMatrix<double>& A) {
  Eigen::VectorXd e = Eigen::VectorXd::Ones(A.rows()) / static_cast<double>(A.rows());
  double inv_norm = 0.0;
  for (int it = 0; it < 4; ++it) {
    Eigen::VectorXd y = lu.solve(e);
    inv_norm = y.template lpNorm<1>();
    Eigen::VectorXd s = y.array().sign();
    Eigen::VectorXd z = lu.adjoint().solve(s);
    int best = 0;
    z.cwiseAbs().maxCoeff(&best);
    e.setZero();
    e[best] = 1.0;
  }
  double a_norm = 0.0;
  for (int c = 0; c < A.outerSize(); ++c) {
    double col = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, c); it; ++it) col += std::abs(it.value());
    a_norm = std::max(a_norm, col);
  }
  return a_norm * inv_norm;
}

}  // namespace detail

// Solves A1 T = (h^2 / k) phi + C1 for an arbitrary per-node source density
// (W/m^2). phi is only applied on interior rows; boundary rows keep their
// boundary data.
inline ScalarField solve_with_node_source(const CoefficientSystem& sys, const Eigen::VectorXd& phi) {
  const int m = sys.nodes();
  if (phi.size() != m) throw validation_error("solve_with_node_source: phi length mismatch");
  Eigen::VectorXd rhs = sys.C1;
  const double scale = sys.grid.h * sys.grid.h / sys.conductivity;
  for (int row = 1; row < sys.grid.K - 1; ++row) {
    for (int col = 1; col < sys.grid.K - 1; ++col) {
      const int i = grid_index(row, col, sys.grid.K);
      rhs[i] += scale * phi[i];
    }
  }

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(sys.A1);
  if (lu.info() != Eigen::Success)
    throw singular_error("solve_forward: LU factorization failed (singular A1)");
  ScalarField field;
  field.grid = sys.grid;
  field.values = lu.solve(rhs);

  const double tol = 1e-8 * std::max(1.0, sys.C1.lpNorm<Eigen::Infinity>());
  const double resid = (sys.A1 * field.values - rhs).lpNorm<Eigen::Infinity>();
  if (resid > tol) {
    throw singular_error("solve_forward: residual " + std::to_string(resid) +
                         " exceeds tolerance; cond(A1) ~ " +
                         std::to_string(detail::condition_estimate(lu, sys.A1)));
  }
  return field;
}

// Forward solve with per-source intensities Y (W/m^2): A1 T = (h^2/k) B Y + C1.
inline ScalarField solve_forward(const CoefficientSystem& sys, const Eigen::VectorXd& intensities) {
  if (intensities.size() != sys.n_sources())
    throw validation_error("solve_forward: expected " + std::to_string(sys.n_sources()) +
                           " intensities, got " + std::to_string(intensities.size()));
  Eigen::VectorXd phi = sys.B * intensities;
  return solve_with_node_source(sys, phi);
}

// Ground-truth and rated fields for a spec.
inline Eigen::VectorXd true_intensities(const DomainSpec& spec) {
  Eigen::VectorXd y(spec.sources.size());
  for (std::size_t j = 0; j < spec.sources.size(); ++j) y[j] = spec.sources[j].true_intensity;
  return y;
}

inline Eigen::VectorXd rated_intensities(const DomainSpec& spec) {
  Eigen::VectorXd y(spec.sources.size());
  for (std::size_t j = 0; j < spec.sources.size(); ++j) y[j] = spec.sources[j].rated_intensity;
  return y;
}

// Test transform: drops boundary rows/columns, leaving the interior operator.
// For an all-Dirichlet spec this is the classic block-tridiagonal Laplacian.
inline Eigen::SparseMatrix<double> interior_submatrix(const CoefficientSystem& sys) {
  const int K = sys.grid.K;
  const int mi = (K - 2) * (K - 2);
  std::vector<int> to_interior(sys.nodes(), -1);
  int next = 0;
  for (int row = 1; row < K - 1; ++row)
    for (int col = 1; col < K - 1; ++col) to_interior[grid_index(row, col, K)] = next++;

  std::vector<Eigen::Triplet<double>> t;
  for (int c = 0; c < sys.A1.outerSize(); ++c) {
    if (to_interior[c] < 0) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A1, c); it; ++it) {
      if (to_interior[it.row()] >= 0)
        t.emplace_back(to_interior[it.row()], to_interior[c], it.value());
    }
  }
  Eigen::SparseMatrix<double> out(mi, mi);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace heatinv
