// SPDX-FileCopyrightText: Copyright (c) 2026 The heatinv authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "heatinv/errors.hpp"
#include "heatinv/fd.hpp"
#include "heatinv/grid.hpp"
#include "heatinv/rng.hpp"
#include "heatinv/sampling.hpp"

namespace heatinv {

// Above this column count a full dense SVD is replaced by the sparse
// symmetric route (Lanczos on A^T A); beyond kMaxAugmentedCols we refuse.
inline constexpr int kDenseSvdLimit = 600;
inline constexpr int kMaxAugmentedCols = 3000;

// Intensity unknowns inside the augmented system are expressed in units of
// this many W/m^2 (1e4 W/m^2 = 1 W/cm^2). At this scale the intensity
// columns are commensurate with the stencil columns, so the condition
// number reflects both field and intensity identifiability instead of
// degenerating to the near-null intensity block.
inline constexpr double kIntensityScale = 1e4;

// Picks observed grid nodes out of the stacked unknown vector (T, Y): one
// row per retained observation, a single 1 in the first m columns, zeros in
// the Y block. Positions snapping to the same node collapse to one row and
// the duplication is recorded in `multiplicity`.
struct SelectionMatrix {
  int m = 0;  // grid nodes
  int n = 0;  // sources
  std::vector<int> node;          // column of the 1 per row, first-occurrence order
  std::vector<int> multiplicity;  // positions that snapped to this node

  int rows() const { return static_cast<int>(node.size()); }
  int cols() const { return m + n; }
  bool has_duplicates() const {
    return std::any_of(multiplicity.begin(), multiplicity.end(), [](int c) { return c > 1; });
  }
};

// Nearest grid node per position; exact midpoints go to the larger index.
inline int snap_to_node(const Point2& p, const Grid& grid) {
  const int col = std::clamp(static_cast<int>(std::floor(p.x / grid.h + 0.5)), 0, grid.K - 1);
  const int row = std::clamp(static_cast<int>(std::floor(p.y / grid.h + 0.5)), 0, grid.K - 1);
  return grid_index(row, col, grid.K);
}

inline SelectionMatrix selection_from_positions(const PositionSet& ps, const Grid& grid,
                                                int n_sources) {
  SelectionMatrix sel;
  sel.m = grid.nodes();
  sel.n = n_sources;
  for (const auto& p : ps.points) {
    const int nd = snap_to_node(p, grid);
    const auto it = std::find(sel.node.begin(), sel.node.end(), nd);
    if (it == sel.node.end()) {
      sel.node.push_back(nd);
      sel.multiplicity.push_back(1);
    } else {
      ++sel.multiplicity[static_cast<std::size_t>(it - sel.node.begin())];
    }
  }
  return sel;
}

// Penalty-stacked system
//   A_hat = ( lambda * (A1 | -(h^2/k) s B) )      C_hat = ( lambda C1 )
//           (             O_hat            )              (    C2     )
// with s = intensity_scale, so the recovered Y block is in units of
// s W/m^2.
struct AugmentedSystem {
  Eigen::SparseMatrix<double> A_hat;
  Eigen::VectorXd C_hat;
  double lambda = 1.0;
  double intensity_scale = kIntensityScale;
  Grid grid;
  int n_sources = 0;

  int rows() const { return static_cast<int>(A_hat.rows()); }
  int cols() const { return static_cast<int>(A_hat.cols()); }
};

inline AugmentedSystem augment(const CoefficientSystem& sys, const SelectionMatrix& sel,
                               const Eigen::VectorXd& obs_values, double lambda,
                               double intensity_scale = kIntensityScale) {
  if (!(lambda > 0)) throw validation_error("augment: lambda must be > 0");
  const int m = sys.nodes();
  const int n = sys.n_sources();
  if (sel.m != m || sel.n != n) throw validation_error("augment: selection shape mismatch");
  if (obs_values.size() != sel.rows())
    throw validation_error("augment: expected " + std::to_string(sel.rows()) +
                           " observation values, got " + std::to_string(obs_values.size()));

  AugmentedSystem aug;
  aug.lambda = lambda;
  aug.intensity_scale = intensity_scale;
  aug.grid = sys.grid;
  aug.n_sources = n;

  const double y_coef = sys.grid.h * sys.grid.h / sys.conductivity * intensity_scale;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(sys.A1.nonZeros() + sys.B.nonZeros()) + sel.node.size());
  for (int c = 0; c < sys.A1.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A1, c); it; ++it)
      t.emplace_back(static_cast<int>(it.row()), c, lambda * it.value());
  for (int c = 0; c < sys.B.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.B, c); it; ++it)
      t.emplace_back(static_cast<int>(it.row()), m + c, -lambda * y_coef * it.value());
  for (int r = 0; r < sel.rows(); ++r) t.emplace_back(m + r, sel.node[r], 1.0);

  aug.A_hat.resize(m + sel.rows(), m + n);
  aug.A_hat.setFromTriplets(t.begin(), t.end());
  aug.C_hat.resize(m + sel.rows());
  aug.C_hat.head(m) = lambda * sys.C1;
  aug.C_hat.tail(sel.rows()) = obs_values;
  return aug;
}

namespace detail {

// Largest eigenvalue of a symmetric positive (semi)definite operator by
// Lanczos with full reorthogonalization. `apply` maps v -> Op v.
template <typename Apply>
double lanczos_largest(int dim, const Apply& apply, int max_iter = 400, double tol = 1e-13) {
  max_iter = std::min(max_iter, dim);
  Eigen::MatrixXd V(dim, max_iter + 1);
  Eigen::VectorXd alpha(max_iter), beta(max_iter);
  Rng rng(0x5eedba5eull);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.uniform() - 0.5;
  v.normalize();
  V.col(0) = v;

  double prev = 0.0;
  int j = 0;
  for (; j < max_iter; ++j) {
    Eigen::VectorXd w = apply(V.col(j));
    alpha[j] = V.col(j).dot(w);
    w -= alpha[j] * V.col(j);
    if (j > 0) w -= beta[j - 1] * V.col(j - 1);
    // two passes of reorthogonalization keep the basis clean
    for (int pass = 0; pass < 2; ++pass)
      w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
    beta[j] = w.norm();

    const bool breakdown = beta[j] < 1e-14;
    if (breakdown || j + 1 == max_iter || (j % 8 == 7)) {
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(j + 1, j + 1);
      for (int i = 0; i <= j; ++i) {
        T(i, i) = alpha[i];
        if (i < j) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
      const double lam = es.eigenvalues().maxCoeff();
      if (breakdown || std::abs(lam - prev) <= tol * std::max(1.0, std::abs(lam))) return lam;
      prev = lam;
    }
    if (beta[j] < 1e-14) break;
    V.col(j + 1) = w / beta[j];
  }
  return prev;
}

inline double condition_number_dense(const Eigen::MatrixXd& A) {
  if (A.rows() < A.cols()) return std::numeric_limits<double>::infinity();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (!(smin > 1e-12 * smax)) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

inline double condition_number_sparse(const Eigen::SparseMatrix<double>& A) {
  if (A.rows() < A.cols()) return std::numeric_limits<double>::infinity();
  const Eigen::SparseMatrix<double> At = A.transpose();
  Eigen::SparseMatrix<double> G = At * A;
  const int dim = static_cast<int>(G.rows());

  const double lmax = lanczos_largest(dim, [&](const Eigen::VectorXd& v) { return G * v; });

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  ldlt.compute(G);
  if (ldlt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const double d_min = ldlt.vectorD().minCoeff();
  if (!(d_min > 0) || !std::isfinite(d_min)) return std::numeric_limits<double>::infinity();

  const double inv_lmin = lanczos_largest(dim, [&](const Eigen::VectorXd& v) {
    return Eigen::VectorXd(ldlt.solve(v));
  });
  if (!(inv_lmin > 0) || !std::isfinite(inv_lmin)) return std::numeric_limits<double>::infinity();
  const double lmin = 1.0 / inv_lmin;
  if (!(lmin > 1e-24 * lmax)) return std::numeric_limits<double>::infinity();
  return std::sqrt(lmax / lmin);
}

}  // namespace detail

// sigma_max / sigma_min of a rectangular matrix; +inf when rank deficient
// (sigma_min <= 1e-12 sigma_max) or when there are fewer rows than columns.
// Small systems use a full dense SVD; larger ones go through Lanczos on the
// normal matrix, which agrees with the dense route to ~1e-6 at the scales
// used here (see the placement tests).
inline double condition_number(const Eigen::MatrixXd& A) {
  if (A.cols() > kMaxAugmentedCols)
    throw size_error("condition_number: " + std::to_string(A.cols()) + " columns exceeds limit " +
                     std::to_string(kMaxAugmentedCols));
  if (A.cols() <= kDenseSvdLimit) return detail::condition_number_dense(A);
  return detail::condition_number_sparse(A.sparseView());
}

inline double condition_number(const Eigen::SparseMatrix<double>& A) {
  if (A.cols() > kMaxAugmentedCols)
    throw size_error("condition_number: " + std::to_string(A.cols()) + " columns exceeds limit " +
                     std::to_string(kMaxAugmentedCols));
  if (A.cols() <= kDenseSvdLimit) return detail::condition_number_dense(Eigen::MatrixXd(A));
  return detail::condition_number_sparse(A);
}

inline double condition_number(const AugmentedSystem& aug) { return condition_number(aug.A_hat); }

struct PlacementCandidate {
  PositionSet positions;
  SelectionMatrix selection;
  double kappa = std::numeric_limits<double>::infinity();
};

struct RankingEntry {
  int candidate_id = 0;
  Provenance provenance = Provenance::Manual;
  int n_obs = 0;
  double kappa = std::numeric_limits<double>::infinity();
};

// Evaluates kappa for every candidate position set against the same
// coefficient system and returns the minimizer (ties: first occurrence).
// The per-candidate table can be captured through `table`.
inline PlacementCandidate select_positions(const std::vector<PositionSet>& candidates,
                                           const CoefficientSystem& sys, double lambda,
                                           std::vector<RankingEntry>* table = nullptr) {
  if (candidates.empty()) throw validation_error("select_positions: no candidates");
  PlacementCandidate best;
  int best_id = -1;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    SelectionMatrix sel = selection_from_positions(candidates[i], sys.grid, sys.n_sources());
    const AugmentedSystem aug =
        augment(sys, sel, Eigen::VectorXd::Zero(sel.rows()), lambda);
    const double kappa = condition_number(aug);
    if (table)
      table->push_back({static_cast<int>(i), candidates[i].provenance,
                        static_cast<int>(candidates[i].size()), kappa});
    if (best_id < 0 || kappa < best.kappa) {
      best_id = static_cast<int>(i);
      best.positions = candidates[i];
      best.selection = std::move(sel);
      best.kappa = kappa;
    }
  }
  if (!std::isfinite(best.kappa))
    throw placement_error("select_positions: every candidate is rank deficient (kappa = inf)");
  return best;
}

struct Reconstruction {
  ScalarField temperature;
  Eigen::VectorXd intensities;  // W/m^2
};

// Minimum-residual solution of || A_hat x - C_hat ||_2. Dense systems use a
// complete orthogonal decomposition; larger ones solve the normal equations
// with two steps of iterative refinement and verify that the residual is
// orthogonal to the column space.
inline Reconstruction least_squares_reconstruct(const AugmentedSystem& aug) {
  const int m = aug.grid.nodes();
  Eigen::VectorXd x;
  if (aug.cols() <= kDenseSvdLimit) {
    const Eigen::MatrixXd A(aug.A_hat);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    if (cod.rank() < aug.cols())
      throw singular_error("least_squares_reconstruct: rank-deficient system");
    x = cod.solve(aug.C_hat);
  } else {
    const Eigen::SparseMatrix<double> At = aug.A_hat.transpose();
    const Eigen::SparseMatrix<double> G = At * aug.A_hat;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.compute(G);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0))
      throw singular_error("least_squares_reconstruct: rank-deficient system");
    x = ldlt.solve(At * aug.C_hat);
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd r = aug.C_hat - aug.A_hat * x;
      x += ldlt.solve(At * r);
    }
  }
  const Eigen::VectorXd r = aug.C_hat - aug.A_hat * x;
  const double ortho = (aug.A_hat.transpose() * r).norm();
  if (ortho > 1e-8 * std::max(1.0, (aug.A_hat.transpose() * aug.C_hat).norm()))
    throw singular_error("least_squares_reconstruct: residual not orthogonal, system too ill-conditioned");

  Reconstruction rec;
  rec.temperature.grid = aug.grid;
  rec.temperature.values = x.head(m);
  rec.intensities = aug.intensity_scale * x.tail(aug.n_sources);
  return rec;
}

// One perturbation trial of the least-squares error bound
//   |dx| / |x|  <=  kappa / cos(theta) * |dC| / |C|,  cos(theta) = |A x| / |C|.
struct BoundTrial {
  double rel_error = 0.0;        // |dx| / |x|
  double rel_perturbation = 0.0; // |dC| / |C|
  double cos_theta = 0.0;
  double bound = 0.0;            // kappa / cos(theta) * rel_perturbation
  double bound_m1 = 0.0;         // same with cos(theta) relaxed to 1
  bool defined = true;           // false when x = 0
  bool holds = true;
};

struct BoundReport {
  double kappa = 0.0;
  std::vector<BoundTrial> trials;
  bool all_hold = true;
};

// Checks the bound on a generic full-column-rank dense system; when
// trials > 1, additional random perturbations with the same norm as
// delta_C are drawn from `seed`.
inline BoundReport verify_error_bound(const Eigen::MatrixXd& A, const Eigen::VectorXd& C,
                                      const Eigen::VectorXd& delta_C, int trials = 1,
                                      std::uint64_t seed = 0) {
  if (trials < 1) throw validation_error("verify_error_bound: trials must be >= 1");
  if (C.size() != A.rows() || delta_C.size() != A.rows())
    throw validation_error("verify_error_bound: vector length mismatch");
  if (!(C.norm() > 0)) throw validation_error("verify_error_bound: C must be nonzero");
  if (A.cols() > kDenseSvdLimit)
    throw size_error("verify_error_bound: system too large for the dense analysis");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 1e-12 * s(0)))
    throw singular_error("verify_error_bound: system is rank deficient");

  BoundReport report;
  report.kappa = s(0) / smin;
  const Eigen::VectorXd x = svd.solve(C);
  const double x_norm = x.norm();
  const double c_norm = C.norm();
  const double cos_theta = (A * x).norm() / c_norm;

  Rng rng(substream(seed, "bound-perturbation"));
  const double base_norm = delta_C.norm();
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd dC;
    if (t == 0) {
      dC = delta_C;
    } else {
      dC.resize(A.rows());
      for (int i = 0; i < dC.size(); ++i) dC[i] = rng.normal();
      if (dC.norm() > 0) dC *= base_norm / dC.norm();
    }
    const Eigen::VectorXd dx = svd.solve(C + dC) - x;

    BoundTrial trial;
    trial.rel_perturbation = dC.norm() / c_norm;
    trial.cos_theta = cos_theta;
    trial.bound = report.kappa / cos_theta * trial.rel_perturbation;
    trial.bound_m1 = report.kappa * trial.rel_perturbation;
    if (x_norm == 0.0) {
      trial.defined = false;
      trial.holds = dx.norm() == 0.0;
    } else {
      trial.rel_error = dx.norm() / x_norm;
      trial.holds = trial.rel_error <= trial.bound * (1.0 + 1e-8);
    }
    report.all_hold = report.all_hold && trial.holds;
    report.trials.push_back(trial);
  }
  return report;
}

inline BoundReport verify_error_bound(const AugmentedSystem& aug, const Eigen::VectorXd& delta_C,
                                      int trials = 1, std::uint64_t seed = 0) {
  return verify_error_bound(Eigen::MatrixXd(aug.A_hat), aug.C_hat, delta_C, trials, seed);
}

}  // namespace heatinv
