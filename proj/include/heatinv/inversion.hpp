// SPDX-FileCopyrightText: Copyright (c) 2026 The heatinv authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "heatinv/errors.hpp"
#include "heatinv/fd.hpp"
#include "heatinv/geometry.hpp"
#include "heatinv/loss.hpp"
#include "heatinv/net.hpp"
#include "heatinv/optimizer.hpp"
#include "heatinv/rng.hpp"
#include "heatinv/sampling.hpp"

namespace heatinv {

enum class InitScheme { Transfer, Xavier };

struct TrainConfig {
  LossWeights weights;          // defaults (1, 1, 1e4)
  int iterations = 5000;
  double learning_rate = 1e-3;
  int collocation_interior = 4000;
  int collocation_per_edge = 100;
  double residual_unit = 0.01;  // m; see Batches::residual_unit
  std::uint64_t seed = 0;
  bool phi_trainable = true;
  std::vector<int> hidden = {50, 50, 50, 50};
  InitScheme init = InitScheme::Transfer;

  std::vector<int> widths() const {
    std::vector<int> w;
    w.push_back(2);
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(1);
    return w;
  }

  void check() const {
    if (weights.pde < 0 || weights.bc < 0 || weights.data < 0)
      throw validation_error("train config: weights must be >= 0");
    if (iterations < 1) throw validation_error("train config: iterations must be >= 1");
    if (collocation_interior < 1 || collocation_per_edge < 1)
      throw validation_error("train config: collocation counts must be >= 1");
    if (!(learning_rate > 0)) throw validation_error("train config: learning rate must be > 0");
    if (!(residual_unit > 0)) throw validation_error("train config: residual unit must be > 0");
  }
};

struct LossHistoryRow {
  int iteration = 0;
  double total = 0.0, pde = 0.0, bc = 0.0, data = 0.0;
};

struct InversionResult {
  NetParams params;
  Eigen::VectorXd phi_hat;  // W/m^2
  std::vector<LossHistoryRow> history;
  double wall_seconds = 0.0;
};

// PDE residual at a physical point: k (T_xx + T_yy) + phi(p), with the
// network jets mapped from normalized to physical coordinates.
template <typename PhiAt>
double pde_residual(const NetParams& params, double conductivity, const PhiAt& phi_at,
                    const Point2& p) {
  const Jet2 jet = eval_jet(params, params.norm.to_unit(p));
  const double sx = params.norm.du_dx();
  const double sy = params.norm.dv_dy();
  return conductivity * (sx * sx * jet.dxx + sy * sy * jet.dyy) + phi_at(p);
}

// Fixed training sets: interior collocation by Latin hypercube, boundary
// points equispaced at midpoints along each edge (corners excluded, their
// normal is ambiguous). Deterministic per seed and reused across all
// iterations.
inline Batches collocation_sets(const DomainSpec& spec, const TrainConfig& cfg,
                                std::uint64_t seed) {
  cfg.check();
  Batches batches;
  batches.conductivity = spec.conductivity;
  batches.residual_unit = cfg.residual_unit;

  const PositionSet interior =
      lhs_sample(cfg.collocation_interior, spec, substream(seed, "collocation-interior"));
  batches.pde = interior.points;
  batches.pde_source.resize(batches.pde.size());
  for (std::size_t i = 0; i < batches.pde.size(); ++i)
    batches.pde_source[i] = source_index_at(spec, batches.pde[i]);

  for (const Edge e : {Edge::Bottom, Edge::Right, Edge::Top, Edge::Left}) {
    const double len = spec.edge_length(e);
    for (int i = 0; i < cfg.collocation_per_edge; ++i) {
      const double t = (i + 0.5) / cfg.collocation_per_edge * len;
      BoundaryPointData bp;
      switch (e) {
        case Edge::Bottom: bp.p = {t, 0.0}; bp.nx = 0; bp.ny = -1; break;
        case Edge::Right: bp.p = {spec.Lx, t}; bp.nx = 1; bp.ny = 0; break;
        case Edge::Top: bp.p = {t, spec.Ly}; bp.nx = 0; bp.ny = 1; break;
        case Edge::Left: bp.p = {0.0, t}; bp.nx = -1; bp.ny = 0; break;
      }
      const BoundaryCondition& bc = spec.bc_at(e, t);
      bp.kind = bc.kind;
      bp.T0 = bc.T0;
      bp.h_conv = bc.h_conv;
      batches.bc.push_back(bp);
    }
  }
  return batches;
}

namespace detail {

// Shared training loop for pretraining and inversion. phi is parameterized
// as phi_j = scale_j * nu_j with scale_j the rated intensity (or 1 when the
// rated value is zero), so the optimizer sees O(1) unknowns.
inline InversionResult train_loop(const DomainSpec& spec, NetParams params, Batches batches,
                                  const TrainConfig& cfg, bool phi_trainable) {
  const auto t_start = std::chrono::steady_clock::now();
  const int n = static_cast<int>(spec.sources.size());

  Eigen::VectorXd scale(n), nu(n);
  for (int j = 0; j < n; ++j) {
    scale[j] = spec.sources[j].rated_intensity > 0 ? spec.sources[j].rated_intensity : 1.0;
    nu[j] = spec.sources[j].rated_intensity / scale[j];
  }

  OptState state = make_opt_state(params, n, cfg.learning_rate, phi_trainable);
  ParamGrads grads;
  Eigen::VectorXd grad_phi(n), grad_nu(n);
  LossWorkspace workspace;

  InversionResult result;
  result.history.reserve(cfg.iterations);
  for (int it = 0; it < cfg.iterations; ++it) {
    const Eigen::VectorXd phi = scale.cwiseProduct(nu);
    const LossValue loss =
        loss_and_grads(params, phi, batches, cfg.weights, &grads, &grad_phi, &workspace);
    if (!std::isfinite(loss.total))
      throw training_error("training diverged (non-finite loss) at iteration " +
                           std::to_string(it));
    grad_nu = grad_phi.cwiseProduct(scale);
    opt_step(state, params, nu, grads, grad_nu);
    result.history.push_back({it, loss.total, loss.pde, loss.bc, loss.data});
  }

  result.params = std::move(params);
  result.phi_hat = scale.cwiseProduct(nu);
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

}  // namespace detail

// Model initialization: fit the rated-intensity field from physics alone
// (PDE + boundary residuals, no observations) and return the trained
// parameters for transfer.
inline NetParams pretrain(const DomainSpec& spec, const TrainConfig& cfg) {
  validate(spec);
  cfg.check();
  NetParams params =
      init_xavier(cfg.widths(), substream(cfg.seed, "init"), Normalization::for_domain(spec));
  Batches batches = collocation_sets(spec, cfg, cfg.seed);

  TrainConfig pre_cfg = cfg;
  pre_cfg.weights.data = 0.0;  // no observation term during initialization
  return detail::train_loop(spec, std::move(params), std::move(batches), pre_cfg,
                            /*phi_trainable=*/false)
      .params;
}

// Inversion: continue from pretrained (or otherwise initialized) parameters,
// adding the observation misfit term and training the intensities alongside
// the network. Observation values are attached to the sensors' exact
// physical coordinates.
inline InversionResult invert(const DomainSpec& spec, const NetParams& pretrained,
                              const PositionSet& sensors, const Eigen::VectorXd& obs_values,
                              const TrainConfig& cfg) {
  validate(spec);
  cfg.check();
  if (cfg.weights.data > 0 && sensors.points.empty())
    throw validation_error("invert: no observations but data weight is nonzero");
  if (obs_values.size() != static_cast<Eigen::Index>(sensors.points.size()))
    throw validation_error("invert: sensor/value count mismatch");
  if (!obs_values.allFinite()) throw validation_error("invert: observation values must be finite");

  Batches batches = collocation_sets(spec, cfg, cfg.seed);
  batches.data_points = sensors.points;
  batches.data_values = obs_values;
  return detail::train_loop(spec, pretrained, std::move(batches), cfg, cfg.phi_trainable);
}

// Evaluates the surrogate on a K x K grid for comparison against FD fields.
inline ScalarField evaluate_on_grid(const NetParams& params, const DomainSpec& spec, int K) {
  ScalarField field;
  field.grid = Grid(K, spec.Lx);
  field.values.resize(field.grid.nodes());
  Eigen::MatrixXd X(2, field.grid.nodes());
  for (int row = 0; row < K; ++row) {
    for (int col = 0; col < K; ++col) {
      const Point2 u = params.norm.to_unit(field.grid.node(row, col));
      X(0, grid_index(row, col, K)) = u.x;
      X(1, grid_index(row, col, K)) = u.y;
    }
  }
  const ForwardTrace trace = eval_jets(params, X);
  for (int i = 0; i < field.grid.nodes(); ++i)
    field.values[i] = params.norm.t_offset + params.norm.t_scale * trace.output().v()(0, i);
  return field;
}

// Observation values bilinearly interpolated from a ground-truth field.
inline Eigen::VectorXd observations_from_field(const ScalarField& truth,
                                               const PositionSet& sensors) {
  Eigen::VectorXd values(sensors.points.size());
  for (std::size_t i = 0; i < sensors.points.size(); ++i)
    values[static_cast<Eigen::Index>(i)] = truth.interpolate(sensors.points[i]);
  return values;
}

}  // namespace heatinv
