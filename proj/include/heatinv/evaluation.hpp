// SPDX-FileCopyrightText: Copyright (c) 2026 The heatinv authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>

#include "heatinv/errors.hpp"
#include "heatinv/geometry.hpp"
#include "heatinv/grid.hpp"
#include "heatinv/rng.hpp"

namespace heatinv {

// Field-error metrics, all in Kelvin:
//   mae  - mean |error| over the whole grid
//   cmae - mean |error| over nodes covered by a heat source
//   bmae - mean |error| over the outermost node ring
//   mcae - max |error| over the whole grid
struct MetricReport {
  double mae = 0.0;
  double cmae = 0.0;
  double bmae = 0.0;
  double mcae = 0.0;
};

inline MetricReport metrics(const ScalarField& pred, const ScalarField& truth,
                            const DomainSpec& spec) {
  if (pred.grid.K != truth.grid.K || pred.grid.h != truth.grid.h)
    throw validation_error("metrics: prediction and truth grids differ");
  const Grid& g = pred.grid;

  MetricReport r;
  double sum = 0.0, csum = 0.0, bsum = 0.0;
  int cn = 0, bn = 0;
  for (int row = 0; row < g.K; ++row) {
    for (int col = 0; col < g.K; ++col) {
      const double d = std::abs(pred.at(row, col) - truth.at(row, col));
      sum += d;
      r.mcae = std::max(r.mcae, d);
      // component membership matches the closed-rectangle rule used for B
      if (source_index_at(spec, g.node(row, col)) >= 0) {
        csum += d;
        ++cn;
      }
      if (g.on_boundary(row, col)) {
        bsum += d;
        ++bn;
      }
    }
  }
  if (cn == 0) throw validation_error("metrics: no grid nodes inside any heat source (CMAE undefined)");
  r.mae = sum / g.nodes();
  r.cmae = csum / cn;
  r.bmae = bsum / bn;
  return r;
}

// Multiplicative Gaussian observation noise: T -> T (1 + eps g), g ~ N(0,1)
// drawn deterministically from the seed.
inline Eigen::VectorXd add_noise(const Eigen::VectorXd& values, double eps, std::uint64_t seed) {
  if (eps < 0) throw validation_error("add_noise: eps must be >= 0");
  if (eps == 0.0) return values;
  Rng rng(substream(seed, "obs-noise"));
  Eigen::VectorXd out(values.size());
  for (int i = 0; i < values.size(); ++i) out[i] = values[i] * (1.0 + eps * rng.normal());
  return out;
}

}  // namespace heatinv
