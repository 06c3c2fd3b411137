// SPDX-FileCopyrightText: Copyright (c) 2026 The heatinv authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "heatinv/errors.hpp"
#include "heatinv/net.hpp"

namespace heatinv {

// Adam with bias correction; decay rates 0.9 / 0.999, stabilizer 1e-8.
// Holds first/second moment accumulators for the network parameters and,
// when enabled, for the auxiliary intensity vector trained alongside them.
struct OptState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;

  ParamGrads m, v;
  Eigen::VectorXd m_aux, v_aux;
  bool aux_trainable = false;
};

inline OptState make_opt_state(const NetParams& params, int n_aux, double learning_rate,
                               bool aux_trainable) {
  OptState s;
  s.learning_rate = learning_rate;
  s.aux_trainable = aux_trainable;
  s.m.set_zero_like(params);
  s.v.set_zero_like(params);
  s.m_aux = Eigen::VectorXd::Zero(n_aux);
  s.v_aux = Eigen::VectorXd::Zero(n_aux);
  return s;
}

namespace detail {

template <typename Mat>
void adam_update(Mat& param, Mat& m, Mat& v, const Mat& grad, double lr, double b1, double b2,
                 double eps, double bc1, double bc2) {
  m = b1 * m + (1.0 - b1) * grad;
  v = (b2 * v.array() + (1.0 - b2) * grad.array().square()).matrix();
  param.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
}

}  // namespace detail

// One optimizer step over the network parameters and (if trainable) the
// auxiliary vector. Throws training_error on non-finite gradients.
inline void opt_step(OptState& state, NetParams& params, Eigen::VectorXd& aux,
                     const ParamGrads& grads, const Eigen::VectorXd& grad_aux) {
  if (!grads.all_finite() || !grad_aux.allFinite())
    throw training_error("opt_step: non-finite gradient at step " + std::to_string(state.step));
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (int l = 0; l < params.layers(); ++l) {
    detail::adam_update(params.W[l], state.m.W[l], state.v.W[l], grads.W[l], state.learning_rate,
                        state.beta1, state.beta2, state.epsilon, bc1, bc2);
    detail::adam_update(params.b[l], state.m.b[l], state.v.b[l], grads.b[l], state.learning_rate,
                        state.beta1, state.beta2, state.epsilon, bc1, bc2);
  }
  if (state.aux_trainable && aux.size() > 0) {
    detail::adam_update(aux, state.m_aux, state.v_aux, grad_aux, state.learning_rate, state.beta1,
                        state.beta2, state.epsilon, bc1, bc2);
  }
}

}  // namespace heatinv
