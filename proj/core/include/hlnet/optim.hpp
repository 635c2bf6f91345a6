#pragma once

#include <vector>

#include "hlnet/nn.hpp"

namespace hlnet {

struct OptimizerState {
  double learning_rate = 1e-3;
  double momentum = 0.9;
  std::vector<std::vector<double>> velocity;  // one buffer per registered parameter
};

OptimizerState make_optimizer_state(const ParamStore& params, double learning_rate, double momentum);

// v <- momentum * v + grad; p <- p - lr * v. Gradients are left in place so
// they can still be inspected; callers zero them before the next backward.
void sgd_momentum_step(OptimizerState& state, ParamStore& params);

// Rescales all gradients so their global L2 norm is at most `max_norm`.
// Returns the norm before rescaling.
double clip_grad_norm(ParamStore& params, double max_norm);

}  // namespace hlnet
