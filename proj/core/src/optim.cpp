#include "hlnet/optim.hpp"

#include <cmath>

#include "hlnet/errors.hpp"

namespace hlnet {

OptimizerState make_optimizer_state(const ParamStore& params, double learning_rate, double momentum) {
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ConfigError("momentum must lie in [0, 1), got " + std::to_string(momentum));
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  OptimizerState state{learning_rate, momentum, {}};
  for (const auto& p : params.params()) state.velocity.emplace_back(p.array.size(), 0.0);
  return state;
}

void sgd_momentum_step(OptimizerState& state, ParamStore& params) {
  auto& list = params.params();
  if (state.velocity.size() != list.size()) {
    throw ContractError("optimizer state tracks " + std::to_string(state.velocity.size()) +
                        " parameters, store has " + std::to_string(list.size()));
  }
  for (std::size_t i = 0; i < list.size(); ++i) {
    auto& array = list[i].array;
    auto& v = state.velocity[i];
    if (v.size() != array.size()) throw ContractError("velocity shape drifted for " + list[i].id);
    auto values = array.mutable_values();
    if (!array.has_grad()) {
      for (std::size_t k = 0; k < v.size(); ++k) {
        v[k] *= state.momentum;
        values[k] -= state.learning_rate * v[k];
      }
      continue;
    }
    auto grad = array.mutable_grad();
    for (std::size_t k = 0; k < v.size(); ++k) {
      v[k] = state.momentum * v[k] + grad[k];
      values[k] -= state.learning_rate * v[k];
    }
  }
}

double clip_grad_norm(ParamStore& params, double max_norm) {
  if (!(max_norm > 0.0)) throw ConfigError("max_norm must be positive");
  double sq = 0.0;
  for (auto& p : params.params()) {
    if (!p.array.has_grad()) continue;
    for (double g : p.array.mutable_grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& p : params.params()) {
      if (!p.array.has_grad()) continue;
      for (double& g : p.array.mutable_grad()) g *= scale;
    }
  }
  return norm;
}

}  // namespace hlnet
