#pragma once

#include <functional>
#include <string>

#include "hlnet/nn.hpp"

namespace hlnet {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
  bool passed = true;
};

// Compares backward() gradients of loss_fn against central differences
// (f(p + eps) - f(p - eps)) / (2 eps) for every coordinate of every parameter.
// Relative error is |a - n| / max(|a|, |n|, abs_floor); the floor keeps
// near-zero gradients from reporting round-off as relative error.
GradCheckReport finite_diff_check(const std::function<DiffArray()>& loss_fn, ParamStore& params,
                                  double eps = 1e-5, double tol = 1e-4, double abs_floor = 1e-6);

}  // namespace hlnet
