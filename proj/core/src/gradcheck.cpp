#include "hlnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace hlnet {

GradCheckReport finite_diff_check(const std::function<DiffArray()>& loss_fn, ParamStore& params,
                                  double eps, double tol, double abs_floor) {
  params.zero_grad();
  loss_fn().backward();

  GradCheckReport report;
  NoGradGuard no_grad;
  for (auto& p : params.params()) {
    const std::vector<double> analytic = p.array.grad();
    auto values = p.array.mutable_values();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double original = values[k];
      values[k] = original + eps;
      const double plus = loss_fn().item();
      values[k] = original - eps;
      const double minus = loss_fn().item();
      values[k] = original;

      const double numeric = (plus - minus) / (2.0 * eps);
      const double denom = std::max({std::abs(analytic[k]), std::abs(numeric), abs_floor});
      const double rel = std::abs(analytic[k] - numeric) / denom;
      ++report.coordinates;
      if (rel > report.max_rel_error || !std::isfinite(rel)) {
        report.max_rel_error = rel;
        report.worst_param = p.id;
        report.worst_index = k;
        report.worst_analytic = analytic[k];
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = std::isfinite(report.max_rel_error) && report.max_rel_error < tol;
  return report;
}

}  // namespace hlnet
