#include "emoface/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace emoface::nn {

GradCheckResult grad_check(std::span<Parameter* const> params, const std::function<double()>& loss,
                           const std::function<void()>& accumulate, double eps) {
  for (auto* p : params) p->zero_grad();
  accumulate();
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  double gmax = 0.0;
  for (auto* p : params) {
    analytic.push_back(p->grad);
    if (p->trainable && p->grad.size() > 0) gmax = std::max(gmax, p->grad.cwiseAbs().maxCoeff());
    p->zero_grad();
  }
  const double floor = std::max(1e-3 * gmax, 1e-8);

  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    if (!p.trainable) continue;
    for (Index i = 0; i < p.value.size(); ++i) {
      double& v = p.value.data()[i];
      const double saved = v;
      v = saved + eps;
      const double up = loss();
      v = saved - eps;
      const double down = loss();
      v = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[k].data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      const double rel = std::abs(a - numeric) / denom;
      ++result.checked;
      if (rel > result.max_rel_error || result.worst_index < 0) {
        result.max_rel_error = std::max(rel, result.max_rel_error);
        if (rel >= result.max_rel_error) {
          result.worst_parameter = p.name;
          result.worst_index = i;
          result.worst_analytic = a;
          result.worst_numeric = numeric;
        }
      }
    }
  }
  return result;
}

}  // namespace emoface::nn
