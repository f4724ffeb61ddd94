#pragma once

#include <functional>
#include <span>
#include <string>

#include "emoface/nn/tensor.hpp"

namespace emoface::nn {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  Index worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;  // number of scalars swept
};

/// Compares analytic gradients against central differences.
///
/// `loss` evaluates the scalar loss at the current parameter values.
/// `accumulate` runs forward + backward once, accumulating into each
/// parameter's `grad` (buffers are zeroed before the call). Every scalar of
/// every *trainable* parameter is perturbed by +/- eps; frozen parameters are
/// skipped. Inputs can be checked by wrapping them in a Parameter.
///
/// Per-coordinate error is |a - n| / max(|a|, |n|, 1e-3 * max|a|, 1e-8): the
/// floor keeps coordinates that are tiny relative to the whole gradient from
/// turning finite-difference round-off into a large relative error.
GradCheckResult grad_check(std::span<Parameter* const> params, const std::function<double()>& loss,
                           const std::function<void()>& accumulate, double eps = 1e-5);

}  // namespace emoface::nn
