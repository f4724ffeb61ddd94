#pragma once

#include "emoface/nn/tensor.hpp"

namespace emoface::nn {

struct LossGrad {
  double value = 0.0;
  Matrix grad;  // dL/dpred, same shape as pred
};

struct PairLossGrad {
  double value = 0.0;
  Matrix grad_a;
  Matrix grad_b;
};

/// mean over rows of ||pred_i - target_i||_2 (not squared). The gradient of a
/// row with zero residual is taken as 0.
LossGrad l2_distance_rows(const Matrix& pred, const Matrix& target);

/// mean over rows of 1 - cos(a_i, b_i). A zero-norm row throws NumericError.
PairLossGrad cosine_embedding_rows(const Matrix& a, const Matrix& b);

/// Cosine similarity of two vectors (any shape, flattened). Zero norm throws.
double cosine_similarity(const Matrix& a, const Matrix& b);

/// mean of squared entries of pred - target.
LossGrad mse(const Matrix& pred, const Matrix& target);

/// sum |pred - target| / denom.
LossGrad l1_sum(const Matrix& pred, const Matrix& target, double denom);

}  // namespace emoface::nn
