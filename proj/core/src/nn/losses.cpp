#include "emoface/nn/losses.hpp"

#include <cmath>

#include "emoface/common/error.hpp"

namespace emoface::nn {
namespace {
void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError(std::string(what) + ": shape mismatch");
}
}  // namespace

LossGrad l2_distance_rows(const Matrix& pred, const Matrix& target) {
  require_same_shape(pred, target, "l2_distance_rows");
  LossGrad out;
  out.grad = Matrix::Zero(pred.rows(), pred.cols());
  const double inv_n = 1.0 / static_cast<double>(pred.rows());
  for (Index r = 0; r < pred.rows(); ++r) {
    auto diff = pred.row(r) - target.row(r);
    const double norm = diff.norm();
    out.value += norm * inv_n;
    if (norm > 0.0) out.grad.row(r) = diff * (inv_n / norm);
  }
  return out;
}

PairLossGrad cosine_embedding_rows(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "cosine_embedding_rows");
  PairLossGrad out;
  out.grad_a.resize(a.rows(), a.cols());
  out.grad_b.resize(b.rows(), b.cols());
  const double inv_n = 1.0 / static_cast<double>(a.rows());
  for (Index r = 0; r < a.rows(); ++r) {
    const double na = a.row(r).norm();
    const double nb = b.row(r).norm();
    if (na == 0.0 || nb == 0.0) throw NumericError("cosine of a zero-norm embedding");
    const double cos = a.row(r).dot(b.row(r)) / (na * nb);
    out.value += (1.0 - cos) * inv_n;
    // d cos / da = b/(|a||b|) - cos * a/|a|^2
    out.grad_a.row(r) = -inv_n * (b.row(r) / (na * nb) - cos * a.row(r) / (na * na));
    out.grad_b.row(r) = -inv_n * (a.row(r) / (na * nb) - cos * b.row(r) / (nb * nb));
  }
  return out;
}

double cosine_similarity(const Matrix& a, const Matrix& b) {
  if (a.size() != b.size()) throw DimensionError("cosine_similarity: size mismatch");
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw NumericError("cosine of a zero-norm vector");
  const Eigen::Map<const Eigen::VectorXd> va(a.data(), a.size());
  const Eigen::Map<const Eigen::VectorXd> vb(b.data(), b.size());
  return va.dot(vb) / (na * nb);
}

LossGrad mse(const Matrix& pred, const Matrix& target) {
  require_same_shape(pred, target, "mse");
  LossGrad out;
  Matrix diff = pred - target;
  const double n = static_cast<double>(diff.size());
  out.value = diff.squaredNorm() / n;
  out.grad = diff * (2.0 / n);
  return out;
}

LossGrad l1_sum(const Matrix& pred, const Matrix& target, double denom) {
  require_same_shape(pred, target, "l1_sum");
  LossGrad out;
  Matrix diff = pred - target;
  out.value = diff.cwiseAbs().sum() / denom;
  out.grad = diff.unaryExpr([denom](double d) { return (d > 0 ? 1.0 : d < 0 ? -1.0 : 0.0) / denom; });
  return out;
}

}  // namespace emoface::nn
