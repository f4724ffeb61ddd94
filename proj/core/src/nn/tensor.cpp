#include "emoface/nn/tensor.hpp"

#include <cmath>

#include "emoface/common/error.hpp"

namespace emoface::nn {

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) throw NumericError("non-finite values in " + std::string(what));
}

void require_cols(const Matrix& m, Index cols, std::string_view what) {
  if (m.cols() != cols)
    throw DimensionError(std::string(what) + ": expected " + std::to_string(cols) +
                         " columns, got " + std::to_string(m.cols()));
}

std::vector<Parameter*> Module::parameters() {
  std::vector<Parameter*> out;
  collect_parameters(out);
  return out;
}

void Module::set_trainable(bool trainable) {
  for (auto* p : parameters()) {
    p->trainable = trainable;
    if (!trainable) p->zero_grad();
  }
}

void Module::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

std::size_t Module::parameter_count() {
  std::size_t n = 0;
  for (auto* p : parameters()) n += static_cast<std::size_t>(p->size());
  return n;
}

Matrix glorot_uniform(Index rows, Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-limit, limit);
  return m;
}

}  // namespace emoface::nn
