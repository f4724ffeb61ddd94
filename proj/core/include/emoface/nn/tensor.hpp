#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "emoface/common/rng.hpp"

namespace emoface::nn {

/// Activations are row-major 2-D blocks: one row per token (or sample), one
/// column per feature. A batch of B sequences of length S is stored as B*S
/// consecutive rows.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

/// Throws NumericError naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);
/// Throws DimensionError unless m.cols() == cols.
void require_cols(const Matrix& m, Index cols, std::string_view what);

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool trainable = true;
  /// Bumped whenever an optimizer rewrites `value`; forward caches record it
  /// so a backward against stale activations is detected.
  std::uint64_t version = 0;

  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
  Index size() const { return value.size(); }
};

/// Something that owns parameters.
class Module {
 public:
  virtual ~Module() = default;
  virtual void collect_parameters(std::vector<Parameter*>& out) = 0;

  std::vector<Parameter*> parameters();
  /// Freezes (false) or unfreezes (true) every parameter. Frozen parameters
  /// accumulate no gradient during backward.
  void set_trainable(bool trainable);
  void zero_grad();
  std::size_t parameter_count();
};

/// Glorot-uniform initialisation.
Matrix glorot_uniform(Index rows, Index cols, Rng& rng);

}  // namespace emoface::nn
