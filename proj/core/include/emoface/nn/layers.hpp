#pragma once

#include <string>

#include "emoface/nn/tensor.hpp"

namespace emoface::nn {

/// Identity of the forward pass a cache came from. backward() rejects a
/// cache produced by another layer instance or before a parameter update.
struct CacheTag {
  const void* owner = nullptr;
  std::uint64_t version = 0;
};

void check_cache(const CacheTag& tag, const void* owner, std::uint64_t version,
                 std::string_view layer);

/// y = x W + b
class Linear : public Module {
 public:
  struct Cache {
    CacheTag tag;
    Matrix input;
  };

  Linear(std::string name, Index in, Index out, Rng& rng);

  Matrix forward(const Matrix& x, Cache& cache) const;
  /// Returns dL/dx; accumulates dL/dW and dL/db unless frozen.
  Matrix backward(const Cache& cache, const Matrix& dy);

  Index in_features() const { return weight_.value.rows(); }
  Index out_features() const { return weight_.value.cols(); }
  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }
  const std::string& name() const { return name_; }

  void collect_parameters(std::vector<Parameter*>& out) override;

 protected:
  std::string name_;
  Parameter weight_;
  Parameter bias_;
};

/// Row-wise layer normalisation with learned gain and shift.
class LayerNorm : public Module {
 public:
  struct Cache {
    CacheTag tag;
    Matrix normalized;
    Eigen::VectorXd inv_std;
  };

  LayerNorm(std::string name, Index features, double eps = 1e-5);

  Matrix forward(const Matrix& x, Cache& cache) const;
  Matrix backward(const Cache& cache, const Matrix& dy);

  Parameter& gain() { return gain_; }
  Parameter& shift() { return shift_; }
  void collect_parameters(std::vector<Parameter*>& out) override;

 private:
  std::string name_;
  double eps_;
  Parameter gain_;
  Parameter shift_;
};

/// Pass-through; exists so the kernel has a trivially checkable layer.
class Identity {
 public:
  Matrix forward(const Matrix& x) const { return x; }
  Matrix backward(const Matrix& dy) const { return dy; }
};

// Elementwise activations. Backward functions take the forward input.
Matrix gelu(const Matrix& x);
Matrix gelu_backward(const Matrix& x, const Matrix& dy);
Matrix sigmoid(const Matrix& x);
/// Takes the sigmoid *output* y.
Matrix sigmoid_backward_from_output(const Matrix& y, const Matrix& dy);

/// Numerically stable row-wise softmax.
Matrix softmax_rows(const Matrix& x);
/// Takes the softmax output y.
Matrix softmax_rows_backward(const Matrix& y, const Matrix& dy);

/// Linear -> GELU -> Linear.
class FeedForward : public Module {
 public:
  struct Cache {
    Linear::Cache in;
    Matrix hidden_pre;
    Linear::Cache out;
  };

  FeedForward(std::string name, Index features, Index hidden, Rng& rng);
  Matrix forward(const Matrix& x, Cache& cache) const;
  Matrix backward(const Cache& cache, const Matrix& dy);
  void collect_parameters(std::vector<Parameter*>& out) override;

 private:
  Linear in_;
  Linear out_;
};

}  // namespace emoface::nn
