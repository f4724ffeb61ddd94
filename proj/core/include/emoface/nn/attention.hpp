#pragma once

#include <vector>

#include "emoface/nn/layers.hpp"

namespace emoface::nn {

/// Multi-head scaled dot-product attention over a batch of sequences.
///
/// `query` holds B sequences of Sq rows each, `memory` holds B sequences of
/// Sk rows each (B is passed explicitly). Query sequence b attends only to
/// memory sequence b. Self-attention passes the same matrix twice and sums the
/// two input gradients returned by backward().
class MultiHeadAttention : public Module {
 public:
  struct Cache {
    Index batch = 0;
    Index query_len = 0;
    Index memory_len = 0;
    Linear::Cache q, k, v, o;
    Matrix queries, keys, values;
    /// probs[b * heads + h] is the Sq x Sk attention matrix.
    std::vector<Matrix> probs;
    Matrix context;
  };
  struct Gradients {
    Matrix query;
    Matrix memory;
  };

  MultiHeadAttention(std::string name, Index model_dim, Index heads, Rng& rng);

  Matrix forward(const Matrix& query, const Matrix& memory, Index batch, Cache& cache) const;
  Gradients backward(const Cache& cache, const Matrix& dy);

  Index heads() const { return heads_; }
  Index model_dim() const { return model_dim_; }
  void collect_parameters(std::vector<Parameter*>& out) override;

 private:
  std::string name_;
  Index model_dim_;
  Index heads_;
  Linear wq_, wk_, wv_, wo_;
};

}  // namespace emoface::nn
