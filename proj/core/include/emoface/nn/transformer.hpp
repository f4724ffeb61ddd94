#pragma once

#include <memory>
#include <vector>

#include "emoface/nn/attention.hpp"
#include "emoface/nn/layers.hpp"

namespace emoface::nn {

struct TransformerShape {
  Index model_dim = 32;
  Index heads = 4;
  Index ff_dim = 64;
  Index layers = 2;
};

/// Pre-norm encoder block: h = x + SA(LN(x)); y = h + FF(LN(h)).
class EncoderBlock : public Module {
 public:
  struct Cache {
    LayerNorm::Cache ln1, ln2;
    MultiHeadAttention::Cache attn;
    FeedForward::Cache ff;
  };

  EncoderBlock(const std::string& name, const TransformerShape& shape, Rng& rng);
  Matrix forward(const Matrix& x, Index batch, Cache& cache) const;
  Matrix backward(const Cache& cache, const Matrix& dy);
  void collect_parameters(std::vector<Parameter*>& out) override;

  const MultiHeadAttention& attention() const { return attn_; }

 private:
  LayerNorm ln1_, ln2_;
  MultiHeadAttention attn_;
  FeedForward ff_;
};

/// Pre-norm decoder block with cross-attention onto a memory sequence:
/// h1 = x + SA(LN(x)); h2 = h1 + CA(LN(h1), memory); y = h2 + FF(LN(h2)).
class DecoderBlock : public Module {
 public:
  struct Cache {
    LayerNorm::Cache ln1, ln2, ln3;
    MultiHeadAttention::Cache self_attn, cross_attn;
    FeedForward::Cache ff;
  };
  struct Gradients {
    Matrix input;
    Matrix memory;
  };

  DecoderBlock(const std::string& name, const TransformerShape& shape, Rng& rng);
  Matrix forward(const Matrix& x, const Matrix& memory, Index batch, Cache& cache) const;
  Gradients backward(const Cache& cache, const Matrix& dy);
  void collect_parameters(std::vector<Parameter*>& out) override;

 private:
  LayerNorm ln1_, ln2_, ln3_;
  MultiHeadAttention self_attn_, cross_attn_;
  FeedForward ff_;
};

class TransformerEncoder : public Module {
 public:
  using Cache = std::vector<EncoderBlock::Cache>;

  TransformerEncoder(const std::string& name, const TransformerShape& shape, Rng& rng);
  Matrix forward(const Matrix& x, Index batch, Cache& cache) const;
  Matrix backward(const Cache& cache, const Matrix& dy);
  void collect_parameters(std::vector<Parameter*>& out) override;
  const std::vector<EncoderBlock>& blocks() const { return blocks_; }

 private:
  std::vector<EncoderBlock> blocks_;
};

class TransformerDecoder : public Module {
 public:
  using Cache = std::vector<DecoderBlock::Cache>;
  using Gradients = DecoderBlock::Gradients;

  TransformerDecoder(const std::string& name, const TransformerShape& shape, Rng& rng);
  Matrix forward(const Matrix& x, const Matrix& memory, Index batch, Cache& cache) const;
  Gradients backward(const Cache& cache, const Matrix& dy);
  void collect_parameters(std::vector<Parameter*>& out) override;

 private:
  std::vector<DecoderBlock> blocks_;
};

/// Mean over each of the B consecutive sequences: (B*S) x d -> B x d.
Matrix mean_pool(const Matrix& x, Index batch);
Matrix mean_pool_backward(const Matrix& dy, Index seq_len);

}  // namespace emoface::nn
