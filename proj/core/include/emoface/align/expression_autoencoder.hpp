#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "emoface/nn/layers.hpp"
#include "emoface/nn/transformer.hpp"

namespace emoface::align {

struct ExpCLIPConfig {
  /// The 52 weights are split into 52 / channels_per_token tokens.
  nn::Index channels_per_token = 4;
  nn::TransformerShape transformer;
  nn::Index embed_dim = 64;
  int text_width = 512;
  nn::Index projector_hidden = 128;
  nn::Index image_width = 32;
  std::uint64_t seed = 0;

  nn::Index tokens() const;
  /// Throws InvalidArgument on non-positive sizes or a token split that does
  /// not divide 52.
  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults.
  static ExpCLIPConfig from_json(const nlohmann::json& j);
};

/// E: B x 52 weights -> B x D embeddings. Tokens get a linear embedding plus
/// a learned position, pass through the transformer encoder and a final
/// layer norm, are mean-pooled and projected to D.
class ExpressionEncoder : public nn::Module {
 public:
  struct Cache {
    nn::Index batch = 0;
    nn::Linear::Cache embed;
    nn::TransformerEncoder::Cache blocks;
    nn::LayerNorm::Cache norm;
    nn::Linear::Cache proj;
  };

  ExpressionEncoder(const ExpCLIPConfig& cfg, Rng& rng);

  nn::Matrix forward(const nn::Matrix& weights, Cache& cache) const;
  /// Returns dL/dweights (B x 52).
  nn::Matrix backward(const Cache& cache, const nn::Matrix& dz);
  void collect_parameters(std::vector<nn::Parameter*>& out) override;

 private:
  nn::Index tokens_;
  nn::Index channels_;
  nn::Linear embed_;
  nn::Parameter position_;
  nn::TransformerEncoder blocks_;
  nn::LayerNorm norm_;
  nn::Linear proj_;
};

/// D: B x D embeddings -> B x 52 weights in (0, 1). The embedding is
/// expanded into one vector per token, refined by self-attention blocks and
/// mapped back to channels through a sigmoid head.
class ExpressionDecoder : public nn::Module {
 public:
  struct Cache {
    nn::Index batch = 0;
    nn::Linear::Cache expand;
    nn::TransformerEncoder::Cache blocks;
    nn::LayerNorm::Cache norm;
    nn::Linear::Cache head;
    nn::Matrix output;
  };

  ExpressionDecoder(const ExpCLIPConfig& cfg, Rng& rng);

  nn::Matrix forward(const nn::Matrix& z, Cache& cache) const;
  nn::Matrix backward(const Cache& cache, const nn::Matrix& dy);
  void collect_parameters(std::vector<nn::Parameter*>& out) override;

 private:
  nn::Index tokens_;
  nn::Index channels_;
  nn::Index model_dim_;
  nn::Linear expand_;
  nn::Parameter position_;
  nn::TransformerEncoder blocks_;
  nn::LayerNorm norm_;
  nn::Linear head_;
};

/// Two-layer MLP (Linear, GELU, Linear) into the joint space.
class Projector : public nn::Module {
 public:
  using Cache = nn::FeedForward::Cache;

  Projector(const std::string& name, nn::Index in, nn::Index hidden, nn::Index out, Rng& rng);

  nn::Matrix forward(const nn::Matrix& x, Cache& cache) const;
  nn::Matrix backward(const Cache& cache, const nn::Matrix& dy);
  nn::Index in_features() const { return in_.in_features(); }
  void collect_parameters(std::vector<nn::Parameter*>& out) override;

 private:
  nn::Linear in_;
  nn::Linear out_;
};

}  // namespace emoface::align
