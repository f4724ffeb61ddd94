#pragma once

#include <string>

#include "emoface/animgen/clip.hpp"
#include "emoface/nn/layers.hpp"
#include "emoface/nn/transformer.hpp"

namespace emoface::animgen {

/// E_sa: scores every frame of a clip and returns the softmax-weighted sum of
/// the raw frames. Scores come from a linear frame embedding, one encoder
/// block (so each score sees the whole clip) and a linear score head.
///
/// The pooled vector is computed as b_0 + sum_t w_t (b_t - b_0) and then
/// clamped per channel to the frame range, so it is always inside the convex
/// hull of the frames and equal frames pool to that frame exactly.
class SelfAttentionPooling : public nn::Module {
 public:
  struct Cache {
    nn::Index batch = 0;
    nn::Index frames = 0;
    nn::Matrix input;
    nn::Linear::Cache embed;
    nn::EncoderBlock::Cache block;
    nn::Linear::Cache score;
    nn::Matrix weights;  // batch x frames, rows sum to 1
  };

  SelfAttentionPooling(const std::string& name, const nn::TransformerShape& shape, Rng& rng);

  /// frames: (B*T) x 52, B clips of T frames each -> B x 52.
  nn::Matrix forward(const nn::Matrix& frames, nn::Index batch, Cache& cache) const;
  /// Returns dL/dframes.
  nn::Matrix backward(const Cache& cache, const nn::Matrix& dpooled);

  facs::BlendshapeWeights pool(const AnimationClip& clip) const;
  /// The attention weights a clip's frames receive.
  Eigen::RowVectorXd frame_weights(const AnimationClip& clip) const;

  /// Zeroes the score head so every frame gets weight 1/T.
  void zero_score_head();

  void collect_parameters(std::vector<nn::Parameter*>& out) override;

 private:
  nn::Linear embed_;
  nn::EncoderBlock block_;
  nn::Linear score_;
};

}  // namespace emoface::animgen
