#include "emoface/animgen/pooling.hpp"

#include "emoface/common/error.hpp"

namespace emoface::animgen {

using nn::Index;
using nn::Matrix;

namespace {
constexpr Index kChannels = static_cast<Index>(facs::kNumBlendshapes);
}

SelfAttentionPooling::SelfAttentionPooling(const std::string& name, const nn::TransformerShape& shape,
                                           Rng& rng)
    : embed_(name + ".embed", kChannels, shape.model_dim, rng),
      block_(name + ".block", shape, rng),
      score_(name + ".score", shape.model_dim, 1, rng) {}

Matrix SelfAttentionPooling::forward(const Matrix& frames, Index batch, Cache& cache) const {
  nn::require_cols(frames, kChannels, "pooling input");
  if (batch <= 0 || frames.rows() == 0 || frames.rows() % batch != 0)
    throw DimensionError("pooling input rows must split evenly into the batch");
  cache.batch = batch;
  cache.frames = frames.rows() / batch;
  cache.input = frames;
  Matrix h = block_.forward(embed_.forward(frames, cache.embed), batch, cache.block);
  Matrix scores = score_.forward(h, cache.score);
  cache.weights = nn::softmax_rows(Eigen::Map<const Matrix>(scores.data(), batch, cache.frames));

  Matrix pooled(batch, kChannels);
  for (Index b = 0; b < batch; ++b) {
    const auto clip = frames.middleRows(b * cache.frames, cache.frames);
    const Eigen::RowVectorXd first = clip.row(0);
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(kChannels);
    for (Index t = 1; t < cache.frames; ++t) acc += cache.weights(b, t) * (clip.row(t) - first);
    pooled.row(b) = (first + acc)
                        .cwiseMax(clip.colwise().minCoeff())
                        .cwiseMin(clip.colwise().maxCoeff());
  }
  return pooled;
}

Matrix SelfAttentionPooling::backward(const Cache& cache, const Matrix& dpooled) {
  if (dpooled.rows() != cache.batch || dpooled.cols() != kChannels)
    throw DimensionError("pooling upstream gradient shape mismatch");
  const Index T = cache.frames;
  Matrix dframes(cache.batch * T, kChannels);
  Matrix dweights(cache.batch, T);
  for (Index b = 0; b < cache.batch; ++b) {
    for (Index t = 0; t < T; ++t) {
      dframes.row(b * T + t) = cache.weights(b, t) * dpooled.row(b);
      dweights(b, t) = cache.input.row(b * T + t).dot(dpooled.row(b));
    }
  }
  Matrix dscores = nn::softmax_rows_backward(cache.weights, dweights);
  Matrix dh = score_.backward(cache.score, Eigen::Map<const Matrix>(dscores.data(), cache.batch * T, 1));
  dframes += embed_.backward(cache.embed, block_.backward(cache.block, dh));
  return dframes;
}

facs::BlendshapeWeights SelfAttentionPooling::pool(const AnimationClip& clip) const {
  Cache cache;
  Matrix pooled = forward(clip.to_matrix(), 1, cache);
  return facs::BlendshapeWeights::clamped({pooled.data(), facs::kNumBlendshapes});
}

Eigen::RowVectorXd SelfAttentionPooling::frame_weights(const AnimationClip& clip) const {
  Cache cache;
  forward(clip.to_matrix(), 1, cache);
  return cache.weights.row(0);
}

void SelfAttentionPooling::zero_score_head() {
  score_.weight().value.setZero();
  score_.bias().value.setZero();
  ++score_.weight().version;
  ++score_.bias().version;
}

void SelfAttentionPooling::collect_parameters(std::vector<nn::Parameter*>& out) {
  embed_.collect_parameters(out);
  block_.collect_parameters(out);
  score_.collect_parameters(out);
}

}  // namespace emoface::animgen
