#pragma once

#include "emoface/align/model.hpp"
#include "emoface/animgen/clip.hpp"
#include "emoface/animgen/pooling.hpp"
#include "emoface/common/rng.hpp"
#include "emoface/nn/losses.hpp"
#include "emoface/tead/store.hpp"

namespace emoface::animgen {

/// Batched reconstruction loss over B sequences stacked as (B*T) x 52:
/// per sequence (1/T) * sum_t sum_c |pred - truth|, averaged over B.
nn::LossGrad rec_loss(const nn::Matrix& pred, const nn::Matrix& truth, nn::Index batch);

/// Batched lip-motion loss: per sequence
/// (1/(T-1)) * sum_t sum_c |(p[t+1] - p[t]) - (g[t+1] - g[t])|, averaged over
/// B. Throws InvalidArgument for T < 2.
nn::LossGrad lip_loss(const nn::Matrix& pred, const nn::Matrix& truth, nn::Index batch);

/// Clip-level forms. Clips must have equal length (DimensionError).
double loss_rec(const AnimationClip& pred, const AnimationClip& truth);
double loss_lip(const AnimationClip& pred_aug, const AnimationClip& truth);

/// |E(E_sa(pred_aug)) - E(prompt_aug)|_2 with the ExpCLIP encoder E.
double loss_style(const AnimationClip& pred_aug, const facs::BlendshapeWeights& prompt_aug,
                  const align::ExpCLIPModel& expclip, const SelfAttentionPooling& pooler);

struct EpaSample {
  facs::BlendshapeWeights prompt;  // blended prompt
  facs::BlendshapeWeights sampled; // the expression drawn from the store
  double lambda = 0.0;
  std::size_t index = 0;           // record index in the store
};

/// Draws a record uniformly from `store`, then lambda uniformly from [0, 1],
/// and blends: prompt = (1 - lambda) * pooled + lambda * sampled.
/// Throws InvalidArgument for an empty store.
EpaSample epa_sample(const facs::BlendshapeWeights& pooled, const tead::TEADStore& store, Rng& rng);

}  // namespace emoface::animgen
