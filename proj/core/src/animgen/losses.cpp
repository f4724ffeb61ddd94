#include "emoface/animgen/losses.hpp"

#include "emoface/common/error.hpp"
#include "emoface/facs/blendshapes.hpp"

namespace emoface::animgen {

using nn::Index;
using nn::Matrix;

namespace {

Index sequence_length(const Matrix& pred, const Matrix& truth, Index batch) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
    throw DimensionError("prediction and ground truth differ in shape");
  if (batch <= 0 || pred.rows() == 0 || pred.rows() % batch != 0)
    throw DimensionError("rows must split evenly into the batch");
  return pred.rows() / batch;
}

double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

}  // namespace

nn::LossGrad rec_loss(const Matrix& pred, const Matrix& truth, Index batch) {
  const Index T = sequence_length(pred, truth, batch);
  const double scale = 1.0 / static_cast<double>(T * batch);
  const Matrix diff = pred - truth;
  return {diff.cwiseAbs().sum() * scale, diff.unaryExpr(&sign) * scale};
}

nn::LossGrad lip_loss(const Matrix& pred, const Matrix& truth, Index batch) {
  const Index T = sequence_length(pred, truth, batch);
  if (T < 2) throw InvalidArgument("lip loss needs at least two frames per sequence");
  const double scale = 1.0 / static_cast<double>((T - 1) * batch);
  nn::LossGrad out{0.0, Matrix::Zero(pred.rows(), pred.cols())};
  for (Index b = 0; b < batch; ++b) {
    for (Index t = 0; t + 1 < T; ++t) {
      const Index r = b * T + t;
      const Eigen::RowVectorXd r_diff =
          (pred.row(r + 1) - pred.row(r)) - (truth.row(r + 1) - truth.row(r));
      out.value += r_diff.cwiseAbs().sum();
      const Eigen::RowVectorXd g = r_diff.unaryExpr(&sign) * scale;
      out.grad.row(r + 1) += g;
      out.grad.row(r) -= g;
    }
  }
  out.value *= scale;
  return out;
}

double loss_rec(const AnimationClip& pred, const AnimationClip& truth) {
  if (pred.frame_count() != truth.frame_count()) throw DimensionError("clips differ in length");
  return rec_loss(pred.to_matrix(), truth.to_matrix(), 1).value;
}

double loss_lip(const AnimationClip& pred_aug, const AnimationClip& truth) {
  if (pred_aug.frame_count() != truth.frame_count()) throw DimensionError("clips differ in length");
  return lip_loss(pred_aug.to_matrix(), truth.to_matrix(), 1).value;
}

double loss_style(const AnimationClip& pred_aug, const facs::BlendshapeWeights& prompt_aug,
                  const align::ExpCLIPModel& expclip, const SelfAttentionPooling& pooler) {
  SelfAttentionPooling::Cache cache;
  const Matrix pooled = pooler.forward(pred_aug.to_matrix(), 1, cache);
  const Matrix target = expclip.encode(align::to_matrix({prompt_aug}));
  return nn::l2_distance_rows(expclip.encode(pooled), target).value;
}

EpaSample epa_sample(const facs::BlendshapeWeights& pooled, const tead::TEADStore& store, Rng& rng) {
  if (store.empty()) throw InvalidArgument("expression prompt augmentation needs a non-empty store");
  EpaSample s;
  s.index = rng.index(store.size());
  s.lambda = rng.uniform();
  s.sampled = store[s.index].blendshapes;
  s.prompt = facs::blend_prompts(pooled, s.sampled, s.lambda);
  return s;
}

}  // namespace emoface::animgen
