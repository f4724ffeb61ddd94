#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "emoface/align/expression_autoencoder.hpp"
#include "emoface/align/text_featurizer.hpp"
#include "emoface/common/rng.hpp"
#include "emoface/facs/types.hpp"

namespace emoface::align {

/// A point in the joint text / expression / image space.
using StyleEmbedding = Eigen::RowVectorXd;

/// Expression autoencoder (E, D), frozen text featurizer with a trainable
/// projector, and an image projector over precomputed features.
///
/// Batch methods take one sample per row. All const methods are safe to call
/// concurrently on a model that is no longer being trained.
class ExpCLIPModel {
 public:
  explicit ExpCLIPModel(const ExpCLIPConfig& cfg = {});
  ExpCLIPModel(const ExpCLIPModel&) = delete;
  ExpCLIPModel& operator=(const ExpCLIPModel&) = delete;

  const ExpCLIPConfig& config() const { return cfg_; }
  ExpressionEncoder& encoder() { return encoder_; }
  ExpressionDecoder& decoder() { return decoder_; }
  Projector& text_projector() { return text_proj_; }
  Projector& image_projector() { return image_proj_; }
  const TextFeaturizer& featurizer() const { return featurizer_; }

  /// Every parameter in checkpoint order: E, D, P_text, P_img.
  std::vector<nn::Parameter*> parameters();

  nn::Matrix encode(const nn::Matrix& weights) const;
  nn::Matrix decode(const nn::Matrix& z) const;
  nn::Matrix featurize_texts(const std::vector<std::string>& texts) const;
  nn::Matrix project_text(const nn::Matrix& features) const;
  nn::Matrix project_image(const nn::Matrix& features) const;

  StyleEmbedding encode_expression(const facs::BlendshapeWeights& b) const;
  /// Throws DimensionError unless z has embed_dim entries.
  facs::BlendshapeWeights decode_expression(const StyleEmbedding& z) const;
  Eigen::RowVectorXd featurize_text(std::string_view text) const;
  StyleEmbedding encode_text(std::string_view text) const;
  /// Throws DimensionError unless f has image_width entries.
  StyleEmbedding encode_image_features(const Eigen::RowVectorXd& f) const;

  /// Linear path from E(a) to E(b) in `steps` points, each decoded.
  /// Throws InvalidArgument for steps < 2.
  std::vector<facs::BlendshapeWeights> interpolate_expressions(const facs::BlendshapeWeights& a,
                                                               const facs::BlendshapeWeights& b,
                                                               int steps) const;

  nlohmann::json to_checkpoint();
  void load_parameters(const nlohmann::json& checkpoint);
  void save(const std::filesystem::path& path);
  static std::unique_ptr<ExpCLIPModel> load(const std::filesystem::path& path);
  static std::unique_ptr<ExpCLIPModel> from_checkpoint(const nlohmann::json& checkpoint);

 private:
  ExpCLIPModel(const ExpCLIPConfig& cfg, Rng&& rng);

  ExpCLIPConfig cfg_;
  TextFeaturizer featurizer_;
  ExpressionEncoder encoder_;
  ExpressionDecoder decoder_;
  Projector text_proj_;
  Projector image_proj_;
};

inline constexpr std::string_view kExpCLIPCheckpointKind = "expclip";

nn::Matrix to_matrix(const std::vector<facs::BlendshapeWeights>& rows);

struct LossWeights {
  double ae = 1.0;
  double emb = 10.0;
  double cross = 10.0;
};

struct ExpCLIPLosses {
  double ae = 0.0;
  double emb = 0.0;
  double cross = 0.0;
  double total = 0.0;
};

enum class PromptPath { Text, Image };

/// Batch losses for target weights `b` (B x 52) and prompt features (B x F,
/// text or image as selected by `path`), each averaged over rows:
///   ae    = |D(E(b)) - b|_2
///   emb   = 1 - cos(P(f), E(b))
///   cross = |D(P(f)) - b|_2
///   total = w.ae * ae + w.emb * emb + w.cross * cross
/// With `accumulate`, gradients of `total` are added to every trainable
/// parameter; branches whose weight is zero are not back-propagated.
ExpCLIPLosses expclip_losses(ExpCLIPModel& model, const nn::Matrix& b,
                             const nn::Matrix& prompt_features, PromptPath path,
                             const LossWeights& w, bool accumulate);

double loss_ae(const ExpCLIPModel& model, const nn::Matrix& b);
/// 1 - cos(prompt, expression). Zero norm throws NumericError.
double loss_emb(const StyleEmbedding& prompt, const StyleEmbedding& expression);
double loss_cross(const ExpCLIPModel& model, const nn::Matrix& prompt_embeddings,
                  const nn::Matrix& b);

}  // namespace emoface::align
