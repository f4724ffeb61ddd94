#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "emoface/align/model.hpp"
#include "emoface/animgen/clip.hpp"
#include "emoface/animgen/pooling.hpp"
#include "emoface/animgen/speech_features.hpp"

namespace emoface::animgen {

struct GeneratorConfig {
  nn::Index speech_dim = 16;
  nn::Index style_dim = 64;  // must equal the ExpCLIP embedding width
  nn::TransformerShape transformer;
  nn::TransformerShape pooling{32, 4, 64, 1};
  nn::Index head_hidden = 64;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static GeneratorConfig from_json(const nlohmann::json& j);
};

/// Speech + style -> animation.
///
/// Speech frames pass through a linear + GELU adapter into a transformer
/// decoder whose cross-attention reads a single memory token projected from
/// the style embedding. A two-layer head with a sigmoid emits 52 weights per
/// frame, so every output lies in [0, 1] whatever the style magnitude. The
/// self-attention pooling module E_sa that turns clips into expression
/// prompts is trained with the generator and stored in its checkpoint.
class GeneratorModel {
 public:
  struct Cache {
    nn::Index batch = 0;
    nn::Linear::Cache adapter;
    nn::Matrix adapter_pre;
    nn::Linear::Cache style;
    nn::TransformerDecoder::Cache decoder;
    nn::LayerNorm::Cache norm;
    nn::Linear::Cache head_in;
    nn::Matrix head_pre;
    nn::Linear::Cache head_out;
    nn::Matrix output;
  };

  explicit GeneratorModel(const GeneratorConfig& cfg = {});
  GeneratorModel(const GeneratorModel&) = delete;
  GeneratorModel& operator=(const GeneratorModel&) = delete;

  const GeneratorConfig& config() const { return cfg_; }
  SelfAttentionPooling& pooler() { return pooler_; }
  const SelfAttentionPooling& pooler() const { return pooler_; }

  /// speech: (B*T) x F, style: B x D -> (B*T) x 52.
  nn::Matrix forward(const nn::Matrix& speech, const nn::Matrix& style, nn::Index batch,
                     Cache& cache) const;
  /// Accumulates parameter gradients and returns dL/dstyle (B x D).
  nn::Matrix backward(const Cache& cache, const nn::Matrix& dy);

  /// One output frame per speech frame, at the speech frame rate.
  AnimationClip generate(const SpeechFeatureSequence& speech, const align::StyleEmbedding& style) const;

  /// Generator parameters followed by E_sa parameters.
  std::vector<nn::Parameter*> parameters();

  nlohmann::json to_checkpoint();
  void save(const std::filesystem::path& path);
  static std::unique_ptr<GeneratorModel> load(const std::filesystem::path& path);
  static std::unique_ptr<GeneratorModel> from_checkpoint(const nlohmann::json& checkpoint);

 private:
  GeneratorModel(const GeneratorConfig& cfg, Rng&& rng);

  GeneratorConfig cfg_;
  nn::Linear adapter_;
  nn::Linear style_proj_;
  nn::TransformerDecoder decoder_;
  nn::LayerNorm norm_;
  nn::Linear head_in_;
  nn::Linear head_out_;
  SelfAttentionPooling pooler_;
};

inline constexpr std::string_view kGeneratorCheckpointKind = "generator";

/// A prompt for inference: free text, a precomputed image feature vector, or
/// blendshape weights.
struct ImageFeaturePrompt {
  Eigen::RowVectorXd features;
};
using Prompt = std::variant<std::string, ImageFeaturePrompt, facs::BlendshapeWeights>;

/// Style embedding of a prompt: encode_text, encode_image_features or
/// encode_expression respectively. Empty text is an InvalidArgument, a
/// feature width mismatch a DimensionError.
align::StyleEmbedding prompt_embedding(const Prompt& prompt, const align::ExpCLIPModel& expclip);

AnimationClip infer_from_prompt(const SpeechFeatureSequence& speech, const Prompt& prompt,
                                const align::ExpCLIPModel& expclip, const GeneratorModel& generator);

}  // namespace emoface::animgen
