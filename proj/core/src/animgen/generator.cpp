#include "emoface/animgen/generator.hpp"

#include "emoface/common/config.hpp"
#include "emoface/common/error.hpp"
#include "emoface/common/text.hpp"
#include "emoface/nn/checkpoint.hpp"

namespace emoface::animgen {

using nn::Index;
using nn::Matrix;

namespace {

constexpr Index kChannels = static_cast<Index>(facs::kNumBlendshapes);

Rng init_rng(const GeneratorConfig& cfg) {
  cfg.validate();
  return Rng(cfg.seed);
}

void validate_shape(const nn::TransformerShape& t, const char* what) {
  if (t.model_dim <= 0 || t.heads <= 0 || t.ff_dim <= 0 || t.layers < 0 || t.model_dim % t.heads)
    throw InvalidArgument(std::string(what) + ": sizes must be positive with heads dividing model_dim");
}

nlohmann::json shape_json(const nn::TransformerShape& t) {
  return {{"model_dim", t.model_dim}, {"heads", t.heads}, {"ff_dim", t.ff_dim}, {"layers", t.layers}};
}

nn::TransformerShape shape_from(const nlohmann::json& j, nn::TransformerShape s) {
  s.model_dim = config_value<Index>(j, "model_dim", s.model_dim);
  s.heads = config_value<Index>(j, "heads", s.heads);
  s.ff_dim = config_value<Index>(j, "ff_dim", s.ff_dim);
  s.layers = config_value<Index>(j, "layers", s.layers);
  return s;
}

}  // namespace

void GeneratorConfig::validate() const {
  if (speech_dim <= 0 || style_dim <= 0 || head_hidden <= 0)
    throw InvalidArgument("generator widths must be positive");
  validate_shape(transformer, "generator transformer");
  validate_shape(pooling, "pooling transformer");
}

nlohmann::json GeneratorConfig::to_json() const {
  auto j = shape_json(transformer);
  j["speech_dim"] = speech_dim;
  j["style_dim"] = style_dim;
  j["head_hidden"] = head_hidden;
  j["pooling"] = shape_json(pooling);
  j["seed"] = seed;
  return j;
}

GeneratorConfig GeneratorConfig::from_json(const nlohmann::json& j) {
  GeneratorConfig c;
  c.speech_dim = config_value<Index>(j, "speech_dim", c.speech_dim);
  c.style_dim = config_value<Index>(j, "style_dim", c.style_dim);
  c.head_hidden = config_value<Index>(j, "head_hidden", c.head_hidden);
  c.transformer = shape_from(j, c.transformer);
  if (const auto* p = find_config_path(j, "pooling")) c.pooling = shape_from(*p, c.pooling);
  c.seed = config_value<std::uint64_t>(j, "seed", c.seed);
  c.validate();
  return c;
}

GeneratorModel::GeneratorModel(const GeneratorConfig& cfg) : GeneratorModel(cfg, init_rng(cfg)) {}

GeneratorModel::GeneratorModel(const GeneratorConfig& cfg, Rng&& rng)
    : cfg_(cfg),
      adapter_("G.adapter", cfg.speech_dim, cfg.transformer.model_dim, rng),
      style_proj_("G.style", cfg.style_dim, cfg.transformer.model_dim, rng),
      decoder_("G.decoder", cfg.transformer, rng),
      norm_("G.norm", cfg.transformer.model_dim),
      head_in_("G.head.in", cfg.transformer.model_dim, cfg.head_hidden, rng),
      head_out_("G.head.out", cfg.head_hidden, kChannels, rng),
      pooler_("E_sa", cfg.pooling, rng) {}

Matrix GeneratorModel::forward(const Matrix& speech, const Matrix& style, Index batch,
                               Cache& cache) const {
  nn::require_cols(speech, cfg_.speech_dim, "speech features");
  nn::require_cols(style, cfg_.style_dim, "style embedding");
  if (batch <= 0 || style.rows() != batch || speech.rows() == 0 || speech.rows() % batch != 0)
    throw DimensionError("speech rows must split evenly into one sequence per style row");
  cache.batch = batch;
  cache.adapter_pre = adapter_.forward(speech, cache.adapter);
  const Matrix memory = style_proj_.forward(style, cache.style);
  Matrix h = decoder_.forward(nn::gelu(cache.adapter_pre), memory, batch, cache.decoder);
  cache.head_pre = head_in_.forward(norm_.forward(h, cache.norm), cache.head_in);
  cache.output = nn::sigmoid(head_out_.forward(nn::gelu(cache.head_pre), cache.head_out));
  return cache.output;
}

Matrix GeneratorModel::backward(const Cache& cache, const Matrix& dy) {
  Matrix d = head_out_.backward(cache.head_out, nn::sigmoid_backward_from_output(cache.output, dy));
  d = norm_.backward(cache.norm, head_in_.backward(cache.head_in, nn::gelu_backward(cache.head_pre, d)));
  auto g = decoder_.backward(cache.decoder, d);
  adapter_.backward(cache.adapter, nn::gelu_backward(cache.adapter_pre, g.input));
  return style_proj_.backward(cache.style, g.memory);
}

AnimationClip GeneratorModel::generate(const SpeechFeatureSequence& speech,
                                       const align::StyleEmbedding& style) const {
  if (style.size() != cfg_.style_dim)
    throw DimensionError("style embedding width " + std::to_string(style.size()) + " != " +
                         std::to_string(cfg_.style_dim));
  Cache cache;
  const Matrix out = forward(speech.features, Matrix(style), 1, cache);
  std::vector<facs::BlendshapeWeights> frames;
  frames.reserve(static_cast<std::size_t>(out.rows()));
  for (Index t = 0; t < out.rows(); ++t)
    frames.push_back(facs::BlendshapeWeights::clamped({out.row(t).data(), facs::kNumBlendshapes}));
  return AnimationClip(std::move(frames), speech.fps);
}

std::vector<nn::Parameter*> GeneratorModel::parameters() {
  std::vector<nn::Parameter*> out;
  adapter_.collect_parameters(out);
  style_proj_.collect_parameters(out);
  decoder_.collect_parameters(out);
  norm_.collect_parameters(out);
  head_in_.collect_parameters(out);
  head_out_.collect_parameters(out);
  pooler_.collect_parameters(out);
  return out;
}

nlohmann::json GeneratorModel::to_checkpoint() {
  auto params = parameters();
  return nn::make_checkpoint(kGeneratorCheckpointKind, cfg_.to_json(), params);
}

void GeneratorModel::save(const std::filesystem::path& path) {
  nn::write_json_file(path, to_checkpoint());
}

std::unique_ptr<GeneratorModel> GeneratorModel::from_checkpoint(const nlohmann::json& checkpoint) {
  auto model = std::make_unique<GeneratorModel>(GeneratorConfig::from_json(checkpoint.at("model")));
  auto params = model->parameters();
  nn::parameters_from_json(checkpoint.at("parameters"), params);
  return model;
}

std::unique_ptr<GeneratorModel> GeneratorModel::load(const std::filesystem::path& path) {
  return from_checkpoint(nn::open_checkpoint(path, kGeneratorCheckpointKind));
}

align::StyleEmbedding prompt_embedding(const Prompt& prompt, const align::ExpCLIPModel& expclip) {
  if (const auto* text = std::get_if<std::string>(&prompt)) {
    if (trim(*text).empty()) throw InvalidArgument("text prompt is empty");
    return expclip.encode_text(*text);
  }
  if (const auto* image = std::get_if<ImageFeaturePrompt>(&prompt))
    return expclip.encode_image_features(image->features);
  return expclip.encode_expression(std::get<facs::BlendshapeWeights>(prompt));
}

AnimationClip infer_from_prompt(const SpeechFeatureSequence& speech, const Prompt& prompt,
                                const align::ExpCLIPModel& expclip, const GeneratorModel& generator) {
  return generator.generate(speech, prompt_embedding(prompt, expclip));
}

}  // namespace emoface::animgen
