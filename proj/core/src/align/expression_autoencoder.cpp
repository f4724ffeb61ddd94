#include "emoface/align/expression_autoencoder.hpp"

#include "emoface/common/config.hpp"
#include "emoface/common/error.hpp"
#include "emoface/facs/types.hpp"

namespace emoface::align {

using nn::Index;
using nn::Matrix;

namespace {

constexpr Index kChannels = static_cast<Index>(facs::kNumBlendshapes);

Matrix small_normal(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, 0.02);
  return m;
}

Matrix reshaped(const Matrix& m, Index rows, Index cols) {
  return Eigen::Map<const Matrix>(m.data(), rows, cols);
}

void add_positions(Matrix& x, const Matrix& pos, Index batch) {
  for (Index b = 0; b < batch; ++b) x.middleRows(b * pos.rows(), pos.rows()) += pos;
}

void accumulate_positions(nn::Parameter& pos, const Matrix& dx, Index batch) {
  if (!pos.trainable) return;
  for (Index b = 0; b < batch; ++b) pos.grad += dx.middleRows(b * pos.value.rows(), pos.value.rows());
}

}  // namespace

Index ExpCLIPConfig::tokens() const { return kChannels / channels_per_token; }

void ExpCLIPConfig::validate() const {
  if (channels_per_token <= 0 || kChannels % channels_per_token != 0)
    throw InvalidArgument("channels_per_token must divide 52");
  const auto& t = transformer;
  if (t.model_dim <= 0 || t.heads <= 0 || t.ff_dim <= 0 || t.layers < 0 || t.model_dim % t.heads)
    throw InvalidArgument("transformer sizes must be positive with heads dividing model_dim");
  if (embed_dim <= 0 || text_width < 2 || projector_hidden <= 0 || image_width <= 0)
    throw InvalidArgument("embedding, projector and feature widths must be positive");
}

nlohmann::json ExpCLIPConfig::to_json() const {
  return {{"channels_per_token", channels_per_token},
          {"model_dim", transformer.model_dim},
          {"heads", transformer.heads},
          {"ff_dim", transformer.ff_dim},
          {"layers", transformer.layers},
          {"embed_dim", embed_dim},
          {"text_width", text_width},
          {"projector_hidden", projector_hidden},
          {"image_width", image_width},
          {"seed", seed}};
}

ExpCLIPConfig ExpCLIPConfig::from_json(const nlohmann::json& j) {
  ExpCLIPConfig c;
  c.channels_per_token = config_value<Index>(j, "channels_per_token", c.channels_per_token);
  c.transformer.model_dim = config_value<Index>(j, "model_dim", c.transformer.model_dim);
  c.transformer.heads = config_value<Index>(j, "heads", c.transformer.heads);
  c.transformer.ff_dim = config_value<Index>(j, "ff_dim", c.transformer.ff_dim);
  c.transformer.layers = config_value<Index>(j, "layers", c.transformer.layers);
  c.embed_dim = config_value<Index>(j, "embed_dim", c.embed_dim);
  c.text_width = config_value<int>(j, "text_width", c.text_width);
  c.projector_hidden = config_value<Index>(j, "projector_hidden", c.projector_hidden);
  c.image_width = config_value<Index>(j, "image_width", c.image_width);
  c.seed = config_value<std::uint64_t>(j, "seed", c.seed);
  c.validate();
  return c;
}

ExpressionEncoder::ExpressionEncoder(const ExpCLIPConfig& cfg, Rng& rng)
    : tokens_(cfg.tokens()),
      channels_(cfg.channels_per_token),
      embed_("E.embed", cfg.channels_per_token, cfg.transformer.model_dim, rng),
      position_("E.position", small_normal(cfg.tokens(), cfg.transformer.model_dim, rng)),
      blocks_("E.encoder", cfg.transformer, rng),
      norm_("E.norm", cfg.transformer.model_dim),
      proj_("E.proj", cfg.transformer.model_dim, cfg.embed_dim, rng) {}

Matrix ExpressionEncoder::forward(const Matrix& weights, Cache& cache) const {
  nn::require_cols(weights, kChannels, "expression encoder input");
  nn::require_finite(weights, "expression encoder input");
  cache.batch = weights.rows();
  Matrix h = embed_.forward(reshaped(weights, cache.batch * tokens_, channels_), cache.embed);
  add_positions(h, position_.value, cache.batch);
  h = norm_.forward(blocks_.forward(h, cache.batch, cache.blocks), cache.norm);
  return proj_.forward(nn::mean_pool(h, cache.batch), cache.proj);
}

Matrix ExpressionEncoder::backward(const Cache& cache, const Matrix& dz) {
  Matrix dh = nn::mean_pool_backward(proj_.backward(cache.proj, dz), tokens_);
  dh = blocks_.backward(cache.blocks, norm_.backward(cache.norm, dh));
  accumulate_positions(position_, dh, cache.batch);
  return reshaped(embed_.backward(cache.embed, dh), cache.batch, kChannels);
}

void ExpressionEncoder::collect_parameters(std::vector<nn::Parameter*>& out) {
  embed_.collect_parameters(out);
  out.push_back(&position_);
  blocks_.collect_parameters(out);
  norm_.collect_parameters(out);
  proj_.collect_parameters(out);
}

ExpressionDecoder::ExpressionDecoder(const ExpCLIPConfig& cfg, Rng& rng)
    : tokens_(cfg.tokens()),
      channels_(cfg.channels_per_token),
      model_dim_(cfg.transformer.model_dim),
      expand_("D.expand", cfg.embed_dim, cfg.tokens() * cfg.transformer.model_dim, rng),
      position_("D.position", small_normal(cfg.tokens(), cfg.transformer.model_dim, rng)),
      blocks_("D.decoder", cfg.transformer, rng),
      norm_("D.norm", cfg.transformer.model_dim),
      head_("D.head", cfg.transformer.model_dim, cfg.channels_per_token, rng) {}

Matrix ExpressionDecoder::forward(const Matrix& z, Cache& cache) const {
  nn::require_finite(z, "expression decoder input");
  cache.batch = z.rows();
  Matrix h = reshaped(expand_.forward(z, cache.expand), cache.batch * tokens_, model_dim_);
  add_positions(h, position_.value, cache.batch);
  h = norm_.forward(blocks_.forward(h, cache.batch, cache.blocks), cache.norm);
  cache.output = nn::sigmoid(reshaped(head_.forward(h, cache.head), cache.batch, kChannels));
  return cache.output;
}

Matrix ExpressionDecoder::backward(const Cache& cache, const Matrix& dy) {
  Matrix dlogits = nn::sigmoid_backward_from_output(cache.output, dy);
  Matrix dh = head_.backward(cache.head, reshaped(dlogits, cache.batch * tokens_, channels_));
  dh = blocks_.backward(cache.blocks, norm_.backward(cache.norm, dh));
  accumulate_positions(position_, dh, cache.batch);
  return expand_.backward(cache.expand, reshaped(dh, cache.batch, tokens_ * model_dim_));
}

void ExpressionDecoder::collect_parameters(std::vector<nn::Parameter*>& out) {
  expand_.collect_parameters(out);
  out.push_back(&position_);
  blocks_.collect_parameters(out);
  norm_.collect_parameters(out);
  head_.collect_parameters(out);
}

Projector::Projector(const std::string& name, Index in, Index hidden, Index out, Rng& rng)
    : in_(name + ".in", in, hidden, rng), out_(name + ".out", hidden, out, rng) {}

Matrix Projector::forward(const Matrix& x, Cache& cache) const {
  nn::require_finite(x, "projector input");
  cache.hidden_pre = in_.forward(x, cache.in);
  return out_.forward(nn::gelu(cache.hidden_pre), cache.out);
}

Matrix Projector::backward(const Cache& cache, const Matrix& dy) {
  Matrix dh = out_.backward(cache.out, dy);
  return in_.backward(cache.in, nn::gelu_backward(cache.hidden_pre, dh));
}

void Projector::collect_parameters(std::vector<nn::Parameter*>& out) {
  in_.collect_parameters(out);
  out_.collect_parameters(out);
}

}  // namespace emoface::align
