#include "emoface/align/model.hpp"

#include "emoface/common/error.hpp"
#include "emoface/nn/checkpoint.hpp"
#include "emoface/nn/losses.hpp"

namespace emoface::align {

using nn::Matrix;

namespace {

Rng init_rng(const ExpCLIPConfig& cfg) {
  cfg.validate();
  return Rng(cfg.seed);
}

Matrix row_matrix(const Eigen::RowVectorXd& v) { return Matrix(v); }

}  // namespace

ExpCLIPModel::ExpCLIPModel(const ExpCLIPConfig& cfg) : ExpCLIPModel(cfg, init_rng(cfg)) {}

// Submodules draw their initial values from one stream in declaration order.
ExpCLIPModel::ExpCLIPModel(const ExpCLIPConfig& cfg, Rng&& rng)
    : cfg_(cfg),
      featurizer_(cfg.text_width),
      encoder_(cfg, rng),
      decoder_(cfg, rng),
      text_proj_("P_text", cfg.text_width, cfg.projector_hidden, cfg.embed_dim, rng),
      image_proj_("P_img", cfg.image_width, cfg.projector_hidden, cfg.embed_dim, rng) {}

std::vector<nn::Parameter*> ExpCLIPModel::parameters() {
  std::vector<nn::Parameter*> out;
  encoder_.collect_parameters(out);
  decoder_.collect_parameters(out);
  text_proj_.collect_parameters(out);
  image_proj_.collect_parameters(out);
  return out;
}

Matrix ExpCLIPModel::encode(const Matrix& weights) const {
  ExpressionEncoder::Cache cache;
  return encoder_.forward(weights, cache);
}

Matrix ExpCLIPModel::decode(const Matrix& z) const {
  nn::require_cols(z, cfg_.embed_dim, "decoder input");
  ExpressionDecoder::Cache cache;
  return decoder_.forward(z, cache);
}

Matrix ExpCLIPModel::featurize_texts(const std::vector<std::string>& texts) const {
  Matrix out(static_cast<nn::Index>(texts.size()), featurizer_.width());
  for (std::size_t i = 0; i < texts.size(); ++i)
    out.row(static_cast<nn::Index>(i)) = featurizer_.featurize(texts[i]);
  return out;
}

Matrix ExpCLIPModel::project_text(const Matrix& features) const {
  nn::require_cols(features, cfg_.text_width, "text features");
  Projector::Cache cache;
  return text_proj_.forward(features, cache);
}

Matrix ExpCLIPModel::project_image(const Matrix& features) const {
  nn::require_cols(features, cfg_.image_width, "image features");
  Projector::Cache cache;
  return image_proj_.forward(features, cache);
}

StyleEmbedding ExpCLIPModel::encode_expression(const facs::BlendshapeWeights& b) const {
  Matrix m(1, static_cast<nn::Index>(facs::kNumBlendshapes));
  for (std::size_t i = 0; i < facs::kNumBlendshapes; ++i) m(0, static_cast<nn::Index>(i)) = b[i];
  return encode(m).row(0);
}

facs::BlendshapeWeights ExpCLIPModel::decode_expression(const StyleEmbedding& z) const {
  if (z.size() != cfg_.embed_dim) throw DimensionError("style embedding has the wrong width");
  Matrix out = decode(row_matrix(z));
  return facs::BlendshapeWeights::clamped({out.data(), facs::kNumBlendshapes});
}

Eigen::RowVectorXd ExpCLIPModel::featurize_text(std::string_view text) const {
  return featurizer_.featurize(text);
}

StyleEmbedding ExpCLIPModel::encode_text(std::string_view text) const {
  return project_text(row_matrix(featurizer_.featurize(text))).row(0);
}

StyleEmbedding ExpCLIPModel::encode_image_features(const Eigen::RowVectorXd& f) const {
  if (f.size() != cfg_.image_width)
    throw DimensionError("image feature width " + std::to_string(f.size()) + " != " +
                         std::to_string(cfg_.image_width));
  return project_image(row_matrix(f)).row(0);
}

std::vector<facs::BlendshapeWeights> ExpCLIPModel::interpolate_expressions(
    const facs::BlendshapeWeights& a, const facs::BlendshapeWeights& b, int steps) const {
  if (steps < 2) throw InvalidArgument("interpolation needs at least 2 steps");
  const StyleEmbedding za = encode_expression(a);
  const StyleEmbedding zb = encode_expression(b);
  Matrix path(steps, cfg_.embed_dim);
  for (int k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(steps - 1);
    path.row(k) = (1.0 - t) * za + t * zb;
  }
  const Matrix decoded = decode(path);
  std::vector<facs::BlendshapeWeights> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k)
    out.push_back(facs::BlendshapeWeights::clamped({decoded.row(k).data(), facs::kNumBlendshapes}));
  return out;
}

nlohmann::json ExpCLIPModel::to_checkpoint() {
  auto params = parameters();
  return nn::make_checkpoint(kExpCLIPCheckpointKind, cfg_.to_json(), params);
}

void ExpCLIPModel::load_parameters(const nlohmann::json& checkpoint) {
  auto params = parameters();
  nn::parameters_from_json(checkpoint.at("parameters"), params);
}

void ExpCLIPModel::save(const std::filesystem::path& path) {
  nn::write_json_file(path, to_checkpoint());
}

std::unique_ptr<ExpCLIPModel> ExpCLIPModel::from_checkpoint(const nlohmann::json& checkpoint) {
  auto model = std::make_unique<ExpCLIPModel>(ExpCLIPConfig::from_json(checkpoint.at("model")));
  model->load_parameters(checkpoint);
  return model;
}

std::unique_ptr<ExpCLIPModel> ExpCLIPModel::load(const std::filesystem::path& path) {
  return from_checkpoint(nn::open_checkpoint(path, kExpCLIPCheckpointKind));
}

Matrix to_matrix(const std::vector<facs::BlendshapeWeights>& rows) {
  Matrix m(static_cast<nn::Index>(rows.size()), static_cast<nn::Index>(facs::kNumBlendshapes));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < facs::kNumBlendshapes; ++c)
      m(static_cast<nn::Index>(r), static_cast<nn::Index>(c)) = rows[r][c];
  return m;
}

ExpCLIPLosses expclip_losses(ExpCLIPModel& model, const Matrix& b, const Matrix& prompt_features,
                             PromptPath path, const LossWeights& w, bool accumulate) {
  if (b.rows() != prompt_features.rows()) throw DimensionError("weights and prompts differ in batch size");
  if (w.ae < 0 || w.emb < 0 || w.cross < 0) throw InvalidArgument("loss weights must be non-negative");
  Projector& proj = path == PromptPath::Text ? model.text_projector() : model.image_projector();
  nn::require_cols(prompt_features, proj.in_features(), "prompt features");

  ExpressionEncoder::Cache enc;
  ExpressionDecoder::Cache dec_ae, dec_cross;
  Projector::Cache pc;
  const Matrix z = model.encoder().forward(b, enc);
  const Matrix recon = model.decoder().forward(z, dec_ae);
  const Matrix p = proj.forward(prompt_features, pc);
  const Matrix cross = model.decoder().forward(p, dec_cross);

  const auto ae = nn::l2_distance_rows(recon, b);
  const auto emb = nn::cosine_embedding_rows(p, z);
  const auto cr = nn::l2_distance_rows(cross, b);

  ExpCLIPLosses out;
  out.ae = ae.value;
  out.emb = emb.value;
  out.cross = cr.value;
  out.total = w.ae * out.ae + w.emb * out.emb + w.cross * out.cross;
  if (!accumulate) return out;

  Matrix dz = Matrix::Zero(z.rows(), z.cols());
  Matrix dp = Matrix::Zero(p.rows(), p.cols());
  if (w.ae > 0) dz += model.decoder().backward(dec_ae, w.ae * ae.grad);
  if (w.emb > 0) {
    dp += w.emb * emb.grad_a;
    dz += w.emb * emb.grad_b;
  }
  if (w.cross > 0) dp += model.decoder().backward(dec_cross, w.cross * cr.grad);
  if (w.emb > 0 || w.cross > 0) proj.backward(pc, dp);
  if (w.ae > 0 || w.emb > 0) model.encoder().backward(enc, dz);
  return out;
}

double loss_ae(const ExpCLIPModel& model, const Matrix& b) {
  return nn::l2_distance_rows(model.decode(model.encode(b)), b).value;
}

double loss_emb(const StyleEmbedding& prompt, const StyleEmbedding& expression) {
  return nn::cosine_embedding_rows(row_matrix(prompt), row_matrix(expression)).value;
}

double loss_cross(const ExpCLIPModel& model, const Matrix& prompt_embeddings, const Matrix& b) {
  return nn::l2_distance_rows(model.decode(prompt_embeddings), b).value;
}

}  // namespace emoface::align
