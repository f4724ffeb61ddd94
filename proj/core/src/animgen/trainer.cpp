#include "emoface/animgen/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "emoface/common/config.hpp"
#include "emoface/common/error.hpp"
#include "emoface/animgen/losses.hpp"
#include "emoface/facs/blendshapes.hpp"
#include "emoface/nn/losses.hpp"

namespace emoface::animgen {

using nn::Index;
using nn::Matrix;

void GenTrainConfig::validate() const {
  if (window < 2) throw InvalidArgument("window must be at least 2 frames");
  if (batch_size == 0) throw InvalidArgument("batch size must be positive");
  if (epochs < 0) throw InvalidArgument("epochs must be non-negative");
  if (!(lr > 0)) throw InvalidArgument("learning rate must be positive");
  if (epa_probability < 0 || epa_probability > 1)
    throw InvalidArgument("epa_probability must lie in [0, 1]");
  if (lambda_min < 0 || lambda_max > 1 || lambda_min > lambda_max)
    throw InvalidArgument("lambda range must satisfy 0 <= lambda_min <= lambda_max <= 1");
  if (weights.rec < 0 || weights.lip < 0 || weights.style < 0)
    throw InvalidArgument("loss weights must be non-negative");
}

nlohmann::json GenTrainConfig::to_json() const {
  return {{"window", window},
          {"batch_size", batch_size},
          {"epochs", epochs},
          {"lr", lr},
          {"lr_schedule", nn::to_string(lr_schedule)},
          {"epa_probability", epa_probability},
          {"lambda_min", lambda_min},
          {"lambda_max", lambda_max},
          {"weight_rec", weights.rec},
          {"weight_lip", weights.lip},
          {"weight_style", weights.style},
          {"seed", seed}};
}

GenTrainConfig GenTrainConfig::from_json(const nlohmann::json& j) {
  GenTrainConfig c;
  c.window = config_value(j, "window", c.window);
  c.batch_size = config_value(j, "batch_size", c.batch_size);
  c.epochs = config_value(j, "epochs", c.epochs);
  c.lr = config_value(j, "lr", c.lr);
  c.lr_schedule = nn::parse_lr_schedule(config_value(j, "lr_schedule", nn::to_string(c.lr_schedule)));
  c.epa_probability = config_value(j, "epa_probability", c.epa_probability);
  c.lambda_min = config_value(j, "lambda_min", c.lambda_min);
  c.lambda_max = config_value(j, "lambda_max", c.lambda_max);
  c.weights.rec = config_value(j, "weight_rec", c.weights.rec);
  c.weights.lip = config_value(j, "weight_lip", c.weights.lip);
  c.weights.style = config_value(j, "weight_style", c.weights.style);
  c.seed = config_value(j, "seed", c.seed);
  c.validate();
  return c;
}

namespace {

Matrix blend_batch(const Matrix& prompt, const EpaDraw& epa) {
  const auto B = static_cast<std::size_t>(prompt.rows());
  if (epa.sampled.size() != B || epa.lambda.size() != B)
    throw DimensionError("augmentation draw does not match the batch");
  std::vector<facs::BlendshapeWeights> blended;
  for (std::size_t b = 0; b < B; ++b) {
    const auto pooled =
        facs::BlendshapeWeights::clamped({prompt.row(static_cast<Index>(b)).data(), facs::kNumBlendshapes});
    blended.push_back(facs::blend_prompts(pooled, epa.sampled[b], epa.lambda[b]));
  }
  return align::to_matrix(blended);
}

}  // namespace

Matrix epa_style_target(const GeneratorModel& gen, const align::ExpCLIPModel& expclip,
                        const GenBatch& batch, const EpaDraw& epa) {
  SelfAttentionPooling::Cache pc;
  const Matrix prompt = gen.pooler().forward(batch.truth, batch.batch, pc);
  return expclip.encode(blend_batch(prompt, epa));
}

GenLosses generator_losses(GeneratorModel& gen, align::ExpCLIPModel& expclip, const GenBatch& batch,
                           const EpaDraw* epa, const GenLossWeights& w, bool accumulate) {
  const Index B = batch.batch;
  auto& pooler = gen.pooler();
  auto& enc = expclip.encoder();

  SelfAttentionPooling::Cache pool_clean;
  align::ExpressionEncoder::Cache enc_clean;
  GeneratorModel::Cache gen_clean;
  const Matrix prompt = pooler.forward(batch.truth, B, pool_clean);
  const Matrix style = enc.forward(prompt, enc_clean);
  const Matrix pred = gen.forward(batch.speech, style, B, gen_clean);
  const auto rec = rec_loss(pred, batch.truth, B);

  GenLosses out;
  out.rec = rec.value;

  SelfAttentionPooling::Cache pool_aug;
  align::ExpressionEncoder::Cache enc_aug, enc_pred;
  GeneratorModel::Cache gen_aug;
  nn::LossGrad lip;
  nn::LossGrad sty;
  if (epa) {
    const Matrix style_aug = enc.forward(blend_batch(prompt, *epa), enc_aug);
    const Matrix pred_aug = gen.forward(batch.speech, style_aug, B, gen_aug);
    lip = lip_loss(pred_aug, batch.truth, B);
    const Matrix pooled_aug = pooler.forward(pred_aug, B, pool_aug);
    if (epa->style_target.size() > 0 && (epa->style_target.rows() != B || epa->style_target.cols() != style_aug.cols()))
      throw DimensionError("style target does not match the batch");
    sty = nn::l2_distance_rows(enc.forward(pooled_aug, enc_pred),
                               epa->style_target.size() > 0 ? epa->style_target : style_aug);
    out.lip = lip.value;
    out.style = sty.value;
  }
  out.total = w.rec * out.rec + w.lip * out.lip + w.style * out.style;
  if (!accumulate) return out;

  Matrix dprompt = Matrix::Zero(prompt.rows(), prompt.cols());
  if (epa && (w.lip > 0 || w.style > 0)) {
    Matrix dpred_aug = w.lip * lip.grad;
    if (w.style > 0)
      dpred_aug += pooler.backward(pool_aug, enc.backward(enc_pred, w.style * sty.grad));
    const Matrix dblended = enc.backward(enc_aug, gen.backward(gen_aug, dpred_aug));
    for (Index b = 0; b < B; ++b)
      dprompt.row(b) += (1.0 - epa->lambda[static_cast<std::size_t>(b)]) * dblended.row(b);
  }
  if (w.rec > 0) dprompt += enc.backward(enc_clean, gen.backward(gen_clean, w.rec * rec.grad));
  pooler.backward(pool_clean, dprompt);
  return out;
}

GeneratorTrainer::GeneratorTrainer(GeneratorModel& gen, align::ExpCLIPModel& expclip,
                                   std::vector<TrainingPair> data, const tead::TEADStore* epa_store,
                                   const GenTrainConfig& cfg)
    : gen_(gen), expclip_(expclip), data_(std::move(data)), epa_store_(epa_store), cfg_(cfg),
      rng_(cfg.seed),
      epa_rng_(Rng::derive_seed(cfg.seed, 1)) {
  cfg_.validate();
  if (data_.empty()) throw InvalidArgument("cannot train the generator on an empty dataset");
  if (gen.config().style_dim != expclip.config().embed_dim)
    throw DimensionError("generator style width does not match the ExpCLIP embedding width");
  for (const auto& p : data_) {
    if (p.clip.frame_count() < cfg_.window || p.speech.frame_count() != p.clip.frame_count())
      throw InvalidArgument("pair '" + p.id + "' is shorter than the window or misaligned");
    if (p.speech.width() != gen.config().speech_dim)
      throw DimensionError("pair '" + p.id + "' has the wrong speech feature width");
  }
  if (cfg_.epa_probability > 0 && (!epa_store_ || epa_store_->empty()))
    throw InvalidArgument("prompt augmentation needs a non-empty expression store");
  for (auto* p : expclip_.parameters()) p->trainable = false;
  for (const auto& p : data_) clip_rows_.push_back(p.clip.to_matrix());
  adam_ = std::make_unique<nn::Adam>(gen_.parameters(), nn::AdamConfig{cfg_.lr});
}

const GenHistoryRow& GeneratorTrainer::run_epoch() {
  if (done()) throw InvalidArgument("training already finished");
  adam_->set_lr(nn::scheduled_lr(cfg_.lr, cfg_.lr_schedule, epoch_, cfg_.epochs));
  std::vector<std::size_t> order(data_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng_.engine());

  const auto W = static_cast<Index>(cfg_.window);
  GenHistoryRow row;
  for (std::size_t start = 0; start < order.size(); start += cfg_.batch_size) {
    const std::size_t n = std::min(cfg_.batch_size, order.size() - start);
    GenBatch batch{Matrix(static_cast<Index>(n) * W, gen_.config().speech_dim),
                   Matrix(static_cast<Index>(n) * W, static_cast<Index>(facs::kNumBlendshapes)),
                   static_cast<Index>(n)};
    for (std::size_t k = 0; k < n; ++k) {
      const auto& p = data_[order[start + k]];
      const auto offset = static_cast<Index>(rng_.index(p.clip.frame_count() - cfg_.window + 1));
      batch.speech.middleRows(static_cast<Index>(k) * W, W) = p.speech.features.middleRows(offset, W);
      batch.truth.middleRows(static_cast<Index>(k) * W, W) = clip_rows_[order[start + k]].middleRows(offset, W);
    }
    EpaDraw draw;
    const bool use_epa = cfg_.epa_probability > 0 && epa_rng_.bernoulli(cfg_.epa_probability);
    if (use_epa) {
      for (std::size_t k = 0; k < n; ++k) {
        draw.sampled.push_back((*epa_store_)[epa_rng_.index(epa_store_->size())].blendshapes);
        draw.lambda.push_back(epa_rng_.uniform(cfg_.lambda_min, cfg_.lambda_max));
      }
    }
    const auto l = generator_losses(gen_, expclip_, batch, use_epa ? &draw : nullptr, cfg_.weights, true);
    adam_->step();
    const double nd = static_cast<double>(n);
    row.losses.rec += l.rec * nd;
    row.losses.lip += l.lip * nd;
    row.losses.style += l.style * nd;
    row.losses.total += l.total * nd;
    row.epa_steps += use_epa ? 1 : 0;
    ++row.steps;
  }
  const double total = static_cast<double>(data_.size());
  row.losses.rec /= total;
  row.losses.lip /= total;
  row.losses.style /= total;
  row.losses.total /= total;
  row.epoch = ++epoch_;
  history_.push_back(row);
  return history_.back();
}

void GeneratorTrainer::run(const std::function<void(const GenHistoryRow&)>& on_epoch) {
  while (!done()) {
    const auto& row = run_epoch();
    if (on_epoch) on_epoch(row);
  }
}

nlohmann::json GeneratorTrainer::state() const {
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& r : history_)
    hist.push_back({r.epoch, r.losses.rec, r.losses.lip, r.losses.style, r.losses.total,
                    r.epa_steps, r.steps});
  return {{"epoch", epoch_},
          {"rng", rng_.save()},
          {"epa_rng", epa_rng_.save()},
          {"optimizer", adam_->state()},
          {"history", hist}};
}

void GeneratorTrainer::load_state(const nlohmann::json& s) {
  const int epoch = s.at("epoch").get<int>();
  if (epoch < 0 || epoch > cfg_.epochs)
    throw InvalidArgument("resume state is at epoch " + std::to_string(epoch) + " of " +
                          std::to_string(cfg_.epochs));
  adam_->load_state(s.at("optimizer"));
  rng_.restore(s.at("rng").get<std::string>());
  epa_rng_.restore(s.at("epa_rng").get<std::string>());
  history_.clear();
  for (const auto& h : s.at("history"))
    history_.push_back({h.at(0).get<int>(),
                        {h.at(1).get<double>(), h.at(2).get<double>(), h.at(3).get<double>(),
                         h.at(4).get<double>()},
                        h.at(5).get<int>(),
                        h.at(6).get<int>()});
  epoch_ = epoch;
}

std::string history_csv(const std::vector<GenHistoryRow>& history) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,L_rec,L_lm,L_style,total,epa_steps,steps\n";
  for (const auto& r : history)
    os << r.epoch << ',' << r.losses.rec << ',' << r.losses.lip << ',' << r.losses.style << ','
       << r.losses.total << ',' << r.epa_steps << ',' << r.steps << '\n';
  return os.str();
}

}  // namespace emoface::animgen
