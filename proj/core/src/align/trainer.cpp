#include "emoface/align/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "emoface/common/config.hpp"
#include "emoface/common/error.hpp"
#include "emoface/facs/blendshapes.hpp"

namespace emoface::align {

using nn::Matrix;

void ExpCLIPTrainConfig::validate() const {
  if (weights.ae < 0 || weights.emb < 0 || weights.cross < 0)
    throw InvalidArgument("loss weights must be non-negative");
  if (!(lr > 0) || !(image_lr > 0)) throw InvalidArgument("learning rates must be positive");
  if (batch_size == 0) throw InvalidArgument("batch size must be positive");
  if (epochs < 0 || image_epochs < 0) throw InvalidArgument("epoch counts must be non-negative");
  if (text_aug_probability < 0 || text_aug_probability > 1)
    throw InvalidArgument("text_aug_probability must lie in [0, 1]");
  if (perturb_magnitude < 0) throw InvalidArgument("perturb_magnitude must be non-negative");
}

nlohmann::json ExpCLIPTrainConfig::to_json() const {
  std::vector<std::string> ops;
  for (auto op : text_aug_ops) ops.emplace_back(tead::to_string(op));
  return {{"lambda_ae", weights.ae},
          {"lambda_emb", weights.emb},
          {"lambda_cross", weights.cross},
          {"lr", lr},
          {"lr_schedule", nn::to_string(lr_schedule)},
          {"batch_size", batch_size},
          {"epochs", epochs},
          {"text_augmentation", text_augmentation},
          {"text_aug_ops", ops},
          {"text_aug_probability", text_aug_probability},
          {"blendshape_augmentation", blendshape_augmentation},
          {"perturb_magnitude", perturb_magnitude},
          {"image_epochs", image_epochs},
          {"image_lr", image_lr},
          {"seed", seed}};
}

ExpCLIPTrainConfig ExpCLIPTrainConfig::from_json(const nlohmann::json& j) {
  ExpCLIPTrainConfig c;
  c.weights.ae = config_value(j, "lambda_ae", c.weights.ae);
  c.weights.emb = config_value(j, "lambda_emb", c.weights.emb);
  c.weights.cross = config_value(j, "lambda_cross", c.weights.cross);
  c.lr = config_value(j, "lr", c.lr);
  c.lr_schedule = nn::parse_lr_schedule(config_value(j, "lr_schedule", nn::to_string(c.lr_schedule)));
  c.batch_size = config_value(j, "batch_size", c.batch_size);
  c.epochs = config_value(j, "epochs", c.epochs);
  c.text_augmentation = config_value(j, "text_augmentation", c.text_augmentation);
  if (const auto* ops = find_config_path(j, "text_aug_ops")) {
    c.text_aug_ops.clear();
    for (const auto& op : *ops) c.text_aug_ops.push_back(tead::parse_text_aug_op(op.get<std::string>()));
  }
  c.text_aug_probability = config_value(j, "text_aug_probability", c.text_aug_probability);
  c.blendshape_augmentation = config_value(j, "blendshape_augmentation", c.blendshape_augmentation);
  c.perturb_magnitude = config_value(j, "perturb_magnitude", c.perturb_magnitude);
  c.image_epochs = config_value(j, "image_epochs", c.image_epochs);
  c.image_lr = config_value(j, "image_lr", c.image_lr);
  c.seed = config_value(j, "seed", c.seed);
  c.validate();
  return c;
}

namespace {

std::vector<nn::Parameter*> collect(std::initializer_list<nn::Module*> modules) {
  std::vector<nn::Parameter*> out;
  for (auto* m : modules) m->collect_parameters(out);
  return out;
}

void accumulate(ExpCLIPLosses& sum, const ExpCLIPLosses& l, double n) {
  sum.ae += l.ae * n;
  sum.emb += l.emb * n;
  sum.cross += l.cross * n;
  sum.total += l.total * n;
}

ExpCLIPLosses averaged(ExpCLIPLosses s, double n) {
  s.ae /= n;
  s.emb /= n;
  s.cross /= n;
  s.total /= n;
  return s;
}

}  // namespace

ExpCLIPTrainer::ExpCLIPTrainer(ExpCLIPModel& model, const tead::TEADStore& train,
                               const ExpCLIPTrainConfig& cfg, const ImageFeatureSet* images)
    : model_(model),
      train_(train.records()),
      cfg_(cfg),
      rng_(cfg.seed),
      perturb_rng_(Rng::derive_seed(cfg.seed, 1)) {
  cfg_.validate();
  if (train_.empty()) throw InvalidArgument("cannot train on an empty dataset");
  if (cfg_.image_epochs > 0) {
    if (!images) throw InvalidArgument("image epochs requested without image features");
    if (images->width() != model.config().image_width)
      throw DimensionError("image feature width does not match the model");
    image_rows_.resize(static_cast<nn::Index>(train_.size()), images->width());
    for (std::size_t i = 0; i < train_.size(); ++i) {
      const auto* f = images->find(train_[i].id);
      if (!f) throw InvalidArgument("no image feature for record '" + train_[i].id + "'");
      image_rows_.row(static_cast<nn::Index>(i)) = *f;
    }
  }
  text_adam_ = std::make_unique<nn::Adam>(
      collect({&model.encoder(), &model.decoder(), &model.text_projector()}),
      nn::AdamConfig{cfg_.lr});
  image_adam_ =
      std::make_unique<nn::Adam>(collect({&model.image_projector()}), nn::AdamConfig{cfg_.image_lr});
}

void ExpCLIPTrainer::set_stage(bool image) {
  model_.encoder().set_trainable(!image);
  model_.decoder().set_trainable(!image);
  model_.text_projector().set_trainable(!image);
  model_.image_projector().set_trainable(image);
}

ExpCLIPLosses ExpCLIPTrainer::text_epoch() {
  std::vector<std::size_t> order(train_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng_.engine());

  const auto& augmenter = tead::TextAugmenter::builtin();
  ExpCLIPLosses sum;
  for (std::size_t start = 0; start < order.size(); start += cfg_.batch_size) {
    const std::size_t n = std::min(cfg_.batch_size, order.size() - start);
    std::vector<facs::BlendshapeWeights> targets;
    std::vector<std::string> texts;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& q = train_[order[start + k]];
      std::string text = tead::sample_text_view(q, rng_);
      if (cfg_.text_augmentation) {
        std::vector<tead::TextAugOp> ops;
        for (auto op : cfg_.text_aug_ops)
          if (rng_.bernoulli(cfg_.text_aug_probability)) ops.push_back(op);
        if (!ops.empty()) text = augmenter.augment(text, rng_, ops);
      }
      texts.push_back(std::move(text));
      targets.push_back(cfg_.blendshape_augmentation
                            ? facs::perturb_blendshapes(q.blendshapes, cfg_.perturb_magnitude, perturb_rng_)
                            : q.blendshapes);
    }
    const auto l = expclip_losses(model_, to_matrix(targets), model_.featurize_texts(texts),
                                  PromptPath::Text, cfg_.weights, true);
    text_adam_->step();
    accumulate(sum, l, static_cast<double>(n));
  }
  return averaged(sum, static_cast<double>(train_.size()));
}

ExpCLIPLosses ExpCLIPTrainer::image_epoch() {
  std::vector<std::size_t> order(train_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng_.engine());

  const LossWeights w{0.0, cfg_.weights.emb, cfg_.weights.cross};
  ExpCLIPLosses sum;
  for (std::size_t start = 0; start < order.size(); start += cfg_.batch_size) {
    const std::size_t n = std::min(cfg_.batch_size, order.size() - start);
    std::vector<facs::BlendshapeWeights> targets;
    Matrix features(static_cast<nn::Index>(n), image_rows_.cols());
    for (std::size_t k = 0; k < n; ++k) {
      targets.push_back(train_[order[start + k]].blendshapes);
      features.row(static_cast<nn::Index>(k)) = image_rows_.row(static_cast<nn::Index>(order[start + k]));
    }
    const auto l = expclip_losses(model_, to_matrix(targets), features, PromptPath::Image, w, true);
    image_adam_->step();
    accumulate(sum, l, static_cast<double>(n));
  }
  return averaged(sum, static_cast<double>(train_.size()));
}

const ExpCLIPHistoryRow& ExpCLIPTrainer::run_epoch() {
  if (done()) throw InvalidArgument("training already finished");
  const bool image = epoch_ >= cfg_.epochs;
  set_stage(image);
  ExpCLIPHistoryRow row;
  row.stage = image ? "image" : "text";
  if (image)
    image_adam_->set_lr(nn::scheduled_lr(cfg_.image_lr, cfg_.lr_schedule, epoch_ - cfg_.epochs, cfg_.image_epochs));
  else
    text_adam_->set_lr(nn::scheduled_lr(cfg_.lr, cfg_.lr_schedule, epoch_, cfg_.epochs));
  row.losses = image ? image_epoch() : text_epoch();
  row.epoch = ++epoch_;
  history_.push_back(row);
  return history_.back();
}

void ExpCLIPTrainer::run(const std::function<void(const ExpCLIPHistoryRow&)>& on_epoch) {
  while (!done()) {
    const auto& row = run_epoch();
    if (on_epoch) on_epoch(row);
  }
}

nlohmann::json ExpCLIPTrainer::state() const {
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& r : history_)
    hist.push_back({r.epoch, r.stage, r.losses.ae, r.losses.emb, r.losses.cross, r.losses.total});
  return {{"epoch", epoch_},
          {"rng", rng_.save()},
          {"perturb_rng", perturb_rng_.save()},
          {"text_optimizer", text_adam_->state()},
          {"image_optimizer", image_adam_->state()},
          {"history", hist}};
}

void ExpCLIPTrainer::load_state(const nlohmann::json& s) {
  const int epoch = s.at("epoch").get<int>();
  if (epoch < 0 || epoch > total_epochs())
    throw InvalidArgument("resume state is at epoch " + std::to_string(epoch) + " of " +
                          std::to_string(total_epochs()));
  text_adam_->load_state(s.at("text_optimizer"));
  image_adam_->load_state(s.at("image_optimizer"));
  rng_.restore(s.at("rng").get<std::string>());
  perturb_rng_.restore(s.at("perturb_rng").get<std::string>());
  history_.clear();
  for (const auto& h : s.at("history"))
    history_.push_back({h.at(0).get<int>(), h.at(1).get<std::string>(),
                        {h.at(2).get<double>(), h.at(3).get<double>(), h.at(4).get<double>(),
                         h.at(5).get<double>()}});
  epoch_ = epoch;
}

std::string history_csv(const std::vector<ExpCLIPHistoryRow>& history) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,stage,L_ae,L_emb,L_cross,total\n";
  for (const auto& r : history)
    os << r.epoch << ',' << r.stage << ',' << r.losses.ae << ',' << r.losses.emb << ','
       << r.losses.cross << ',' << r.losses.total << '\n';
  return os.str();
}

std::vector<ExpCLIPHistoryRow> train_expclip(ExpCLIPModel& model, const tead::TEADStore& train,
                                             const ExpCLIPTrainConfig& cfg,
                                             const ImageFeatureSet* images) {
  ExpCLIPTrainer trainer(model, train, cfg, images);
  trainer.run();
  return trainer.history();
}

}  // namespace emoface::align
