#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emoface/align/image_features.hpp"
#include "emoface/align/model.hpp"
#include "emoface/common/rng.hpp"
#include "emoface/nn/adam.hpp"
#include "emoface/tead/augment.hpp"
#include "emoface/tead/store.hpp"

namespace emoface::align {

struct ExpCLIPTrainConfig {
  LossWeights weights;
  double lr = 1e-5;
  /// Applied separately within the text and the image stage.
  nn::LrSchedule lr_schedule = nn::LrSchedule::Constant;
  std::size_t batch_size = 32;
  int epochs = 200;
  bool text_augmentation = true;
  std::vector<tead::TextAugOp> text_aug_ops = {tead::TextAugOp::StopwordRemoval,
                                               tead::TextAugOp::SynonymReplace,
                                               tead::TextAugOp::SentenceShuffle};
  /// Each listed op is applied to a sampled text independently with this
  /// probability.
  double text_aug_probability = 0.5;
  bool blendshape_augmentation = true;
  double perturb_magnitude = 0.05;
  /// Image-projector epochs run after the text stage; only P_img trains.
  int image_epochs = 0;
  double image_lr = 1e-3;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static ExpCLIPTrainConfig from_json(const nlohmann::json& j);
};

struct ExpCLIPHistoryRow {
  int epoch = 0;  // 1-based, counting across both stages
  std::string stage;  // "text" or "image"
  ExpCLIPLosses losses;
};

/// Two-stage schedule. Text stage: every step samples one text view per
/// record, optionally augments it and perturbs the target weights, and
/// minimises the weighted sum of the three losses over E, D and P_text.
/// Image stage: E, D and P_text are frozen and P_img minimises the embedding
/// and cross-reconstruction losses from image features.
///
/// The full trainer state (epoch, random stream, optimizer moments, history)
/// round-trips through state() / load_state(), so a resumed run continues
/// exactly as an uninterrupted one would.
class ExpCLIPTrainer {
 public:
  /// Throws InvalidArgument for an empty training set, or for image epochs
  /// without image features for every record.
  ExpCLIPTrainer(ExpCLIPModel& model, const tead::TEADStore& train, const ExpCLIPTrainConfig& cfg,
                 const ImageFeatureSet* images = nullptr);

  int epoch() const { return epoch_; }
  int total_epochs() const { return cfg_.epochs + cfg_.image_epochs; }
  bool done() const { return epoch_ >= total_epochs(); }

  const ExpCLIPHistoryRow& run_epoch();
  void run(const std::function<void(const ExpCLIPHistoryRow&)>& on_epoch = {});

  const std::vector<ExpCLIPHistoryRow>& history() const { return history_; }

  nlohmann::json state() const;
  void load_state(const nlohmann::json& state);

 private:
  ExpCLIPLosses text_epoch();
  ExpCLIPLosses image_epoch();
  void set_stage(bool image);

  ExpCLIPModel& model_;
  std::vector<tead::Quadruple> train_;
  ExpCLIPTrainConfig cfg_;
  nn::Matrix image_rows_;
  Rng rng_;
  // Blendshape perturbation draws from its own stream so that toggling the
  // augmentation leaves batch order, text views and text edits unchanged.
  Rng perturb_rng_;
  std::unique_ptr<nn::Adam> text_adam_;
  std::unique_ptr<nn::Adam> image_adam_;
  int epoch_ = 0;
  std::vector<ExpCLIPHistoryRow> history_;
};

/// CSV with columns epoch,stage,L_ae,L_emb,L_cross,total.
std::string history_csv(const std::vector<ExpCLIPHistoryRow>& history);

/// Runs a fresh trainer to completion and returns its history.
std::vector<ExpCLIPHistoryRow> train_expclip(ExpCLIPModel& model, const tead::TEADStore& train,
                                             const ExpCLIPTrainConfig& cfg,
                                             const ImageFeatureSet* images = nullptr);

}  // namespace emoface::align
