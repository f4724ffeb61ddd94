#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emoface/align/model.hpp"
#include "emoface/animgen/generator.hpp"
#include "emoface/animgen/toy_data.hpp"
#include "emoface/nn/adam.hpp"
#include "emoface/tead/store.hpp"

namespace emoface::animgen {

struct GenLossWeights {
  double rec = 1.0;
  double lip = 1.0;
  double style = 1.0;
};

struct GenTrainConfig {
  std::size_t window = 64;
  std::size_t batch_size = 8;
  int epochs = 300;
  double lr = 1e-3;
  nn::LrSchedule lr_schedule = nn::LrSchedule::Constant;
  /// Probability that a step also runs the augmented-prompt branch.
  double epa_probability = 0.5;
  /// lambda ~ U[lambda_min, lambda_max].
  double lambda_min = 0.0;
  double lambda_max = 1.0;
  GenLossWeights weights;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument for window < 2, negative weights and the like.
  void validate() const;
  nlohmann::json to_json() const;
  static GenTrainConfig from_json(const nlohmann::json& j);
};

/// One batch of B aligned windows stacked as (B*T) rows.
struct GenBatch {
  nn::Matrix speech;
  nn::Matrix truth;
  nn::Index batch = 0;
};

/// Augmented prompts for one batch: the sampled expressions and blend
/// weights, one per sequence.
struct EpaDraw {
  std::vector<facs::BlendshapeWeights> sampled;
  std::vector<double> lambda;
  /// Optional B x D target for the style loss. Empty means E(prompt_aug) of
  /// the current parameters; either way it receives no gradient.
  nn::Matrix style_target;
};

struct GenLosses {
  double rec = 0.0;
  double lip = 0.0;
  double style = 0.0;
  double total = 0.0;
};

/// One training objective evaluation.
///
/// Clean branch: prompt = E_sa(truth), style = E(prompt), L_rec on
/// G(speech, style). With `epa`: prompt_aug = blend(prompt, sampled, lambda),
/// pred_aug = G(speech, E(prompt_aug)), L_lm on pred_aug and
/// L_style = |E(E_sa(pred_aug)) - E(prompt_aug)|_2 where the target term is
/// held constant. With `accumulate`, gradients of the weighted total reach
/// the generator and E_sa; ExpCLIP's parameters must be frozen by the caller
/// and only pass gradients through.
GenLosses generator_losses(GeneratorModel& gen, align::ExpCLIPModel& expclip, const GenBatch& batch,
                           const EpaDraw* epa, const GenLossWeights& w, bool accumulate);

/// E(prompt_aug) for `epa` at the current parameters, i.e. the value the
/// style loss would use as its constant target.
nn::Matrix epa_style_target(const GeneratorModel& gen, const align::ExpCLIPModel& expclip,
                            const GenBatch& batch, const EpaDraw& epa);

struct GenHistoryRow {
  int epoch = 0;
  GenLosses losses;
  int epa_steps = 0;
  int steps = 0;
};

/// Trains the generator against a frozen ExpCLIP model. Each epoch visits
/// every pair once as a random `window`-frame slice. Trainer state round-trips
/// through state() / load_state() for exact resumption.
class GeneratorTrainer {
 public:
  /// Freezes every ExpCLIP parameter. Throws InvalidArgument for an empty
  /// dataset, a clip shorter than the window, or EPA without a store.
  GeneratorTrainer(GeneratorModel& gen, align::ExpCLIPModel& expclip,
                   std::vector<TrainingPair> data, const tead::TEADStore* epa_store,
                   const GenTrainConfig& cfg);

  int epoch() const { return epoch_; }
  bool done() const { return epoch_ >= cfg_.epochs; }
  const GenHistoryRow& run_epoch();
  void run(const std::function<void(const GenHistoryRow&)>& on_epoch = {});
  const std::vector<GenHistoryRow>& history() const { return history_; }

  nlohmann::json state() const;
  void load_state(const nlohmann::json& state);

 private:
  GeneratorModel& gen_;
  align::ExpCLIPModel& expclip_;
  std::vector<TrainingPair> data_;
  std::vector<nn::Matrix> clip_rows_;
  const tead::TEADStore* epa_store_;
  GenTrainConfig cfg_;
  Rng rng_;
  // EPA draws use their own stream so that variants with and without EPA
  // see the same windows in the same order.
  Rng epa_rng_;
  std::unique_ptr<nn::Adam> adam_;
  int epoch_ = 0;
  std::vector<GenHistoryRow> history_;
};

/// CSV with columns epoch,L_rec,L_lm,L_style,total,epa_steps,steps.
std::string history_csv(const std::vector<GenHistoryRow>& history);

}  // namespace emoface::animgen
