#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "emoface/align/trainer.hpp"
#include "emoface/animgen/trainer.hpp"
#include "emoface/eval/report.hpp"

namespace emoface::eval {

using Log = std::function<void(std::string_view)>;

struct AblationResult {
  std::vector<EvalReport> reports;
  std::vector<DirectionalCheck> checks;
  bool passed() const;
};

// --- expression alignment ----------------------------------------------------

struct ExpCLIPVariant {
  std::string name;
  align::ExpCLIPTrainConfig train;
};

struct ExpCLIPAblationSetup {
  align::ExpCLIPConfig model;
  const tead::TEADStore* train = nullptr;
  const tead::TEADStore* test = nullptr;
  /// The test weights are perturbed once with this magnitude and seed.
  double perturb_magnitude = 0.05;
  std::uint64_t perturb_seed = 0;
  std::string dataset;
};

/// Trained models keyed by the hash of {model config, train config}, so a
/// variant identical to an already trained model is not trained again.
using ExpCLIPModelCache = std::map<std::string, std::shared_ptr<align::ExpCLIPModel>>;

std::string expclip_variant_hash(const align::ExpCLIPConfig& model, const align::ExpCLIPTrainConfig& train);

/// Trains (or fetches from `cache`) a model for one variant.
std::shared_ptr<align::ExpCLIPModel> trained_expclip(const align::ExpCLIPConfig& model,
                                                     const align::ExpCLIPTrainConfig& train,
                                                     const tead::TEADStore& store,
                                                     ExpCLIPModelCache* cache = nullptr);

nn::Matrix perturbed_weights(const tead::TEADStore& store, double magnitude, std::uint64_t seed);

/// One "<variant>/perturbed_recon_mse" report per variant, same seeds.
std::vector<EvalReport> expclip_variant_reports(const std::vector<ExpCLIPVariant>& variants,
                                                const ExpCLIPAblationSetup& setup,
                                                ExpCLIPModelCache* cache = nullptr, const Log& log = {});

/// Variants no_bs_aug / bs_aug derived from `base`; checks that augmentation
/// does not increase the perturbed reconstruction error.
AblationResult augmentation_ablation(const ExpCLIPAblationSetup& setup,
                                     const align::ExpCLIPTrainConfig& base,
                                     ExpCLIPModelCache* cache = nullptr, const Log& log = {});

// --- generator ---------------------------------------------------------------

struct GeneratorVariant {
  std::string name;
  animgen::GenTrainConfig train;
};

struct GeneratorAblationSetup {
  align::ExpCLIPModel* expclip = nullptr;
  animgen::GeneratorConfig generator;
  const std::vector<animgen::TrainingPair>* data = nullptr;
  const tead::TEADStore* epa_store = nullptr;
  /// Expression prompts the generators never trained on.
  std::vector<facs::BlendshapeWeights> prompts;
  std::vector<animgen::SpeechFeatureSequence> speech;
  std::string dataset;
};

/// One "<variant>/style_consistency" report per variant, same seeds.
std::vector<EvalReport> generator_variant_reports(const std::vector<GeneratorVariant>& variants,
                                                  const GeneratorAblationSetup& setup,
                                                  const Log& log = {});

/// Variants no_epa / epa_no_style / epa derived from `base`; checks that
/// EPA beats no EPA and that the style loss beats EPA without it, both
/// strictly.
AblationResult epa_ablation(const GeneratorAblationSetup& setup, const animgen::GenTrainConfig& base,
                            const Log& log = {});

}  // namespace emoface::eval
