#include "emoface/eval/ablation.hpp"

#include <algorithm>

#include "emoface/common/config.hpp"
#include "emoface/common/error.hpp"
#include "emoface/eval/metrics.hpp"
#include "emoface/facs/blendshapes.hpp"
#include "emoface/nn/losses.hpp"

namespace emoface::eval {

namespace {

const EvalReport& find_report(const std::vector<EvalReport>& reports, const std::string& metric) {
  for (const auto& r : reports)
    if (r.metric == metric) return r;
  throw InvalidArgument("missing report " + metric);
}

}  // namespace

bool AblationResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

std::string expclip_variant_hash(const align::ExpCLIPConfig& model, const align::ExpCLIPTrainConfig& train) {
  return config_hash({{"model", model.to_json()}, {"train", train.to_json()}});
}

std::shared_ptr<align::ExpCLIPModel> trained_expclip(const align::ExpCLIPConfig& model,
                                                     const align::ExpCLIPTrainConfig& train,
                                                     const tead::TEADStore& store,
                                                     ExpCLIPModelCache* cache) {
  const auto key = expclip_variant_hash(model, train);
  if (cache) {
    if (auto it = cache->find(key); it != cache->end()) return it->second;
  }
  auto m = std::make_shared<align::ExpCLIPModel>(model);
  align::train_expclip(*m, store, train);
  if (cache) (*cache)[key] = m;
  return m;
}

nn::Matrix perturbed_weights(const tead::TEADStore& store, double magnitude, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<facs::BlendshapeWeights> rows;
  for (const auto& q : store.records()) rows.push_back(facs::perturb_blendshapes(q.blendshapes, magnitude, rng));
  return align::to_matrix(rows);
}

std::vector<EvalReport> expclip_variant_reports(const std::vector<ExpCLIPVariant>& variants,
                                                const ExpCLIPAblationSetup& setup,
                                                ExpCLIPModelCache* cache, const Log& log) {
  if (!setup.train || !setup.test) throw InvalidArgument("ablation needs train and test stores");
  const nn::Matrix test = perturbed_weights(*setup.test, setup.perturb_magnitude, setup.perturb_seed);
  std::vector<EvalReport> out;
  for (const auto& v : variants) {
    if (log) log("training variant " + v.name);
    auto model = trained_expclip(setup.model, v.train, *setup.train, cache);
    out.push_back({v.name + "/perturbed_recon_mse", reconstruction_mse(*model, test), setup.dataset,
                   expclip_variant_hash(setup.model, v.train), v.train.seed});
  }
  return out;
}

AblationResult augmentation_ablation(const ExpCLIPAblationSetup& setup,
                                     const align::ExpCLIPTrainConfig& base, ExpCLIPModelCache* cache,
                                     const Log& log) {
  auto without = base;
  without.blendshape_augmentation = false;
  auto with = base;
  with.blendshape_augmentation = true;
  AblationResult r;
  r.reports = expclip_variant_reports({{"no_bs_aug", without}, {"bs_aug", with}}, setup, cache, log);
  const double a = find_report(r.reports, "bs_aug/perturbed_recon_mse").value;
  const double b = find_report(r.reports, "no_bs_aug/perturbed_recon_mse").value;
  r.checks.push_back({"bs_aug perturbed_recon_mse <= no_bs_aug perturbed_recon_mse", a <= b});
  return r;
}

std::vector<EvalReport> generator_variant_reports(const std::vector<GeneratorVariant>& variants,
                                                  const GeneratorAblationSetup& setup, const Log& log) {
  if (!setup.expclip || !setup.data) throw InvalidArgument("generator ablation needs ExpCLIP and data");
  std::vector<EvalReport> out;
  for (const auto& v : variants) {
    if (log) log("training variant " + v.name);
    animgen::GeneratorModel gen(setup.generator);
    animgen::GeneratorTrainer trainer(gen, *setup.expclip, *setup.data, setup.epa_store, v.train);
    trainer.run();
    const auto hash =
        config_hash({{"generator", setup.generator.to_json()}, {"train", v.train.to_json()}});
    out.push_back({v.name + "/style_consistency",
                   style_consistency(gen, *setup.expclip, setup.prompts, setup.speech), setup.dataset,
                   hash, v.train.seed});
  }
  return out;
}

AblationResult epa_ablation(const GeneratorAblationSetup& setup, const animgen::GenTrainConfig& base,
                            const Log& log) {
  auto no_epa = base;
  no_epa.epa_probability = 0.0;
  auto no_style = base;
  no_style.weights.style = 0.0;
  AblationResult r;
  r.reports = generator_variant_reports({{"no_epa", no_epa}, {"epa_no_style", no_style}, {"epa", base}},
                                        setup, log);
  const double epa = find_report(r.reports, "epa/style_consistency").value;
  const double none = find_report(r.reports, "no_epa/style_consistency").value;
  const double nostyle = find_report(r.reports, "epa_no_style/style_consistency").value;
  r.checks.push_back({"epa style_consistency > no_epa style_consistency", epa > none});
  r.checks.push_back({"epa style_consistency > epa_no_style style_consistency", epa > nostyle});
  return r;
}

}  // namespace emoface::eval
