// Prints one PASS/FAIL line per acceptance criterion and exits non-zero if
// any criterion fails. Everything runs in-process on the shipped toy data
// and configs, so the numbers match the equivalent CLI runs.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "emoface/align/image_features.hpp"
#include "emoface/align/trainer.hpp"
#include "emoface/animgen/generator.hpp"
#include "emoface/animgen/toy_data.hpp"
#include "emoface/common/config.hpp"
#include "emoface/common/error.hpp"
#include "emoface/common/text.hpp"
#include "emoface/eval/ablation.hpp"
#include "emoface/eval/metrics.hpp"
#include "emoface/eval/verify.hpp"
#include "emoface/tead/annotate.hpp"
#include "emoface/tead/client.hpp"
#include "emoface/tead/toy_corpus.hpp"

namespace {

using namespace emoface;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void report(int n, const std::string& title, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.passed) ++failures;
  std::cout << (o.passed ? "PASS" : "FAIL") << " [" << n << "] " << title << ": " << o.detail << std::endl;
}

/// cfg[name] with "seed" defaulting to the top-level seed, as the CLI resolves it.
nlohmann::json seeded(const nlohmann::json& cfg, const std::string& name) {
  const auto* p = find_config_path(cfg, name);
  nlohmann::json s = p ? *p : nlohmann::json::object();
  if (!s.contains("seed")) s["seed"] = config_value<std::uint64_t>(cfg, "seed", 0);
  return s;
}

Outcome named_checks(const std::vector<eval::NamedCheck>& all, const std::vector<std::string>& names) {
  std::vector<eval::NamedCheck> picked;
  for (const auto& n : names) picked.push_back(eval::find_check(all, n));
  const auto r = eval::run_checks(picked);
  std::string detail;
  for (const auto& c : r.results)
    detail += (detail.empty() ? "" : "; ") + c.name + " " + (c.outcome.passed ? "ok" : "FAILED") + " (" +
              fmt(c.outcome.metric) + ")";
  return {r.passed(), detail};
}

// Shared state built once: the toy corpus, its fixture-annotated store and the
// split used by the toy configs.
struct Toy {
  fs::path dir;
  nlohmann::json expclip_cfg;
  nlohmann::json ablation_cfg;
  tead::TEADStore all;
  tead::TEADStore train;
  tead::TEADStore test;
  std::unique_ptr<align::ExpCLIPModel> expclip;
  double train_eval_seconds = 0.0;
};

tead::TEADStore fixture_build(const fs::path& corpus_dir, tead::AnnotateSummary* summary = nullptr) {
  const auto& map = facs::AUBlendshapeMap::builtin();
  tead::FixtureClient client(corpus_dir / "fixtures");
  tead::TEADStore store;
  for (auto q : tead::annotate_corpus(tead::load_corpus(corpus_dir / "corpus.jsonl"), client, map, {}, summary))
    store.add(std::move(q));
  return store;
}

Toy make_toy() {
  Toy t;
  t.dir = fs::temp_directory_path() / "emoface_acceptance";
  fs::remove_all(t.dir);
  const auto& map = facs::AUBlendshapeMap::builtin();
  tead::write_toy_corpus(t.dir / "toy", tead::make_toy_records({}, map), map);
  t.expclip_cfg = load_config_file(fs::path(EMOFACE_SOURCE_DIR) / "configs/toy_expclip.toml");
  t.ablation_cfg = load_config_file(fs::path(EMOFACE_SOURCE_DIR) / "configs/toy_ablation.toml");
  const auto split_seed = config_value<std::uint64_t>(t.expclip_cfg, "seed", 0);
  t.all = fixture_build(t.dir / "toy");
  t.all.set_split_seed(split_seed);
  const auto split = tead::split_dataset(t.all, config_value<double>(t.expclip_cfg, "data.split_fraction", 0.9));
  t.train = t.all.subset(split.train);
  t.test = t.all.subset(split.test);
  return t;
}

}  // namespace

int main() {
  std::cout << std::unitbuf;
  Toy toy = make_toy();

  report(1, "gradient correctness", [] {
    const auto start = Clock::now();
    const auto r = eval::run_checks(eval::gradient_checks(eval::kGradTolerance));
    const double secs = seconds_since(start);
    double worst = 0.0;
    std::string worst_name;
    for (const auto& c : r.results)
      if (c.outcome.metric >= worst) worst = c.outcome.metric, worst_name = c.name;
    std::string failed;
    for (const auto& c : r.results)
      if (!c.outcome.passed) failed += " " + c.name;
    return Outcome{r.passed() && secs < 120.0,
                   std::to_string(r.results.size() - r.failures()) + "/" + std::to_string(r.results.size()) +
                       " layer and loss checks below 1e-4, worst " + worst_name + " " + fmt(worst, 3) + ", " +
                       fmt(secs, 3) + " s (limit 120 s)" + (failed.empty() ? "" : "; failed:" + failed)};
  });

  const auto invariants = eval::invariant_checks(10000);
  report(2, "prompt blend exactness over 10000 cases", [&] {
    return named_checks(invariants,
                        {"invariant/blend_endpoints", "invariant/blend_midpoint", "invariant/blend_convex_hull"});
  });

  report(3, "lip loss offset invariance over 10000 cases", [&] {
    return named_checks(invariants, {"invariant/lip_loss_offset"});
  });

  report(4, "toy alignment", [&] {
    const auto start = Clock::now();
    const auto model_cfg = align::ExpCLIPConfig::from_json(seeded(toy.expclip_cfg, "model"));
    const auto train_cfg = align::ExpCLIPTrainConfig::from_json(seeded(toy.expclip_cfg, "train"));
    const auto images = align::synthesize_image_features(toy.all, model_cfg.image_width,
                                                         config_value<std::uint64_t>(toy.expclip_cfg, "seed", 0));
    toy.expclip = std::make_unique<align::ExpCLIPModel>(model_cfg);
    align::train_expclip(*toy.expclip, toy.train, train_cfg, &images);
    const double mse = eval::reconstruction_mse(*toy.expclip, toy.test);
    const double top1 = eval::tag_retrieval_accuracy(*toy.expclip, toy.train, toy.test, tead::toy_cluster_of, 1);
    toy.train_eval_seconds = seconds_since(start);
    return Outcome{mse <= 0.01 && top1 >= 0.9 && toy.train_eval_seconds < 300.0,
                   "held-out MSE " + fmt(mse) + " (limit 0.01), top-1 retrieval " + fmt(100 * top1, 3) +
                       "% (limit 90%) over " + std::to_string(toy.test.size()) + " held-out records, " +
                       fmt(toy.train_eval_seconds, 3) + " s (limit 300 s)"};
  });

  report(5, "blendshape augmentation direction", [&] {
    const auto& cfg = toy.ablation_cfg;
    eval::ExpCLIPAblationSetup setup{align::ExpCLIPConfig::from_json(seeded(cfg, "model")), &toy.train, &toy.test,
                                     config_value<double>(cfg, "eval.perturb_magnitude", 0.05),
                                     config_value<std::uint64_t>(cfg, "eval.perturb_seed",
                                                                 config_value<std::uint64_t>(cfg, "seed", 0)),
                                     "toy@test"};
    const auto r = eval::augmentation_ablation(setup, align::ExpCLIPTrainConfig::from_json(seeded(cfg, "train")));
    return Outcome{r.passed(), "perturbed MSE with augmentation " + fmt(r.reports[1].value) + " vs without " +
                                   fmt(r.reports[0].value)};
  });

  report(6, "expression prompt augmentation direction", [&] {
    if (!toy.expclip) throw Error("needs the ExpCLIP model from criterion 4");
    const auto& cfg = toy.ablation_cfg;
    auto gen_json = seeded(cfg, "generator.model");
    if (!gen_json.contains("style_dim")) gen_json["style_dim"] = toy.expclip->config().embed_dim;
    animgen::ToyGeneratorOptions gopts;
    gopts.speech_dim = gen_json.value("speech_dim", gopts.speech_dim);
    gopts.seed = config_value<std::uint64_t>(cfg, "seed", 0);
    const auto pairs = animgen::make_toy_generator_data(gopts, facs::AUBlendshapeMap::builtin());

    eval::GeneratorAblationSetup setup;
    setup.expclip = toy.expclip.get();
    setup.generator = animgen::GeneratorConfig::from_json(gen_json);
    setup.data = &pairs;
    setup.epa_store = &toy.train;
    for (const auto& q : toy.test.records()) setup.prompts.push_back(q.blendshapes);
    Rng speech_rng(config_value<std::uint64_t>(cfg, "eval.speech_seed", 77));
    for (std::size_t i = 0; i < config_value<std::size_t>(cfg, "eval.speech_clips", 4); ++i)
      setup.speech.push_back(animgen::synthesize_speech(config_value<std::size_t>(cfg, "eval.speech_frames", 64),
                                                        setup.generator.speech_dim, animgen::kDefaultFps,
                                                        speech_rng)
                                 .speech);
    setup.dataset = "toy@test";
    const auto r = eval::epa_ablation(setup, animgen::GenTrainConfig::from_json(seeded(cfg, "generator.train")));
    return Outcome{r.passed(), "style cosine on " + std::to_string(setup.prompts.size()) +
                                   " unseen prompts: EPA " + fmt(r.reports[2].value, 6) + " > no EPA " +
                                   fmt(r.reports[0].value, 6) + " and > EPA without style loss " +
                                   fmt(r.reports[1].value, 6)};
  });

  report(7, "generation contracts", [&] {
    const auto gen_cfg = load_config_file(fs::path(EMOFACE_SOURCE_DIR) / "configs/toy_generator.toml");
    auto gen_json = seeded(gen_cfg, "model");
    gen_json["style_dim"] = toy.expclip ? toy.expclip->config().embed_dim : 64;
    const auto cfg = animgen::GeneratorConfig::from_json(gen_json);
    animgen::GeneratorModel a(cfg), b(cfg);
    const auto reloaded = animgen::GeneratorModel::from_checkpoint(a.to_checkpoint());
    const auto& names = facs::AUBlendshapeMap::builtin().blendshape_names();
    Rng rng(5);
    bool ok = true;
    std::size_t clips = 0;
    for (std::size_t frames : {1u, 2u, 17u, 64u, 250u}) {
      const auto speech = animgen::synthesize_speech(frames, cfg.speech_dim, animgen::kDefaultFps, rng).speech;
      for (double scale : {1.0, 1e3}) {
        align::StyleEmbedding style(cfg.style_dim);
        for (auto& v : style) v = rng.normal(0.0, scale);
        const auto clip = a.generate(speech, style);
        ok = ok && clip.frame_count() == frames;
        for (const auto& f : clip.frames())
          for (double v : f.values()) ok = ok && v >= 0.0 && v <= 1.0;
        const auto bytes = clip.to_csv(names);
        ok = ok && bytes == b.generate(speech, style).to_csv(names) &&
             bytes == reloaded->generate(speech, style).to_csv(names);
        ++clips;
      }
    }
    return Outcome{ok, std::to_string(clips) +
                           " clips for T in {1, 2, 17, 64, 250}: T frames out, weights in [0,1], byte-identical "
                           "across two models and a checkpoint reload"};
  });

  report(8, "pipeline reproducibility", [&] {
    const auto again = fixture_build(toy.dir / "toy");
    const bool identical = again.to_jsonl() == toy.all.to_jsonl();

    auto lines = split(trim(toy.all.to_jsonl()), '\n');
    lines[2].insert(lines[2].find("\"b\":[") + 5, "0.5,");
    std::string named;
    try {
      tead::TEADStore::from_jsonl(join(lines, "\n"));
    } catch (const ValidationError& e) {
      named = e.what();
    }
    const bool rejected = named.find("line 3") != std::string::npos;

    const auto& map = facs::AUBlendshapeMap::builtin();
    const auto records = tead::make_toy_records({}, map);
    tead::write_toy_corpus(toy.dir / "malformed", records, map, 4);
    tead::AnnotateSummary summary;
    const auto partial = fixture_build(toy.dir / "malformed", &summary);
    bool skipped_ok = summary.produced == records.size() - 4 && summary.skipped.size() == 4 &&
                      partial.size() == records.size() - 4;
    for (std::size_t i = 0; skipped_ok && i < 4; ++i) {
      const auto& id = records[records.size() - 4 + i].record.id;
      skipped_ok = summary.skipped[i].id == id && !partial.find(id);
    }
    return Outcome{identical && rejected && skipped_ok,
                   std::string(identical ? "rebuild byte-identical" : "rebuild DIFFERS") + "; corrupted record " +
                       (rejected ? "rejected naming line 3" : "NOT rejected with its line") + "; " +
                       std::to_string(summary.skipped.size()) + " malformed replies skipped and counted, " +
                       std::to_string(summary.produced) + " records kept"};
  });

  report(9, "interpolation smoothness", [&] {
    if (!toy.expclip) throw Error("needs the ExpCLIP model from criterion 4");
    const auto c = eval::group_centroids(toy.all, tead::toy_cluster_of);
    const auto& clusters = tead::toy_clusters();
    std::size_t best_a = 0, best_b = 1, pass = 0, pairs = 0;
    double best_dist = -1.0;
    bool best_ok = false;
    std::string best_detail;
    for (std::size_t i = 0; i < c.groups.size(); ++i)
      for (std::size_t j = i + 1; j < c.groups.size(); ++j) {
        const auto path = toy.expclip->interpolate_expressions(c.centroids[i], c.centroids[j], 20);
        const auto s = eval::smoothness(path);
        bool in_range = true;
        for (const auto& w : path)
          for (double v : w.values()) in_range = in_range && v >= 0.0 && v <= 1.0;
        const bool ok = s.max_delta < 4.0 * s.mean_delta && in_range;
        ++pairs;
        pass += ok;
        const double dist =
            (toy.expclip->encode_expression(c.centroids[i]) - toy.expclip->encode_expression(c.centroids[j])).norm();
        if (dist > best_dist) {
          best_dist = dist, best_a = i, best_b = j, best_ok = ok;
          best_detail = "max delta " + fmt(s.max_delta) + " vs 4 x mean " + fmt(4.0 * s.mean_delta) +
                        (in_range ? ", weights in [0,1]" : ", weights OUT OF RANGE");
        }
      }
    return Outcome{best_ok, "most distant centroids " + clusters[c.groups[best_a]].name + " -> " +
                                clusters[c.groups[best_b]].name + " (embedding distance " + fmt(best_dist) +
                                "): " + best_detail + "; all centroid pairs: " + std::to_string(pass) + "/" +
                                std::to_string(pairs) + " pass"};
  });

  std::cout << (failures == 0 ? "all 9 criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
