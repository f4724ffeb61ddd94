#include <algorithm>
#include <iomanip>

#include "emoface/animgen/speech_features.hpp"
#include "emoface/animgen/toy_data.hpp"
#include "emoface/common/config.hpp"
#include "emoface/eval/ablation.hpp"
#include "emoface/eval/metrics.hpp"
#include "emoface/nn/checkpoint.hpp"
#include "support.hpp"

namespace emoface::cli {

namespace {

struct EvalOptions {
  std::string expclip;
  std::string store;
  std::optional<std::string> ids;
  std::optional<std::string> train_ids;
  double perturb = 0.0;
  std::uint64_t perturb_seed = 0;
  std::size_t k = 1;
  std::string from;
  std::string to;
  int steps = 20;
  std::string out;
};

tead::TEADStore restrict(const tead::TEADStore& store, const std::optional<std::string>& ids) {
  return ids ? store.subset(read_lines(*ids)) : store.subset([&] {
    std::vector<std::string> all;
    for (const auto& q : store.records()) all.push_back(q.id);
    return all;
  }());
}

std::string dataset_id(const std::string& store, const std::optional<std::string>& ids) {
  return fs::path(store).filename().string() + (ids ? "@" + fs::path(*ids).filename().string() : "");
}

/// Reports, sidecar and a printed table; a failed check becomes exit 1.
void finish(const Context& ctx, const std::string& command, const fs::path& prefix, const nlohmann::json& cfg,
            std::uint64_t seed, const std::vector<eval::EvalReport>& reports,
            const std::vector<eval::DirectionalCheck>& checks) {
  eval::write_reports(prefix, reports, checks);
  fs::path json = prefix;
  json += ".json";
  write_sidecar(ctx, json, command, cfg, seed);
  for (const auto& r : reports)
    ctx.out << std::left << std::setw(44) << r.metric << " " << std::setprecision(6) << r.value << "\n";
  bool ok = true;
  for (const auto& c : checks) {
    ctx.out << (c.passed ? "PASS " : "FAIL ") << c.claim << "\n";
    ok = ok && c.passed;
  }
  if (!ok) throw CheckFailed("a directional check failed");
}

void run_recon(const Context& ctx, const EvalOptions& o) {
  const auto model = align::ExpCLIPModel::load(o.expclip);
  const auto set = restrict(tead::TEADStore::load(o.store), o.ids);
  const nlohmann::json cfg = {{"expclip", o.expclip}, {"store", o.store}, {"ids", o.ids ? *o.ids : ""},
                              {"perturb", o.perturb}, {"perturb_seed", o.perturb_seed}};
  const double mse = o.perturb > 0.0
                         ? eval::reconstruction_mse(*model, eval::perturbed_weights(set, o.perturb, o.perturb_seed))
                         : eval::reconstruction_mse(*model, set);
  finish(ctx, "eval recon", o.out, cfg, o.perturb_seed,
         {{o.perturb > 0.0 ? "perturbed_recon_mse" : "recon_mse", mse, dataset_id(o.store, o.ids),
           config_hash(cfg), o.perturb_seed}},
         {});
}

void run_retrieval(const Context& ctx, const EvalOptions& o) {
  const auto model = align::ExpCLIPModel::load(o.expclip);
  const auto store = tead::TEADStore::load(o.store);
  const auto train = restrict(store, o.train_ids), test = restrict(store, o.ids);
  const nlohmann::json cfg = {{"expclip", o.expclip}, {"store", o.store}, {"train_ids", o.train_ids ? *o.train_ids : ""},
                              {"ids", o.ids ? *o.ids : ""}, {"k", o.k}};
  const double acc = eval::tag_retrieval_accuracy(*model, train, test, prefix_groups(train), o.k);
  finish(ctx, "eval retrieval", o.out, cfg, 0,
         {{"text_to_expression_top" + std::to_string(o.k), acc, dataset_id(o.store, o.ids), config_hash(cfg), 0}},
         {});
}

void run_smoothness(const Context& ctx, const EvalOptions& o) {
  const auto model = align::ExpCLIPModel::load(o.expclip);
  const auto set = restrict(tead::TEADStore::load(o.store), o.ids);
  const auto group_of = prefix_groups(set);
  const auto centroids = eval::group_centroids(set, group_of);
  auto centroid = [&](const std::string& name) {
    const auto g = group_of(name + "-");
    for (std::size_t i = 0; g && i < centroids.groups.size(); ++i)
      if (centroids.groups[i] == *g) return centroids.centroids[i];
    throw InvalidArgument("no records in group '" + name + "'");
  };
  const auto path = model->interpolate_expressions(centroid(o.from), centroid(o.to), o.steps);
  const auto s = eval::smoothness(path);
  double lo = 1.0, hi = 0.0;
  for (const auto& b : path)
    for (double v : b.values()) lo = std::min(lo, v), hi = std::max(hi, v);
  const nlohmann::json cfg = {{"expclip", o.expclip}, {"store", o.store}, {"ids", o.ids ? *o.ids : ""},
                              {"from", o.from}, {"to", o.to}, {"steps", o.steps}};
  const auto h = config_hash(cfg);
  const auto ds = dataset_id(o.store, o.ids);
  finish(ctx, "eval smoothness", o.out, cfg, 0,
         {{"interp_max_delta", s.max_delta, ds, h, 0},
          {"interp_mean_delta", s.mean_delta, ds, h, 0},
          {"interp_min_weight", lo, ds, h, 0},
          {"interp_max_weight", hi, ds, h, 0}},
         {{"interp_max_delta < 4 * interp_mean_delta", s.max_delta < 4.0 * s.mean_delta},
          {"interpolated weights within [0, 1]", lo >= 0.0 && hi <= 1.0}});
}

struct AblationOptions {
  ConfigOptions config;
  std::string which = "all";
  std::string out;
};

void run_ablation(const Context& ctx, const AblationOptions& o) {
  const auto cfg = o.config.resolve();
  const auto data = load_split_store(cfg, ctx.err);
  const auto model_cfg = align::ExpCLIPConfig::from_json(seeded_section(cfg, "model"));
  const auto train_cfg = align::ExpCLIPTrainConfig::from_json(seeded_section(cfg, "train"));
  const std::string dataset = fs::path(require_string(cfg, "data.store")).filename().string() + "@test";
  auto log = [&ctx](std::string_view line) { ctx.err << line << "\n"; };

  eval::AblationResult all;
  eval::ExpCLIPModelCache cache;
  if (o.which == "aug" || o.which == "all") {
    eval::ExpCLIPAblationSetup setup{model_cfg, &data.train, &data.test,
                                     config_value<double>(cfg, "eval.perturb_magnitude", 0.05),
                                     config_value<std::uint64_t>(cfg, "eval.perturb_seed", global_seed(cfg)),
                                     dataset};
    auto r = eval::augmentation_ablation(setup, train_cfg, &cache, log);
    all.reports.insert(all.reports.end(), r.reports.begin(), r.reports.end());
    all.checks.insert(all.checks.end(), r.checks.begin(), r.checks.end());
  }
  if (o.which == "epa" || o.which == "all") {
    std::shared_ptr<align::ExpCLIPModel> expclip;
    if (const auto* p = find_config_path(cfg, "data.expclip"); p && p->is_string())
      expclip = align::ExpCLIPModel::load(p->get<std::string>());
    else
      expclip = eval::trained_expclip(model_cfg, train_cfg, data.train, &cache);
    auto gen_json = seeded_section(cfg, "generator.model");
    if (!gen_json.contains("style_dim")) gen_json["style_dim"] = expclip->config().embed_dim;
    const auto pairs = animgen::load_training_pairs(require_string(cfg, "data.pairs"));

    eval::GeneratorAblationSetup setup;
    setup.expclip = expclip.get();
    setup.generator = animgen::GeneratorConfig::from_json(gen_json);
    setup.data = &pairs;
    setup.epa_store = &data.train;
    for (const auto& q : data.test.records()) setup.prompts.push_back(q.blendshapes);
    Rng speech_rng(config_value<std::uint64_t>(cfg, "eval.speech_seed", 77));
    const auto clips = config_value<std::size_t>(cfg, "eval.speech_clips", 4);
    const auto frames = config_value<std::size_t>(cfg, "eval.speech_frames", 64);
    for (std::size_t i = 0; i < clips; ++i)
      setup.speech.push_back(
          animgen::synthesize_speech(frames, setup.generator.speech_dim, animgen::kDefaultFps, speech_rng).speech);
    setup.dataset = dataset;
    auto r = eval::epa_ablation(setup, animgen::GenTrainConfig::from_json(seeded_section(cfg, "generator.train")),
                                log);
    all.reports.insert(all.reports.end(), r.reports.begin(), r.reports.end());
    all.checks.insert(all.checks.end(), r.checks.begin(), r.checks.end());
  }
  finish(ctx, "eval ablation", o.out, cfg, global_seed(cfg), all.reports, all.checks);
}

}  // namespace

void add_eval_commands(CLI::App& app, Context& ctx) {
  auto* ev = app.add_subcommand("eval", "Metrics and ablations; reports as CSV and JSON");
  ev->require_subcommand(1);

  auto add_common = [](CLI::App* cmd, EvalOptions& o) {
    cmd->add_option("--expclip", o.expclip, "ExpCLIP checkpoint")->required();
    cmd->add_option("--store", o.store, "TEAD store (JSONL)")->required();
    cmd->add_option("--ids", o.ids, "Evaluate only these ids (one per line)");
    cmd->add_option("--out", o.out, "Report prefix; writes <prefix>.csv and <prefix>.json")->required();
  };

  auto r = std::make_shared<EvalOptions>();
  auto* recon = ev->add_subcommand("recon", "Reconstruction MSE of D(E(b))");
  add_common(recon, *r);
  recon->add_option("--perturb", r->perturb, "Perturb the weights by up to this much first");
  recon->add_option("--perturb-seed", r->perturb_seed, "Seed of the perturbation");
  recon->callback([&ctx, r] { run_recon(ctx, *r); });

  auto t = std::make_shared<EvalOptions>();
  auto* retrieval = ev->add_subcommand("retrieval", "Text-to-expression top-k retrieval over id-prefix groups");
  add_common(retrieval, *t);
  retrieval->add_option("--train-ids", t->train_ids, "Records that define the group embeddings");
  retrieval->add_option("--k", t->k, "k of top-k")->check(CLI::PositiveNumber);
  retrieval->callback([&ctx, t] { run_retrieval(ctx, *t); });

  auto s = std::make_shared<EvalOptions>();
  auto* smooth = ev->add_subcommand("smoothness", "Decode an embedding interpolation between two group centroids");
  add_common(smooth, *s);
  smooth->add_option("--from", s->from, "Start group (id prefix)")->required();
  smooth->add_option("--to", s->to, "End group (id prefix)")->required();
  smooth->add_option("--steps", s->steps, "Interpolation points")->check(CLI::Range(2, 100000));
  smooth->callback([&ctx, s] { run_smoothness(ctx, *s); });

  auto a = std::make_shared<AblationOptions>();
  auto* ablation = ev->add_subcommand("ablation", "Train variants under one seed and check the expected ordering");
  add_config_options(*ablation, a->config, true);
  ablation->add_option("--which", a->which, "aug, epa or all")->check(CLI::IsMember({"aug", "epa", "all"}));
  ablation->add_option("--out", a->out, "Report prefix")->required();
  ablation->callback([&ctx, a] { run_ablation(ctx, *a); });
}

}  // namespace emoface::cli
