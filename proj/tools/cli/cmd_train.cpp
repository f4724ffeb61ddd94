#include <iomanip>

#include "emoface/align/image_features.hpp"
#include "emoface/align/trainer.hpp"
#include "emoface/animgen/toy_data.hpp"
#include "emoface/animgen/trainer.hpp"
#include "emoface/common/config.hpp"
#include "emoface/common/text.hpp"
#include "emoface/nn/checkpoint.hpp"
#include "support.hpp"

namespace emoface::cli {

namespace {

struct TrainOptions {
  ConfigOptions config;
  bool resume = false;
  int stop_after = 0;
  int log_every = 10;
};

fs::path output_dir(const nlohmann::json& cfg, const std::string& fallback) {
  return config_value<std::string>(cfg, "output.dir", fallback);
}

/// Trainer state plus the hash of the config it belongs to, so a resume
/// with a different config is refused.
void save_state(const fs::path& path, const nlohmann::json& cfg, const nlohmann::json& state) {
  nn::write_json_file(path, {{"config_hash", config_hash(cfg)}, {"trainer", state}});
}

nlohmann::json load_state(const fs::path& path, const nlohmann::json& cfg) {
  if (!fs::exists(path)) throw IoError("nothing to resume: " + path.string() + " not found");
  const auto j = nn::read_json_file(path);
  if (j.value("config_hash", std::string()) != config_hash(cfg))
    throw ValidationError("resume state " + path.string() + " was written with a different config");
  return j.at("trainer");
}

/// Runs epochs until done or `stop_after` epochs in this invocation.
template <typename Trainer, typename Print>
int run_epochs(Trainer& trainer, const TrainOptions& o, Print print) {
  int ran = 0;
  while (!trainer.done() && (o.stop_after <= 0 || ran < o.stop_after)) {
    const auto& row = trainer.run_epoch();
    ++ran;
    if (o.log_every > 0 && (row.epoch % o.log_every == 0 || row.epoch == 1 || trainer.done())) print(row);
  }
  return ran;
}

void run_expclip(const Context& ctx, const TrainOptions& o) {
  const auto cfg = o.config.resolve();
  const auto model_cfg = align::ExpCLIPConfig::from_json(seeded_section(cfg, "model"));
  const auto train_cfg = align::ExpCLIPTrainConfig::from_json(seeded_section(cfg, "train"));
  const auto data = load_split_store(cfg, ctx.err);

  std::optional<align::ImageFeatureSet> images;
  if (const auto* p = find_config_path(cfg, "data.image_features"); p && p->is_string())
    images = align::ImageFeatureSet::load(p->get<std::string>());

  const fs::path dir = output_dir(cfg, "runs/expclip");
  const fs::path ckpt = dir / "expclip.json", state = dir / "expclip.state.json",
                 hist = dir / "expclip_history.csv";

  auto model = o.resume ? align::ExpCLIPModel::load(ckpt) : std::make_unique<align::ExpCLIPModel>(model_cfg);
  align::ExpCLIPTrainer trainer(*model, data.train, train_cfg, images ? &*images : nullptr);
  if (o.resume) trainer.load_state(load_state(state, cfg));

  const int ran = run_epochs(trainer, o, [&](const align::ExpCLIPHistoryRow& r) {
    ctx.err << "epoch " << r.epoch << "/" << trainer.total_epochs() << " [" << r.stage << "] L_ae=" << r.losses.ae
            << " L_emb=" << r.losses.emb << " L_cross=" << r.losses.cross << " total=" << r.losses.total << "\n";
  });

  fs::create_directories(dir);
  model->save(ckpt);
  save_state(state, cfg, trainer.state());
  write_file(hist, align::history_csv(trainer.history()));
  write_lines(dir / "train_ids.txt", data.split.train);
  write_lines(dir / "test_ids.txt", data.split.test);
  for (const auto& artifact : {ckpt, hist}) write_sidecar(ctx, artifact, "train expclip", cfg, train_cfg.seed);

  ctx.out << "expclip: " << ran << " epochs this run, " << trainer.epoch() << "/" << trainer.total_epochs()
          << " done";
  if (!trainer.history().empty())
    ctx.out << ", final total loss " << std::setprecision(17) << trainer.history().back().losses.total;
  ctx.out << "\ncheckpoint " << ckpt.string() << "\n";
}

void run_generator(const Context& ctx, const TrainOptions& o) {
  auto cfg = o.config.resolve();
  auto expclip = align::ExpCLIPModel::load(require_string(cfg, "data.expclip"));
  auto model_json = seeded_section(cfg, "model");
  if (!model_json.contains("style_dim")) model_json["style_dim"] = expclip->config().embed_dim;
  const auto gen_cfg = animgen::GeneratorConfig::from_json(model_json);
  const auto train_cfg = animgen::GenTrainConfig::from_json(seeded_section(cfg, "train"));
  const auto data = load_split_store(cfg, ctx.err);
  auto pairs = animgen::load_training_pairs(require_string(cfg, "data.pairs"));

  const fs::path dir = output_dir(cfg, "runs/generator");
  const fs::path ckpt = dir / "generator.json", state = dir / "generator.state.json",
                 hist = dir / "generator_history.csv";

  auto gen = o.resume ? animgen::GeneratorModel::load(ckpt) : std::make_unique<animgen::GeneratorModel>(gen_cfg);
  animgen::GeneratorTrainer trainer(*gen, *expclip, std::move(pairs), &data.train, train_cfg);
  if (o.resume) trainer.load_state(load_state(state, cfg));

  const int ran = run_epochs(trainer, o, [&](const animgen::GenHistoryRow& r) {
    ctx.err << "epoch " << r.epoch << "/" << train_cfg.epochs << " L_rec=" << r.losses.rec
            << " L_lm=" << r.losses.lip << " L_style=" << r.losses.style << " total=" << r.losses.total
            << " epa_steps=" << r.epa_steps << "/" << r.steps << "\n";
  });

  fs::create_directories(dir);
  gen->save(ckpt);
  save_state(state, cfg, trainer.state());
  write_file(hist, animgen::history_csv(trainer.history()));
  for (const auto& artifact : {ckpt, hist}) write_sidecar(ctx, artifact, "train generator", cfg, train_cfg.seed);

  ctx.out << "generator: " << ran << " epochs this run, " << trainer.epoch() << "/" << train_cfg.epochs
          << " done";
  if (!trainer.history().empty())
    ctx.out << ", final total loss " << std::setprecision(17) << trainer.history().back().losses.total;
  ctx.out << "\ncheckpoint " << ckpt.string() << "\n";
}

void add_train_options(CLI::App& cmd, TrainOptions& o) {
  add_config_options(cmd, o.config, true);
  cmd.add_flag("--resume", o.resume, "Continue from the checkpoint and state in the output directory");
  cmd.add_option("--stop-after", o.stop_after, "Stop after this many epochs in this invocation");
  cmd.add_option("--log-every", o.log_every, "Progress line every N epochs (0: silent)");
}

}  // namespace

void add_train_commands(CLI::App& app, Context& ctx) {
  auto* train = app.add_subcommand("train", "Train the alignment model or the generator");
  train->require_subcommand(1);

  auto e = std::make_shared<TrainOptions>();
  auto* expclip = train->add_subcommand("expclip", "Train ExpCLIP on a TEAD store");
  add_train_options(*expclip, *e);
  expclip->callback([&ctx, e] { run_expclip(ctx, *e); });

  auto g = std::make_shared<TrainOptions>();
  auto* generator = train->add_subcommand("generator", "Train the animation generator against a frozen ExpCLIP");
  add_train_options(*generator, *g);
  generator->callback([&ctx, g] { run_generator(ctx, *g); });
}

}  // namespace emoface::cli
