#include "emoface/align/image_features.hpp"
#include "emoface/animgen/toy_data.hpp"
#include "emoface/tead/toy_corpus.hpp"
#include "support.hpp"

namespace emoface::cli {

namespace {

struct ToyOptions {
  std::string out;
  std::size_t per_cluster = 25;
  std::uint64_t seed = 0;
  std::size_t malformed = 0;
  std::size_t clips_per_style = 6;
  std::size_t frames = 96;
  long speech_dim = 16;
  int image_width = 32;
};

void run_toy(const Context& ctx, const ToyOptions& o) {
  const auto& map = facs::AUBlendshapeMap::builtin();
  const fs::path dir = o.out;
  const tead::ToyCorpusOptions copts{o.per_cluster, o.seed};
  const auto records = tead::make_toy_records(copts, map);
  if (o.malformed > records.size()) throw InvalidArgument("more malformed replies than records");
  tead::write_toy_corpus(dir, records, map, o.malformed);

  const auto store = tead::toy_store(copts, map);
  align::synthesize_image_features(store, o.image_width, o.seed).save(dir / "image_features.csv");

  animgen::ToyGeneratorOptions gopts;
  gopts.clips_per_style = o.clips_per_style;
  gopts.frames = o.frames;
  gopts.speech_dim = o.speech_dim;
  gopts.seed = o.seed;
  animgen::save_training_pairs(dir / "pairs", animgen::make_toy_generator_data(gopts, map), map);

  const nlohmann::json cfg = {{"per_cluster", o.per_cluster}, {"seed", o.seed},
                              {"malformed", o.malformed},     {"clips_per_style", o.clips_per_style},
                              {"frames", o.frames},           {"speech_dim", o.speech_dim},
                              {"image_width", o.image_width}};
  write_sidecar(ctx, dir / "corpus.jsonl", "data toy", cfg, o.seed);
  ctx.out << "wrote " << records.size() << " transcripts, fixtures, image features and "
          << o.clips_per_style * gopts.styles.size() << " speech/animation pairs to " << dir.string() << "\n";
}

}  // namespace

void add_data_commands(CLI::App& app, Context& ctx) {
  auto* data = app.add_subcommand("data", "Synthetic data generators");
  data->require_subcommand(1);
  auto o = std::make_shared<ToyOptions>();
  auto* toy = data->add_subcommand("toy", "Write the synthetic toy corpus, fixtures and generator pairs");
  toy->add_option("--out", o->out, "Output directory")->required();
  toy->add_option("--per-cluster", o->per_cluster, "Transcripts per emotion cluster")->check(CLI::PositiveNumber);
  toy->add_option("--seed", o->seed, "Seed");
  toy->add_option("--malformed", o->malformed, "Number of trailing records given malformed replies");
  toy->add_option("--clips-per-style", o->clips_per_style, "Generator clips per speaking style")
      ->check(CLI::PositiveNumber);
  toy->add_option("--frames", o->frames, "Frames per generator clip")->check(CLI::Range(2, 100000));
  toy->add_option("--speech-dim", o->speech_dim, "Speech feature width")->check(CLI::Range(6, 4096));
  toy->add_option("--image-width", o->image_width, "Synthetic image feature width")->check(CLI::PositiveNumber);
  toy->callback([&ctx, o] { run_toy(ctx, *o); });
}

}  // namespace emoface::cli
