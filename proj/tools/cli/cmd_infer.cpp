#include "emoface/animgen/generator.hpp"
#include "emoface/common/text.hpp"
#include "emoface/facs/au_map.hpp"
#include "support.hpp"

namespace emoface::cli {

namespace {

struct InferOptions {
  std::string speech;
  std::optional<std::string> text;
  std::optional<std::string> image_features;
  std::optional<std::string> expression;
  std::string expclip;
  std::string generator;
  std::string out;
};

void run_infer(const Context& ctx, const InferOptions& o) {
  const auto expclip = align::ExpCLIPModel::load(o.expclip);
  const auto gen = animgen::GeneratorModel::load(o.generator);

  animgen::Prompt prompt;
  nlohmann::json echo;
  if (o.text) {
    prompt = *o.text;
    echo = {{"kind", "text"}, {"value", *o.text}};
  } else if (o.image_features) {
    const auto v = parse_reals(read_file(*o.image_features));
    prompt = animgen::ImageFeaturePrompt{Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()))};
    echo = {{"kind", "image_features"}, {"path", *o.image_features}, {"value", v}};
  } else {
    const auto v = parse_reals(read_file(*o.expression));
    prompt = facs::BlendshapeWeights(v);
    echo = {{"kind", "expression"}, {"path", *o.expression}, {"value", v}};
  }

  const auto speech = animgen::load_speech_features(o.speech, gen->config().speech_dim);
  const auto clip = animgen::infer_from_prompt(speech, prompt, *expclip, *gen);
  const fs::path out = o.out;
  ensure_parent(out);
  clip.save(out, facs::AUBlendshapeMap::builtin().blendshape_names());

  const nlohmann::json cfg = {{"speech", o.speech}, {"expclip", o.expclip}, {"generator", o.generator},
                              {"prompt", echo}};
  write_sidecar(ctx, out, "infer", cfg, 0,
                {{"prompt", echo}, {"frames", clip.frame_count()}, {"fps", clip.fps()}});
  ctx.out << "wrote " << clip.frame_count() << " frames at " << clip.fps() << " fps to " << out.string() << "\n";
}

}  // namespace

void add_infer_command(CLI::App& app, Context& ctx) {
  auto o = std::make_shared<InferOptions>();
  auto* infer = app.add_subcommand("infer", "Animate speech features in the style of a prompt");
  infer->add_option("--speech", o->speech, "Speech features (CSV or .bin)")->required();
  auto* prompt = infer->add_option_group("prompt", "Exactly one style prompt");
  prompt->add_option("--text", o->text, "Free-text style prompt");
  prompt->add_option("--image-features", o->image_features, "File with one precomputed image feature vector");
  prompt->add_option("--expression", o->expression, "File with 52 blendshape weights");
  prompt->require_option(1);
  infer->add_option("--expclip", o->expclip, "ExpCLIP checkpoint")->required();
  infer->add_option("--generator", o->generator, "Generator checkpoint")->required();
  infer->add_option("--out", o->out, "Output clip (.csv or .jsonl)")->required();
  infer->callback([&ctx, o] { run_infer(ctx, *o); });
}

}  // namespace emoface::cli
