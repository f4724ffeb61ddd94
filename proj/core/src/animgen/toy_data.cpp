#include "emoface/animgen/toy_data.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

#include "emoface/common/error.hpp"
#include "emoface/common/rng.hpp"
#include "emoface/common/text.hpp"
#include "emoface/facs/blendshapes.hpp"
#include "emoface/tead/toy_corpus.hpp"

namespace emoface::animgen {

using nn::Index;
using nn::Matrix;

facs::BlendshapeWeights style_expression(const std::string& style, const facs::AUBlendshapeMap& map) {
  if (style == "neutral") return facs::BlendshapeWeights();
  for (const auto& c : tead::toy_clusters()) {
    if (c.name != style) continue;
    facs::AUVector aus;
    for (const auto& label : c.aus) aus.set(map.au_index(label), true);
    return facs::au_to_blendshapes(aus, map);
  }
  throw InvalidArgument("unknown style '" + style + "'");
}

Matrix phoneme_mouth_targets(const facs::AUBlendshapeMap& map, Index phonemes) {
  struct Target {
    const char* name;
    double value;
  };
  // Class 0 is silence. Classes past the table reuse it cyclically from 1.
  const std::vector<std::vector<Target>> table = {
      {},
      {{"jawOpen", 0.6}, {"mouthLowerDownLeft", 0.3}, {"mouthLowerDownRight", 0.3}},
      {{"mouthFunnel", 0.5}, {"mouthPucker", 0.5}, {"jawOpen", 0.2}},
      {{"mouthStretchLeft", 0.4}, {"mouthStretchRight", 0.4}, {"jawOpen", 0.15}},
      {{"mouthClose", 0.5}, {"mouthPressLeft", 0.4}, {"mouthPressRight", 0.4}},
      {{"mouthRollLower", 0.4}, {"mouthUpperUpLeft", 0.2}, {"mouthUpperUpRight", 0.2}},
  };
  Matrix m = Matrix::Zero(phonemes, static_cast<Index>(facs::kNumBlendshapes));
  for (Index p = 1; p < phonemes; ++p) {
    const auto& row = table[1 + static_cast<std::size_t>(p - 1) % (table.size() - 1)];
    for (const auto& t : row) m(p, static_cast<Index>(map.blendshape_index(t.name))) = t.value;
  }
  return m;
}

std::vector<TrainingPair> make_toy_generator_data(const ToyGeneratorOptions& opts,
                                                  const facs::AUBlendshapeMap& map) {
  if (opts.styles.empty() || opts.clips_per_style == 0 || opts.frames < 2)
    throw InvalidArgument("toy generator data needs styles, clips and at least two frames");
  Rng rng(opts.seed);
  const Matrix mouth = phoneme_mouth_targets(map);
  std::vector<TrainingPair> out;
  for (const auto& style : opts.styles) {
    const auto base = style_expression(style, map);
    Eigen::RowVectorXd base_row(static_cast<Index>(facs::kNumBlendshapes));
    for (std::size_t c = 0; c < facs::kNumBlendshapes; ++c) base_row[static_cast<Index>(c)] = base[c];
    for (std::size_t i = 0; i < opts.clips_per_style; ++i) {
      auto speech = synthesize_speech(opts.frames, opts.speech_dim, opts.fps, rng, mouth.rows());
      const double intensity = rng.uniform(0.8, 1.0);
      Matrix frames = speech.envelopes * mouth;
      frames.rowwise() += intensity * base_row;
      frames = frames.cwiseMax(0.0).cwiseMin(1.0);
      char id[64];
      std::snprintf(id, sizeof id, "%s-clip%02zu", style.c_str(), i);
      out.push_back({id, style, std::move(speech.speech), AnimationClip::from_matrix(frames, opts.fps)});
    }
  }
  return out;
}

void save_training_pairs(const std::filesystem::path& dir, const std::vector<TrainingPair>& pairs,
                         const facs::AUBlendshapeMap& map) {
  nlohmann::ordered_json index = nlohmann::ordered_json::array();
  for (const auto& p : pairs) {
    save_speech_features(dir / (p.id + ".speech.csv"), p.speech);
    p.clip.save(dir / (p.id + ".clip.csv"), map.blendshape_names());
    index.push_back({{"id", p.id}, {"style", p.style}});
  }
  write_file(dir / "index.json", index.dump(1) + "\n");
}

std::vector<TrainingPair> load_training_pairs(const std::filesystem::path& dir) {
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(read_file(dir / "index.json"));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad training index in " + dir.string() + ": " + e.what());
  }
  std::vector<TrainingPair> out;
  for (const auto& e : index) {
    const auto id = e.at("id").get<std::string>();
    auto clip = AnimationClip::from_csv(read_file(dir / (id + ".clip.csv")));
    auto speech = load_speech_features(dir / (id + ".speech.csv"), 0, clip.fps());
    if (speech.frame_count() != clip.frame_count())
      throw DimensionError("pair '" + id + "': speech has " + std::to_string(speech.frame_count()) +
                           " frames, clip has " + std::to_string(clip.frame_count()));
    out.push_back({id, e.value("style", std::string()), std::move(speech), std::move(clip)});
  }
  if (out.empty()) throw IoError("training index in " + dir.string() + " lists no pairs");
  return out;
}

}  // namespace emoface::animgen
