#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "emoface/animgen/clip.hpp"
#include "emoface/animgen/speech_features.hpp"
#include "emoface/facs/au_map.hpp"

namespace emoface::animgen {

/// One training pair: speech features and the clip they drive.
struct TrainingPair {
  std::string id;
  std::string style;
  SpeechFeatureSequence speech;
  AnimationClip clip;
};

struct ToyGeneratorOptions {
  /// Toy-corpus cluster names, or "neutral" for a zero base expression.
  std::vector<std::string> styles = {"neutral", "joy", "sadness", "anger"};
  std::size_t clips_per_style = 6;
  std::size_t frames = 96;
  nn::Index speech_dim = 16;
  double fps = kDefaultFps;
  std::uint64_t seed = 0;
};

/// Base expression of a style: the cluster's prototype AUs through the AU
/// map, or all zeros for "neutral". Throws InvalidArgument for an unknown
/// style.
facs::BlendshapeWeights style_expression(const std::string& style, const facs::AUBlendshapeMap& map);

/// Mouth-channel offsets of each phoneme class (row = class, 52 columns).
nn::Matrix phoneme_mouth_targets(const facs::AUBlendshapeMap& map, nn::Index phonemes = 6);

/// Procedural clips: frame_t = clamp(s * style + envelopes_t * mouth targets)
/// with a per-clip intensity s in [0.8, 1] and synthetic speech sharing the
/// same phoneme envelopes.
std::vector<TrainingPair> make_toy_generator_data(const ToyGeneratorOptions& opts,
                                                  const facs::AUBlendshapeMap& map);

/// Directory layout: `<dir>/<id>.speech.csv`, `<dir>/<id>.clip.csv` and an
/// `index.json` listing ids and styles.
void save_training_pairs(const std::filesystem::path& dir, const std::vector<TrainingPair>& pairs,
                         const facs::AUBlendshapeMap& map);
std::vector<TrainingPair> load_training_pairs(const std::filesystem::path& dir);

}  // namespace emoface::animgen
