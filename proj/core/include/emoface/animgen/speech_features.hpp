#pragma once

#include <filesystem>
#include <string>

#include "emoface/common/rng.hpp"
#include "emoface/nn/tensor.hpp"

namespace emoface::animgen {

/// T x F per-frame speech features at a frame rate.
struct SpeechFeatureSequence {
  nn::Matrix features;
  double fps = 15.0;

  std::size_t frame_count() const { return static_cast<std::size_t>(features.rows()); }
  nn::Index width() const { return features.cols(); }
};

/// Linear interpolation onto a new frame rate. The output has
/// max(1, round(T * target_fps / fps)) frames; frame k samples source
/// position k * fps / target_fps, clamped to the last frame.
SpeechFeatureSequence resample(const SpeechFeatureSequence& s, double target_fps);

/// Reads a feature file and validates it.
///
/// CSV: a header line `# T=<frames> F=<width> fps=<rate>` followed by T rows
/// of F comma-separated reals. Binary (extension .bin): the 8 bytes
/// "EMSPEECH", uint64 T, uint64 F, float64 fps, then T*F float64 row-major,
/// all little-endian. `expected_width` > 0 enforces F (DimensionError);
/// `target_fps` > 0 resamples. A missing header or truncated body is an
/// IoError.
SpeechFeatureSequence load_speech_features(const std::filesystem::path& path,
                                           nn::Index expected_width = 0, double target_fps = 0.0);
/// Writes binary for a .bin extension, CSV otherwise.
void save_speech_features(const std::filesystem::path& path, const SpeechFeatureSequence& s);
std::string speech_features_csv(const SpeechFeatureSequence& s);
SpeechFeatureSequence parse_speech_features_csv(std::string_view text);

/// Synthetic speech: a random phoneme-like segment sequence and its
/// features. `envelopes` (T x phonemes) holds the smoothed one-hot activity
/// of each phoneme class (class 0 is silence). The first `phonemes` feature
/// channels are those envelopes plus a little noise; the rest are
/// band-limited noise (moving average of white noise).
struct SyntheticSpeech {
  SpeechFeatureSequence speech;
  nn::Matrix envelopes;
};

SyntheticSpeech synthesize_speech(std::size_t frames, nn::Index width, double fps, Rng& rng,
                                  nn::Index phonemes = 6);

}  // namespace emoface::animgen
