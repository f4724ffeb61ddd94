#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "emoface/facs/types.hpp"
#include "emoface/nn/tensor.hpp"

namespace emoface::animgen {

inline constexpr double kDefaultFps = 15.0;

/// T >= 1 frames of blendshape weights at a fixed frame rate.
class AnimationClip {
 public:
  /// Throws InvalidArgument for no frames or fps <= 0.
  AnimationClip(std::vector<facs::BlendshapeWeights> frames, double fps = kDefaultFps);

  /// Rows are frames; every entry must already lie in [0, 1].
  static AnimationClip from_matrix(const nn::Matrix& frames, double fps = kDefaultFps);

  std::size_t frame_count() const { return frames_.size(); }
  double fps() const { return fps_; }
  const facs::BlendshapeWeights& frame(std::size_t t) const { return frames_.at(t); }
  const std::vector<facs::BlendshapeWeights>& frames() const { return frames_; }
  nn::Matrix to_matrix() const;

  /// "# fps=<fps>", a header of the 52 blendshape names, then one frame per
  /// line. Values use round-trip precision so identical clips give identical
  /// bytes.
  std::string to_csv(const std::vector<std::string>& names) const;
  /// One object per frame: {"t": index, "time": seconds, "b": [52 reals]}.
  std::string to_jsonl() const;
  static AnimationClip from_csv(std::string_view text);
  /// Writes JSONL for a .jsonl extension, CSV otherwise.
  void save(const std::filesystem::path& path, const std::vector<std::string>& names) const;

 private:
  std::vector<facs::BlendshapeWeights> frames_;
  double fps_;
};

}  // namespace emoface::animgen
