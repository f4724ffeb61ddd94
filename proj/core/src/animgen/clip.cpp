#include "emoface/animgen/clip.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "emoface/common/error.hpp"
#include "emoface/common/text.hpp"

namespace emoface::animgen {

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

AnimationClip::AnimationClip(std::vector<facs::BlendshapeWeights> frames, double fps)
    : frames_(std::move(frames)), fps_(fps) {
  if (frames_.empty()) throw InvalidArgument("an animation clip needs at least one frame");
  if (!(fps_ > 0) || !std::isfinite(fps_)) throw InvalidArgument("clip fps must be positive");
}

AnimationClip AnimationClip::from_matrix(const nn::Matrix& m, double fps) {
  nn::require_cols(m, static_cast<nn::Index>(facs::kNumBlendshapes), "animation frames");
  std::vector<facs::BlendshapeWeights> frames;
  frames.reserve(static_cast<std::size_t>(m.rows()));
  for (nn::Index t = 0; t < m.rows(); ++t)
    frames.emplace_back(std::span<const double>(m.row(t).data(), facs::kNumBlendshapes));
  return AnimationClip(std::move(frames), fps);
}

nn::Matrix AnimationClip::to_matrix() const {
  nn::Matrix m(static_cast<nn::Index>(frames_.size()), static_cast<nn::Index>(facs::kNumBlendshapes));
  for (std::size_t t = 0; t < frames_.size(); ++t)
    for (std::size_t c = 0; c < facs::kNumBlendshapes; ++c)
      m(static_cast<nn::Index>(t), static_cast<nn::Index>(c)) = frames_[t][c];
  return m;
}

std::string AnimationClip::to_csv(const std::vector<std::string>& names) const {
  if (names.size() != facs::kNumBlendshapes) throw DimensionError("expected 52 blendshape names");
  std::string out = "# fps=" + format_double(fps_) + "\n" + join(names, ",") + "\n";
  for (const auto& f : frames_) {
    for (std::size_t c = 0; c < facs::kNumBlendshapes; ++c) {
      if (c) out += ',';
      out += format_double(f[c]);
    }
    out += '\n';
  }
  return out;
}

std::string AnimationClip::to_jsonl() const {
  std::string out;
  for (std::size_t t = 0; t < frames_.size(); ++t) {
    nlohmann::ordered_json j;
    j["t"] = t;
    j["time"] = static_cast<double>(t) / fps_;
    j["b"] = std::vector<double>(frames_[t].values().begin(), frames_[t].values().end());
    out += j.dump() + "\n";
  }
  return out;
}

AnimationClip AnimationClip::from_csv(std::string_view text) {
  const auto lines = split(text, '\n');
  std::size_t n = 0;
  auto next_line = [&]() -> std::string {
    while (n < lines.size()) {
      auto l = trim(lines[n++]);
      if (!l.empty()) return l;
    }
    return {};
  };
  const std::string fps_line = next_line();
  if (fps_line.rfind("# fps=", 0) != 0) throw IoError("animation CSV must start with '# fps=<value>'");
  double fps = 0;
  try {
    fps = std::stod(fps_line.substr(6));
  } catch (const std::exception&) {
    throw IoError("animation CSV has an unreadable fps row");
  }
  if (split(next_line(), ',').size() != facs::kNumBlendshapes)
    throw IoError("animation CSV header must list 52 blendshape names");
  std::vector<facs::BlendshapeWeights> frames;
  for (std::string line = next_line(); !line.empty(); line = next_line()) {
    const auto cells = split(line, ',');
    if (cells.size() != facs::kNumBlendshapes)
      throw IoError("animation CSV line " + std::to_string(n) + " does not have 52 values");
    std::vector<double> v;
    for (const auto& c : cells) v.push_back(std::stod(c));
    frames.emplace_back(v);
  }
  return AnimationClip(std::move(frames), fps);
}

void AnimationClip::save(const std::filesystem::path& path, const std::vector<std::string>& names) const {
  write_file(path, path.extension() == ".jsonl" ? to_jsonl() : to_csv(names));
}

}  // namespace emoface::animgen
