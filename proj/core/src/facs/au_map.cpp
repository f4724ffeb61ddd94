#include "emoface/facs/au_map.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <utility>

#include "emoface/common/embedded_data.hpp"
#include "emoface/common/error.hpp"
#include "emoface/common/text.hpp"

namespace emoface::facs {
namespace {

constexpr std::pair<std::string_view, std::string_view> kAUDescriptions[] = {
    {"AU1", "inner brow raiser"},   {"AU2", "outer brow raiser"},
    {"AU4", "brow lowerer"},        {"AU5", "upper lid raiser"},
    {"AU6", "cheek raiser"},        {"AU7", "lid tightener"},
    {"AU9", "nose wrinkler"},       {"AU10", "upper lip raiser"},
    {"AU11", "nasolabial deepener"}, {"AU12", "lip corner puller"},
    {"AU13", "sharp lip puller"},   {"AU14", "dimpler"},
    {"AU15", "lip corner depressor"}, {"AU16", "lower lip depressor"},
    {"AU17", "chin raiser"},        {"AU18", "lip pucker"},
    {"AU20", "lip stretcher"},      {"AU22", "lip funneler"},
    {"AU23", "lip tightener"},      {"AU24", "lip pressor"},
    {"AU25", "lips part"},          {"AU26", "jaw drop"},
    {"AU27", "mouth stretch"},      {"AU28", "lip suck"},
    {"AU29", "jaw thrust"},         {"AU30", "jaw sideways"},
    {"AU34", "cheek puff"},         {"AU41", "lid droop"},
    {"AU42", "slit"},               {"AU43", "eyes closed"},
    {"AU44", "squint"},             {"AU45", "blink"},
    {"AU61", "eyes turn left"},     {"AU62", "eyes turn right"},
    {"AU63", "eyes up"},            {"AU64", "eyes down"},
};

double parse_decimal(const std::string& cell, std::size_t line) {
  const std::string t = trim(cell);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw ValidationError("bad decimal '" + t + "' in AU map", line);
  return v;
}

}  // namespace

std::string_view au_description(std::string_view label) {
  for (const auto& [au, name] : kAUDescriptions)
    if (au == label) return name;
  return {};
}

const AUBlendshapeMap& AUBlendshapeMap::builtin() {
  static const AUBlendshapeMap map = from_csv(embedded::au_blendshape_map_csv());
  return map;
}

AUBlendshapeMap AUBlendshapeMap::from_csv(std::string_view text) {
  AUBlendshapeMap map;
  std::size_t line_no = 0;
  bool have_header = false;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line, ',');
    if (!have_header) {
      if (cells.size() == kNumBlendshapes + 1) cells.erase(cells.begin());
      if (cells.size() != kNumBlendshapes)
        throw ValidationError("AU map header needs 52 blendshape names", line_no);
      for (auto& c : cells) map.bs_names_.push_back(trim(c));
      have_header = true;
      continue;
    }
    if (cells.size() != kNumBlendshapes + 1)
      throw ValidationError("AU map row needs a label and 52 values", line_no);
    map.au_names_.push_back(trim(cells[0]));
    for (std::size_t j = 1; j < cells.size(); ++j)
      map.matrix_.push_back(parse_decimal(cells[j], line_no));
  }
  if (map.au_names_.size() != kNumAUs)
    throw ValidationError("AU map needs 36 rows, got " + std::to_string(map.au_names_.size()));
  map.validate();
  return map;
}

AUBlendshapeMap AUBlendshapeMap::load(const std::filesystem::path& path) {
  return from_csv(read_file(path));
}

void AUBlendshapeMap::validate() const {
  for (std::size_t a = 0; a < kNumAUs; ++a) {
    std::size_t nonzero = 0;
    for (std::size_t j = 0; j < kNumBlendshapes; ++j) {
      const double v = at(a, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw ValidationError("AU map entry (" + au_names_[a] + ", " + bs_names_[j] +
                              ") outside [0,1]");
      nonzero += v != 0.0;
    }
    if (nonzero > kMaxTargetsPerAU)
      throw ValidationError("AU map row " + au_names_[a] + " drives " + std::to_string(nonzero) +
                            " blendshapes (max " + std::to_string(kMaxTargetsPerAU) + ")");
  }
  auto unique = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) == v.end();
  };
  if (!unique(au_names_)) throw ValidationError("duplicate AU label in AU map");
  if (!unique(bs_names_)) throw ValidationError("duplicate blendshape name in AU map");
}

std::string AUBlendshapeMap::to_csv() const {
  std::ostringstream out;
  out << "au";
  for (const auto& n : bs_names_) out << ',' << n;
  out << '\n';
  for (std::size_t a = 0; a < kNumAUs; ++a) {
    out << au_names_[a];
    for (std::size_t j = 0; j < kNumBlendshapes; ++j) out << ',' << at(a, j);
    out << '\n';
  }
  return out.str();
}

std::size_t AUBlendshapeMap::au_index(std::string_view label) const {
  auto it = std::find(au_names_.begin(), au_names_.end(), label);
  if (it == au_names_.end()) throw InvalidArgument("unknown AU '" + std::string(label) + "'");
  return static_cast<std::size_t>(it - au_names_.begin());
}

std::size_t AUBlendshapeMap::blendshape_index(std::string_view name) const {
  auto it = std::find(bs_names_.begin(), bs_names_.end(), name);
  if (it == bs_names_.end())
    throw InvalidArgument("unknown blendshape '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - bs_names_.begin());
}

}  // namespace emoface::facs
