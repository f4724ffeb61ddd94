#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "emoface/facs/types.hpp"

namespace emoface::facs {

/// Linear AU -> blendshape rule: a 36x52 table of contributions in [0, 1].
///
/// The default table is compiled in from core/data/au_blendshape_map.csv and
/// follows the usual FACS <-> ARKit-style correspondences (AU12 lip corner
/// puller drives mouthSmileLeft/Right, and so on). Row i may only touch the
/// blendshapes anatomically driven by AU i; we enforce that loosely as at most
/// kMaxTargetsPerAU nonzeros per row.
class AUBlendshapeMap {
 public:
  static constexpr std::size_t kMaxTargetsPerAU = 8;

  /// The shipped table.
  static const AUBlendshapeMap& builtin();

  /// CSV: header `au,<52 blendshape names>` (the leading `au` cell may be
  /// omitted), then 36 rows `<AU label>,<52 decimals>`.
  static AUBlendshapeMap from_csv(std::string_view text);
  static AUBlendshapeMap load(const std::filesystem::path& path);
  std::string to_csv() const;

  double at(std::size_t au, std::size_t blendshape) const {
    return matrix_.at(au * kNumBlendshapes + blendshape);
  }
  const std::vector<std::string>& au_names() const { return au_names_; }
  const std::vector<std::string>& blendshape_names() const { return bs_names_; }

  /// Index of a named AU / blendshape; throws InvalidArgument if absent.
  std::size_t au_index(std::string_view label) const;
  std::size_t blendshape_index(std::string_view name) const;

 private:
  AUBlendshapeMap() = default;
  void validate() const;

  std::vector<double> matrix_;  // row-major 36 x 52
  std::vector<std::string> au_names_;
  std::vector<std::string> bs_names_;
};

/// Human-readable FACS name for the AU labels of the shipped table, e.g.
/// "AU12" -> "lip corner puller". Unknown labels map to an empty string.
std::string_view au_description(std::string_view label);

}  // namespace emoface::facs
