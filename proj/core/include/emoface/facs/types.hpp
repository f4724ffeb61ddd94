#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace emoface::facs {

inline constexpr std::size_t kNumAUs = 36;
inline constexpr std::size_t kNumBlendshapes = 52;

/// Binary activation of the 36 Action Units in the AU table.
class AUVector {
 public:
  AUVector() { bits_.fill(0); }
  /// Throws DimensionError unless bits.size() == 36 and InvalidArgument for
  /// any entry outside {0, 1}.
  explicit AUVector(std::span<const int> bits);

  bool operator[](std::size_t i) const { return bits_.at(i) != 0; }
  void set(std::size_t i, bool on) { bits_.at(i) = on ? 1 : 0; }
  std::size_t active_count() const;
  std::vector<int> to_ints() const;

  friend bool operator==(const AUVector&, const AUVector&) = default;

 private:
  std::array<std::uint8_t, kNumAUs> bits_;
};

/// 52 activations, each in [0, 1].
class BlendshapeWeights {
 public:
  BlendshapeWeights() { w_.fill(0.0); }
  /// Throws DimensionError for a size other than 52 and InvalidArgument for
  /// values that are non-finite or outside [0, 1].
  explicit BlendshapeWeights(std::span<const double> values);

  /// Builds weights from arbitrary reals by clamping into [0, 1]; non-finite
  /// input still throws.
  static BlendshapeWeights clamped(std::span<const double> values);
  static BlendshapeWeights filled(double v);

  double operator[](std::size_t i) const { return w_.at(i); }
  std::span<const double> values() const { return w_; }
  const double* data() const { return w_.data(); }
  static constexpr std::size_t size() { return kNumBlendshapes; }

  friend bool operator==(const BlendshapeWeights&, const BlendshapeWeights&) = default;

 private:
  std::array<double, kNumBlendshapes> w_;
};

}  // namespace emoface::facs
