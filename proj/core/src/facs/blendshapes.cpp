#include "emoface/facs/blendshapes.hpp"

#include <algorithm>
#include <cmath>

#include "emoface/common/error.hpp"

namespace emoface::facs {

AUVector::AUVector(std::span<const int> bits) {
  if (bits.size() != kNumAUs)
    throw DimensionError("AU vector needs " + std::to_string(kNumAUs) + " entries, got " +
                         std::to_string(bits.size()));
  for (std::size_t i = 0; i < kNumAUs; ++i) {
    if (bits[i] != 0 && bits[i] != 1)
      throw InvalidArgument("AU entry " + std::to_string(i) + " is not binary");
    bits_[i] = static_cast<std::uint8_t>(bits[i]);
  }
}

std::size_t AUVector::active_count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::vector<int> AUVector::to_ints() const { return {bits_.begin(), bits_.end()}; }

BlendshapeWeights::BlendshapeWeights(std::span<const double> values) {
  if (values.size() != kNumBlendshapes)
    throw DimensionError("blendshape weights need " + std::to_string(kNumBlendshapes) +
                         " entries, got " + std::to_string(values.size()));
  for (std::size_t i = 0; i < kNumBlendshapes; ++i) {
    const double v = values[i];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw InvalidArgument("blendshape weight " + std::to_string(i) + " outside [0,1]");
    w_[i] = v;
  }
}

BlendshapeWeights BlendshapeWeights::clamped(std::span<const double> values) {
  if (values.size() != kNumBlendshapes)
    throw DimensionError("blendshape weights need " + std::to_string(kNumBlendshapes) +
                         " entries, got " + std::to_string(values.size()));
  std::array<double, kNumBlendshapes> w{};
  for (std::size_t i = 0; i < kNumBlendshapes; ++i) {
    if (!std::isfinite(values[i])) throw NumericError("non-finite blendshape weight");
    w[i] = std::clamp(values[i], 0.0, 1.0);
  }
  return BlendshapeWeights(w);
}

BlendshapeWeights BlendshapeWeights::filled(double v) {
  std::array<double, kNumBlendshapes> w{};
  w.fill(v);
  return BlendshapeWeights(w);
}

BlendshapeWeights au_to_blendshapes(const AUVector& aus, const AUBlendshapeMap& map) {
  std::array<double, kNumBlendshapes> acc{};
  for (std::size_t a = 0; a < kNumAUs; ++a) {
    if (!aus[a]) continue;
    for (std::size_t j = 0; j < kNumBlendshapes; ++j) acc[j] += map.at(a, j);
  }
  for (double& v : acc) v = std::min(v, 1.0);
  return BlendshapeWeights(acc);
}

BlendshapeWeights perturb_blendshapes(const BlendshapeWeights& b, double magnitude, Rng& rng) {
  if (!(magnitude >= 0.0) || !std::isfinite(magnitude))
    throw InvalidArgument("perturbation magnitude must be a finite value >= 0");
  if (magnitude == 0.0) return b;
  std::array<double, kNumBlendshapes> out{};
  for (std::size_t i = 0; i < kNumBlendshapes; ++i)
    out[i] = std::clamp(b[i] + rng.uniform(-magnitude, magnitude), 0.0, 1.0);
  return BlendshapeWeights(out);
}

BlendshapeWeights blend_prompts(const BlendshapeWeights& base, const BlendshapeWeights& aug,
                                double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("blend weight must lie in [0,1]");
  std::array<double, kNumBlendshapes> out{};
  for (std::size_t i = 0; i < kNumBlendshapes; ++i) {
    const double lo = std::min(base[i], aug[i]);
    const double hi = std::max(base[i], aug[i]);
    // Rounding can push the affine combination an ulp outside the segment.
    out[i] = std::clamp((1.0 - lambda) * base[i] + lambda * aug[i], lo, hi);
  }
  return BlendshapeWeights(out);
}

}  // namespace emoface::facs
