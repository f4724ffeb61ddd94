#pragma once

#include "emoface/common/rng.hpp"
#include "emoface/facs/au_map.hpp"
#include "emoface/facs/types.hpp"

namespace emoface::facs {

/// clamp(u^T * map, 0, 1): active AU rows are summed, then clamped.
BlendshapeWeights au_to_blendshapes(const AUVector& aus, const AUBlendshapeMap& map);

/// Adds independent uniform noise in [-magnitude, +magnitude] to each entry
/// and clamps to [0, 1]. Throws InvalidArgument for a negative magnitude.
BlendshapeWeights perturb_blendshapes(const BlendshapeWeights& b, double magnitude, Rng& rng);

/// (1 - lambda) * base + lambda * aug. lambda must lie in [0, 1]; the
/// endpoints return `base` / `aug` bit-exactly.
BlendshapeWeights blend_prompts(const BlendshapeWeights& base, const BlendshapeWeights& aug,
                                double lambda);

}  // namespace emoface::facs
