#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "emoface/common/error.hpp"
#include "emoface/common/rng.hpp"
#include "emoface/facs/au_map.hpp"
#include "emoface/facs/blendshapes.hpp"

namespace emoface::facs {
namespace {

const AUBlendshapeMap& shipped() { return AUBlendshapeMap::builtin(); }

AUVector with_aus(std::initializer_list<const char*> labels) {
  AUVector u;
  for (const char* l : labels) u.set(shipped().au_index(l), true);
  return u;
}

BlendshapeWeights random_weights(Rng& rng) {
  std::vector<double> v(kNumBlendshapes);
  for (auto& x : v) x = rng.uniform();
  return BlendshapeWeights(v);
}

TEST(AUVector, RejectsWrongLengthAndNonBinary) {
  std::vector<int> short_bits(35, 0);
  EXPECT_THROW(AUVector{short_bits}, DimensionError);
  std::vector<int> bits(36, 0);
  bits[3] = 2;
  EXPECT_THROW(AUVector{bits}, InvalidArgument);
  bits[3] = 1;
  EXPECT_EQ(AUVector{bits}.active_count(), 1u);
}

TEST(BlendshapeWeights, RejectsOutOfRangeAndWrongLength) {
  std::vector<double> v(52, 0.5);
  v[7] = 1.01;
  EXPECT_THROW(BlendshapeWeights{v}, InvalidArgument);
  v[7] = NAN;
  EXPECT_THROW(BlendshapeWeights{v}, InvalidArgument);
  EXPECT_THROW(BlendshapeWeights::clamped(v), NumericError);
  std::vector<double> w(51, 0.5);
  EXPECT_THROW(BlendshapeWeights{w}, DimensionError);
}

TEST(BlendshapeWeights, ClampedFactoryClips) {
  std::vector<double> v(52, 0.5);
  v[0] = -3.0;
  v[1] = 7.0;
  const auto b = BlendshapeWeights::clamped(v);
  EXPECT_EQ(b[0], 0.0);
  EXPECT_EQ(b[1], 1.0);
  EXPECT_EQ(b[2], 0.5);
}

TEST(AUMap, ShippedTableShape) {
  EXPECT_EQ(shipped().au_names().size(), kNumAUs);
  EXPECT_EQ(shipped().blendshape_names().size(), kNumBlendshapes);
  for (std::size_t a = 0; a < kNumAUs; ++a) {
    std::size_t nonzero = 0;
    for (std::size_t k = 0; k < kNumBlendshapes; ++k) {
      const double v = shipped().at(a, k);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      nonzero += v != 0.0;
    }
    EXPECT_LE(nonzero, AUBlendshapeMap::kMaxTargetsPerAU) << shipped().au_names()[a];
  }
}

TEST(AUMap, CsvRoundTrip) {
  const auto again = AUBlendshapeMap::from_csv(shipped().to_csv());
  for (std::size_t a = 0; a < kNumAUs; ++a)
    for (std::size_t k = 0; k < kNumBlendshapes; ++k) EXPECT_EQ(again.at(a, k), shipped().at(a, k));
  EXPECT_EQ(again.au_names(), shipped().au_names());
}

TEST(AUMap, RejectsBadCsv) {
  EXPECT_THROW(AUBlendshapeMap::from_csv("au,x\nAU1,0.5\n"), Error);
  std::string csv = shipped().to_csv();
  const auto pos = csv.find("0.8");
  ASSERT_NE(pos, std::string::npos);
  csv.replace(pos, 3, "1.8");
  EXPECT_THROW(AUBlendshapeMap::from_csv(csv), Error);
}

TEST(AUMap, UnknownLabelThrows) {
  EXPECT_THROW((void)shipped().au_index("AU99"), InvalidArgument);
  EXPECT_THROW((void)shipped().blendshape_index("noseWiggle"), InvalidArgument);
  EXPECT_EQ(au_description("AU12"), "lip corner puller");
  EXPECT_TRUE(au_description("AU99").empty());
}

TEST(AUToBlendshapes, ZeroVectorGivesZeroWeights) {
  EXPECT_EQ(au_to_blendshapes(AUVector{}, shipped()), BlendshapeWeights{});
}

TEST(AUToBlendshapes, OneHotGivesClampedRow) {
  for (std::size_t a = 0; a < kNumAUs; ++a) {
    AUVector u;
    u.set(a, true);
    const auto b = au_to_blendshapes(u, shipped());
    for (std::size_t k = 0; k < kNumBlendshapes; ++k)
      EXPECT_EQ(b[k], std::clamp(shipped().at(a, k), 0.0, 1.0));
  }
}

// The shipped table gives eyeSquint 0.7 from AU7 (lid tightener) and 0.6 from
// AU44 (squint); the sum 1.3 clamps to 1.0.
TEST(AUToBlendshapes, SharedTargetSumsThenClamps) {
  const auto& m = shipped();
  const std::size_t left = m.blendshape_index("eyeSquintLeft");
  ASSERT_DOUBLE_EQ(m.at(m.au_index("AU7"), left), 0.7);
  ASSERT_DOUBLE_EQ(m.at(m.au_index("AU44"), left), 0.6);
  const auto b = au_to_blendshapes(with_aus({"AU7", "AU44"}), m);
  EXPECT_EQ(b[left], 1.0);
  EXPECT_EQ(b[m.blendshape_index("eyeSquintRight")], 1.0);
}

TEST(AUToBlendshapes, SmileDrivesSmileTargets) {
  const auto b = au_to_blendshapes(with_aus({"AU6", "AU12"}), shipped());
  EXPECT_GT(b[shipped().blendshape_index("mouthSmileLeft")], 0.0);
  EXPECT_GT(b[shipped().blendshape_index("mouthSmileRight")], 0.0);
}

TEST(AUToBlendshapes, AnyBinaryInputIsValidWeights) {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    AUVector u;
    for (std::size_t a = 0; a < kNumAUs; ++a) u.set(a, rng.bernoulli(0.3));
    const auto b = au_to_blendshapes(u, shipped());
    for (double v : b.values()) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
  }
}

TEST(Perturb, ZeroMagnitudeIsIdentity) {
  Rng rng(1), src(2);
  const auto b = random_weights(src);
  EXPECT_EQ(perturb_blendshapes(b, 0.0, rng), b);
}

TEST(Perturb, UpperBoundClamps) {
  Rng rng(3);
  const auto out = perturb_blendshapes(BlendshapeWeights::filled(1.0), 0.05, rng);
  for (double v : out.values()) {
    EXPECT_GE(v, 0.95);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Perturb, SameSeedSameOutput) {
  Rng src(4);
  const auto b = random_weights(src);
  Rng r1(9), r2(9);
  EXPECT_EQ(perturb_blendshapes(b, 0.1, r1), perturb_blendshapes(b, 0.1, r2));
}

TEST(Perturb, NegativeMagnitudeThrows) {
  Rng rng(0);
  EXPECT_THROW(perturb_blendshapes(BlendshapeWeights{}, -0.01, rng), InvalidArgument);
}

TEST(Perturb, NeverMovesMoreThanMagnitude) {
  Rng src(5);
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Rng rng(seed);
    const double m = src.uniform(0.0, 0.3);
    const auto b = random_weights(src);
    const auto p = perturb_blendshapes(b, m, rng);
    for (std::size_t k = 0; k < kNumBlendshapes; ++k) {
      ASSERT_LE(std::abs(p[k] - b[k]), m + 1e-15);
      ASSERT_GE(p[k], 0.0);
      ASSERT_LE(p[k], 1.0);
    }
  }
}

TEST(Blend, EndpointsAreExact) {
  Rng src(6);
  const auto a = random_weights(src), b = random_weights(src);
  EXPECT_EQ(blend_prompts(a, b, 0.0), a);
  EXPECT_EQ(blend_prompts(a, b, 1.0), b);
}

TEST(Blend, MidpointIsAverage) {
  const auto z = BlendshapeWeights::filled(0.0), o = BlendshapeWeights::filled(1.0);
  for (double v : blend_prompts(z, o, 0.5).values()) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(Blend, LambdaOutsideUnitIntervalThrows) {
  EXPECT_THROW(blend_prompts(BlendshapeWeights{}, BlendshapeWeights{}, 1.5), InvalidArgument);
  EXPECT_THROW(blend_prompts(BlendshapeWeights{}, BlendshapeWeights{}, -0.1), InvalidArgument);
}

TEST(Blend, StaysInsideElementwiseHullAndIsMonotone) {
  Rng src(7);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = random_weights(src), b = random_weights(src);
    double l1 = src.uniform(), l2 = src.uniform();
    if (l1 > l2) std::swap(l1, l2);
    const auto x = blend_prompts(a, b, l1), y = blend_prompts(a, b, l2);
    for (std::size_t k = 0; k < kNumBlendshapes; ++k) {
      ASSERT_GE(x[k], std::min(a[k], b[k]) - 1e-15);
      ASSERT_LE(x[k], std::max(a[k], b[k]) + 1e-15);
      // Moving lambda towards 1 moves every entry towards b.
      if (b[k] >= a[k])
        ASSERT_LE(x[k], y[k] + 1e-15);
      else
        ASSERT_GE(x[k], y[k] - 1e-15);
    }
  }
}

TEST(Blend, AffineInLambda) {
  Rng src(8);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = random_weights(src), b = random_weights(src);
    const double l1 = src.uniform(), l2 = src.uniform();
    const auto x = blend_prompts(a, b, l1), y = blend_prompts(a, b, l2);
    const auto m = blend_prompts(a, b, (l1 + l2) / 2);
    for (std::size_t k = 0; k < kNumBlendshapes; ++k) ASSERT_NEAR(x[k] + y[k], 2 * m[k], 1e-12);
  }
}

}  // namespace
}  // namespace emoface::facs
