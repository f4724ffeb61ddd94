// Microbenchmarks for the hot paths of training and inference.

#include <benchmark/benchmark.h>

#include "emoface/align/model.hpp"
#include "emoface/align/text_featurizer.hpp"
#include "emoface/animgen/generator.hpp"
#include "emoface/animgen/toy_data.hpp"
#include "emoface/common/rng.hpp"
#include "emoface/facs/blendshapes.hpp"
#include "emoface/nn/attention.hpp"
#include "emoface/nn/layers.hpp"

namespace {

using namespace emoface;

nn::Matrix random_matrix(nn::Index rows, nn::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  nn::Matrix m(rows, cols);
  for (nn::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

void BM_LinearForwardBackward(benchmark::State& state) {
  const auto n = state.range(0);
  Rng rng(1);
  nn::Linear layer("l", 64, 64, rng);
  const auto x = random_matrix(n, 64, 2);
  const auto dy = random_matrix(n, 64, 3);
  for (auto _ : state) {
    nn::Linear::Cache cache;
    benchmark::DoNotOptimize(layer.forward(x, cache));
    benchmark::DoNotOptimize(layer.backward(cache, dy));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_LinearForwardBackward)->Arg(64)->Arg(512);

void BM_AttentionForwardBackward(benchmark::State& state) {
  const auto len = state.range(0);
  const nn::Index batch = 4;
  Rng rng(1);
  nn::MultiHeadAttention attn("a", 64, 4, rng);
  const auto x = random_matrix(batch * len, 64, 2);
  const auto dy = random_matrix(batch * len, 64, 3);
  for (auto _ : state) {
    nn::MultiHeadAttention::Cache cache;
    benchmark::DoNotOptimize(attn.forward(x, x, batch, cache));
    benchmark::DoNotOptimize(attn.backward(cache, dy));
  }
  state.SetItemsProcessed(state.iterations() * batch * len);
}
BENCHMARK(BM_AttentionForwardBackward)->Arg(16)->Arg(64);

void BM_AuToBlendshapes(benchmark::State& state) {
  const auto& map = facs::AUBlendshapeMap::builtin();
  facs::AUVector aus;
  aus.set(map.au_index("AU6"), true);
  aus.set(map.au_index("AU12"), true);
  aus.set(map.au_index("AU25"), true);
  for (auto _ : state) benchmark::DoNotOptimize(facs::au_to_blendshapes(aus, map));
}
BENCHMARK(BM_AuToBlendshapes);

void BM_TextFeaturize(benchmark::State& state) {
  const align::TextFeaturizer featurizer(512);
  for (auto _ : state)
    benchmark::DoNotOptimize(featurizer.featurize("a woman laughs with delight, smiling broadly and relaxed"));
}
BENCHMARK(BM_TextFeaturize);

void BM_EncodeExpression(benchmark::State& state) {
  const align::ExpCLIPModel model;
  const auto b = facs::BlendshapeWeights::filled(0.3);
  for (auto _ : state) benchmark::DoNotOptimize(model.encode_expression(b));
}
BENCHMARK(BM_EncodeExpression);

void BM_EncodeText(benchmark::State& state) {
  const align::ExpCLIPModel model;
  for (auto _ : state) benchmark::DoNotOptimize(model.encode_text("happy, cheerful, smiling"));
}
BENCHMARK(BM_EncodeText);

void BM_Generate(benchmark::State& state) {
  animgen::ToyGeneratorOptions opts;
  opts.styles = {"neutral"};
  opts.clips_per_style = 1;
  opts.frames = static_cast<std::size_t>(state.range(0));
  const auto pairs = animgen::make_toy_generator_data(opts, facs::AUBlendshapeMap::builtin());
  const align::ExpCLIPModel expclip;
  const animgen::GeneratorModel gen;
  const auto style = expclip.encode_text("happy");
  for (auto _ : state) benchmark::DoNotOptimize(gen.generate(pairs.front().speech, style));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Generate)->Arg(96)->Arg(384);

}  // namespace

BENCHMARK_MAIN();
