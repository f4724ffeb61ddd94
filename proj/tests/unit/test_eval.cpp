#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "emoface/common/error.hpp"
#include "emoface/common/text.hpp"
#include "emoface/eval/ablation.hpp"
#include "emoface/eval/metrics.hpp"
#include "emoface/eval/report.hpp"
#include "emoface/eval/verify.hpp"
#include "emoface/tead/toy_corpus.hpp"

namespace emoface::eval {
namespace {

using nn::Index;
using nn::Matrix;

Matrix gaussian(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

align::ExpCLIPConfig small_expclip() {
  align::ExpCLIPConfig c;
  c.channels_per_token = 13;
  c.transformer = {8, 2, 16, 1};
  c.embed_dim = 8;
  c.text_width = 64;
  c.projector_hidden = 16;
  c.image_width = 6;
  c.seed = 2;
  return c;
}

std::vector<facs::BlendshapeWeights> ramp(std::size_t frames, int channel) {
  std::vector<facs::BlendshapeWeights> out;
  for (std::size_t t = 0; t < frames; ++t) {
    std::vector<double> w(52, 0.0);
    w[channel] = static_cast<double>(t) / static_cast<double>(frames - 1);
    out.emplace_back(w);
  }
  return out;
}

TEST(Retrieval, IdenticalCandidatesAllCountAsHits) {
  const Matrix q = Matrix::Constant(5, 4, 1.0);
  EXPECT_EQ(retrieval_topk(q, q, 1), 1.0);
}

TEST(Retrieval, SelfRetrievalAndFullKArePerfect) {
  Rng rng(1);
  const Matrix c = gaussian(20, 16, rng);
  EXPECT_EQ(retrieval_topk(c, c, 1), 1.0);
  EXPECT_EQ(retrieval_topk(gaussian(20, 16, rng), c, 20), 1.0);
  EXPECT_THROW(retrieval_topk(c, c, 0), InvalidArgument);
  EXPECT_THROW(retrieval_topk(c, gaussian(20, 15, rng), 1), DimensionError);
}

TEST(Retrieval, RandomEmbeddingsScoreAtChance) {
  // Independent isotropic queries hit their candidate with probability k/N.
  Rng rng(2);
  constexpr int kTrials = 200;
  double top1 = 0.0, top5 = 0.0;
  for (int t = 0; t < kTrials; ++t) {
    const Matrix q = gaussian(100, 32, rng), c = gaussian(100, 32, rng);
    top1 += retrieval_topk(q, c, 1) / kTrials;
    top5 += retrieval_topk(q, c, 5) / kTrials;
  }
  // Standard errors: sqrt(0.01*0.99/20000) ~ 7e-4 and sqrt(0.05*0.95/20000) ~ 1.5e-3.
  EXPECT_NEAR(top1, 0.01, 0.003);
  EXPECT_NEAR(top5, 0.05, 0.006);
}

TEST(Retrieval, ExplicitTruthIndices) {
  Matrix c(2, 2);
  c << 1, 0, 0, 1;
  Matrix q(3, 2);
  q << 0.9, 0.1, 0.2, 0.8, 1, 0;
  EXPECT_NEAR(retrieval_topk(q, c, 1, {0, 1, 1}), 2.0 / 3.0, 1e-15);
  EXPECT_THROW(retrieval_topk(q, c, 1, {0, 1}), DimensionError);
}

TEST(Smoothness, ConstantSequenceIsFlat) {
  const std::vector<facs::BlendshapeWeights> flat(6, facs::BlendshapeWeights{});
  const auto s = smoothness(flat);
  EXPECT_EQ(s.max_delta, 0.0);
  EXPECT_EQ(s.mean_delta, 0.0);
}

TEST(Smoothness, LinearRampHasEqualSteps) {
  const auto s = smoothness(ramp(11, 3));
  EXPECT_NEAR(s.max_delta, 0.1, 1e-15);
  EXPECT_NEAR(s.mean_delta, 0.1, 1e-15);
  std::vector<facs::BlendshapeWeights> step(2);
  step.push_back(facs::BlendshapeWeights::filled(1.0));
  const auto j = smoothness(step);
  EXPECT_EQ(j.max_delta, 1.0);
  EXPECT_EQ(j.mean_delta, 0.5);
  EXPECT_THROW(smoothness({facs::BlendshapeWeights{}}), InvalidArgument);
}

TEST(Reconstruction, ConstantDecoderGivesClosedFormError) {
  align::ExpCLIPModel m(small_expclip());
  auto ps = m.decoder().parameters();
  ps[ps.size() - 1]->value.setZero();
  ps[ps.size() - 2]->value.setZero();
  EXPECT_EQ(reconstruction_mse(m, Matrix::Constant(4, 52, 0.5)), 0.0);
  EXPECT_NEAR(reconstruction_mse(m, Matrix::Zero(4, 52)), 0.25, 1e-15);
  EXPECT_THROW(reconstruction_mse(m, Matrix(0, 52)), InvalidArgument);
}

TEST(PerturbedWeights, SeededAndBounded) {
  const auto store = tead::toy_store({3, 1}, facs::AUBlendshapeMap::builtin());
  const Matrix a = perturbed_weights(store, 0.05, 7);
  EXPECT_EQ(a, perturbed_weights(store, 0.05, 7));
  EXPECT_NE(a, perturbed_weights(store, 0.05, 8));
  for (std::size_t i = 0; i < store.size(); ++i)
    for (int k = 0; k < 52; ++k) {
      const double v = a(static_cast<Index>(i), k);
      EXPECT_LE(std::abs(v - store[i].blendshapes[k]), 0.05 + 1e-15);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
}

TEST(GroupCentroids, MeansPerGroupSkippingUnknownIds) {
  const auto store = tead::toy_store({4, 1}, facs::AUBlendshapeMap::builtin());
  const auto c = group_centroids(store, tead::toy_cluster_of);
  ASSERT_EQ(c.groups.size(), tead::toy_clusters().size());
  for (std::size_t g = 0; g < c.groups.size(); ++g) {
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(52);
    int n = 0;
    for (const auto& q : store.records())
      if (tead::toy_cluster_of(q.id) == c.groups[g]) {
        sum += Eigen::Map<const Eigen::RowVectorXd>(q.blendshapes.data(), 52);
        ++n;
      }
    ASSERT_EQ(n, 4);
    for (int k = 0; k < 52; ++k) EXPECT_NEAR(c.centroids[g][k], sum[k] / n, 1e-15);
  }
  const auto none = group_centroids(store, [](std::string_view) { return std::optional<std::size_t>(); });
  EXPECT_TRUE(none.groups.empty());
}

TEST(StyleConsistency, BoundedAndDeterministic) {
  align::ExpCLIPModel e(small_expclip());
  animgen::GeneratorConfig gc;
  gc.style_dim = 8;
  gc.transformer = {8, 2, 16, 1};
  gc.pooling = {8, 2, 16, 1};
  gc.head_hidden = 8;
  animgen::GeneratorModel g(gc);
  Rng rng(3);
  const auto prompts = std::vector<facs::BlendshapeWeights>{
      animgen::style_expression("joy", facs::AUBlendshapeMap::builtin()),
      animgen::style_expression("anger", facs::AUBlendshapeMap::builtin())};
  const std::vector<animgen::SpeechFeatureSequence> speech{
      animgen::synthesize_speech(12, 16, animgen::kDefaultFps, rng).speech};
  const double s = style_consistency(g, e, prompts, speech);
  EXPECT_GE(s, -1.0);
  EXPECT_LE(s, 1.0);
  EXPECT_EQ(s, style_consistency(g, e, prompts, speech));
  EXPECT_THROW(style_consistency(g, e, {}, speech), InvalidArgument);
}

TEST(Reports, CsvRoundTripsValuesExactly) {
  const std::vector<EvalReport> r{{"a/mse", 0.1 + 0.2, "toy", "00ff", 3}, {"b", 1.0 / 3.0, "toy", "00ff", 4}};
  const auto lines = split(trim(reports_csv(r)), '\n');
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "metric,value,dataset,config_hash,seed");
  EXPECT_EQ(std::stod(split(lines[1], ',')[1]), 0.1 + 0.2);
  EXPECT_EQ(std::stod(split(lines[2], ',')[1]), 1.0 / 3.0);
  const auto j = reports_json(r, {{"a <= b", true}});
  EXPECT_EQ(j["reports"].size(), 2u);
  EXPECT_EQ(j["checks"][0]["claim"], "a <= b");
  const auto prefix = std::filesystem::temp_directory_path() / "emoface_test_reports";
  write_reports(prefix, r);
  EXPECT_EQ(read_file(prefix.string() + ".csv"), reports_csv(r));
  EXPECT_TRUE(std::filesystem::exists(prefix.string() + ".json"));
}

struct AblationFixture {
  tead::TEADStore train = tead::toy_store({3, 1}, facs::AUBlendshapeMap::builtin());
  tead::TEADStore test = tead::toy_store({1, 2}, facs::AUBlendshapeMap::builtin());
  ExpCLIPAblationSetup setup() const {
    ExpCLIPAblationSetup s;
    s.model = small_expclip();
    s.train = &train;
    s.test = &test;
    s.perturb_seed = 5;
    s.dataset = "toy";
    return s;
  }
  static align::ExpCLIPTrainConfig train_config() {
    align::ExpCLIPTrainConfig c;
    c.epochs = 2;
    c.batch_size = 8;
    c.lr = 1e-3;
    c.seed = 1;
    return c;
  }
};

TEST(Ablation, IdenticalVariantsGiveIdenticalMetricsAndShareTraining) {
  AblationFixture f;
  ExpCLIPModelCache cache;
  const auto r = expclip_variant_reports({{"x", f.train_config()}, {"y", f.train_config()}}, f.setup(), &cache);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].metric, "x/perturbed_recon_mse");
  EXPECT_EQ(r[0].value, r[1].value);
  EXPECT_EQ(r[0].config_hash, r[1].config_hash);
  EXPECT_EQ(cache.size(), 1u);
}

TEST(Ablation, ReportsAreReproducible) {
  AblationFixture f;
  const auto a = augmentation_ablation(f.setup(), f.train_config());
  const auto b = augmentation_ablation(f.setup(), f.train_config());
  ASSERT_EQ(a.reports.size(), 2u);
  ASSERT_EQ(a.checks.size(), 1u);
  EXPECT_EQ(reports_csv(a.reports), reports_csv(b.reports));
  EXPECT_NE(a.reports[0].config_hash, a.reports[1].config_hash);
  EXPECT_EQ(a.passed(), a.checks[0].passed);
}

TEST(Ablation, EpaVariantsAndChecks) {
  AblationFixture f;
  align::ExpCLIPModel e(small_expclip());
  animgen::ToyGeneratorOptions o;
  o.clips_per_style = 1;
  o.frames = 20;
  const auto data = animgen::make_toy_generator_data(o, facs::AUBlendshapeMap::builtin());
  Rng rng(4);
  GeneratorAblationSetup s;
  s.expclip = &e;
  s.generator.style_dim = 8;
  s.generator.transformer = {8, 2, 16, 1};
  s.generator.pooling = {8, 2, 16, 1};
  s.generator.head_hidden = 8;
  s.data = &data;
  s.epa_store = &f.train;
  s.prompts = {f.test[0].blendshapes};
  s.speech = {animgen::synthesize_speech(16, 16, animgen::kDefaultFps, rng).speech};
  animgen::GenTrainConfig base;
  base.window = 16;
  base.batch_size = 2;
  base.epochs = 1;
  const auto r = epa_ablation(s, base);
  ASSERT_EQ(r.reports.size(), 3u);
  EXPECT_EQ(r.reports[0].metric, "no_epa/style_consistency");
  EXPECT_EQ(r.reports[1].metric, "epa_no_style/style_consistency");
  EXPECT_EQ(r.reports[2].metric, "epa/style_consistency");
  ASSERT_EQ(r.checks.size(), 2u);
  EXPECT_EQ(reports_csv(epa_ablation(s, base).reports), reports_csv(r.reports));
}

TEST(Verify, EveryGradientCheckPasses) {
  const auto report = run_checks(gradient_checks());
  for (const auto& r : report.results) EXPECT_TRUE(r.outcome.passed) << r.name << ": " << r.outcome.detail;
  EXPECT_GE(report.results.size(), 30u);
}

TEST(Verify, EveryInvariantHolds) {
  const auto report = run_checks(invariant_checks(300));
  for (const auto& r : report.results) EXPECT_TRUE(r.outcome.passed) << r.name << ": " << r.outcome.detail;
  EXPECT_EQ(report.text(), run_checks(invariant_checks(300)).text());
}

TEST(Verify, FailuresAndExceptionsAreNamed) {
  const std::vector<NamedCheck> checks{
      {"ok", [] { return CheckOutcome{true, 0.0, ""}; }},
      {"bad", [] { return CheckOutcome{false, 1.0, "off by one"}; }},
      {"throws", []() -> CheckOutcome { throw NumericError("nan"); }}};
  const auto report = run_checks(checks);
  EXPECT_FALSE(report.passed());
  EXPECT_EQ(report.failures(), 2u);
  const auto text = report.text();
  EXPECT_NE(text.find("PASS ok"), std::string::npos);
  EXPECT_NE(text.find("FAIL bad"), std::string::npos);
  EXPECT_NE(text.find("FAIL throws"), std::string::npos);
  EXPECT_EQ(find_check(checks, "bad").name, "bad");
  EXPECT_THROW(find_check(checks, "missing"), InvalidArgument);
}

TEST(Verify, GradOutcomeAppliesTolerance) {
  nn::GradCheckResult r;
  r.max_rel_error = 2e-4;
  r.worst_parameter = "w";
  r.checked = 4;
  EXPECT_FALSE(grad_outcome(r).passed);
  EXPECT_TRUE(grad_outcome(r, 1e-3).passed);
  EXPECT_NE(grad_outcome(r).detail.find("w"), std::string::npos);
  r.checked = 0;  // an empty sweep proves nothing
  EXPECT_FALSE(grad_outcome(r, 1e-3).passed);
}

}  // namespace
}  // namespace emoface::eval
