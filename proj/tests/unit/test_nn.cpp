#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "emoface/common/error.hpp"
#include "emoface/nn/adam.hpp"
#include "emoface/nn/attention.hpp"
#include "emoface/nn/checkpoint.hpp"
#include "emoface/nn/grad_check.hpp"
#include "emoface/nn/layers.hpp"
#include "emoface/nn/losses.hpp"
#include "emoface/nn/transformer.hpp"

namespace emoface::nn {
namespace {

Matrix random_matrix(Index r, Index c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, scale);
  return m;
}

TEST(Linear, ZeroWeightsGiveZeroOutput) {
  Rng rng(0);
  Linear lin("lin", 5, 3, rng);
  lin.weight().value.setZero();
  lin.bias().value.setZero();
  Linear::Cache c;
  EXPECT_TRUE(lin.forward(random_matrix(4, 5, rng), c).isZero(0.0));
}

TEST(Linear, WrongInputWidthThrows) {
  Rng rng(0);
  Linear lin("lin", 5, 3, rng);
  Linear::Cache c;
  EXPECT_THROW(lin.forward(Matrix::Ones(2, 4), c), DimensionError);
  Matrix bad = Matrix::Ones(2, 5);
  bad(1, 1) = NAN;
  EXPECT_THROW(lin.forward(bad, c), NumericError);
}

TEST(Linear, StaleOrForeignCacheRejected) {
  Rng rng(0);
  Linear a("a", 3, 2, rng), b("b", 3, 2, rng);
  Linear::Cache c;
  a.forward(Matrix::Ones(1, 3), c);
  EXPECT_THROW(b.backward(c, Matrix::Ones(1, 2)), Error);
  Adam opt(a.parameters(), {});
  a.backward(c, Matrix::Ones(1, 2));
  opt.step();
  EXPECT_THROW(a.backward(c, Matrix::Ones(1, 2)), Error);
}

TEST(Identity, PassesGradientThrough) {
  Rng rng(1);
  const Matrix dy = random_matrix(3, 4, rng);
  EXPECT_EQ(Identity{}.backward(dy), dy);
}

TEST(Softmax, RowsPositiveAndSumToOne) {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    Matrix x = random_matrix(3, 1 + t % 9, rng, 20.0);
    const Matrix y = softmax_rows(x);
    for (Index r = 0; r < y.rows(); ++r) {
      EXPECT_NEAR(y.row(r).sum(), 1.0, 1e-12);
      EXPECT_GT(y.row(r).minCoeff(), 0.0);
    }
  }
  Matrix big(1, 2);
  big << 1000.0, 1000.0;
  EXPECT_NEAR(softmax_rows(big)(0, 0), 0.5, 1e-15);
}

// With one memory row the softmax weight is 1, so every query position sees
// exactly the value projection of that row.
TEST(Attention, SingleFrameReturnsValueProjection) {
  Rng rng(3);
  MultiHeadAttention attn("attn", 8, 1, rng);
  const Matrix q = random_matrix(3, 8, rng), mem = random_matrix(1, 8, rng);
  MultiHeadAttention::Cache c;
  const Matrix out = attn.forward(q, mem, 1, c);
  ASSERT_EQ(c.probs.size(), 1u);
  EXPECT_NEAR(c.probs[0].sum(), 3.0, 1e-12);
  for (Index r = 0; r < 3; ++r)
    EXPECT_LT((c.context.row(r) - c.values.row(0)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((out.row(0) - out.row(2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Attention, WeightsNonNegativeAndNormalised) {
  Rng rng(4);
  MultiHeadAttention attn("attn", 12, 3, rng);
  MultiHeadAttention::Cache c;
  attn.forward(random_matrix(2 * 5, 12, rng, 3.0), random_matrix(2 * 7, 12, rng, 3.0), 2, c);
  ASSERT_EQ(c.probs.size(), 6u);
  for (const auto& p : c.probs) {
    EXPECT_EQ(p.rows(), 5);
    EXPECT_EQ(p.cols(), 7);
    EXPECT_GE(p.minCoeff(), 0.0);
    for (Index r = 0; r < p.rows(); ++r) EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-6);
  }
}

TEST(Attention, BatchesDoNotMix) {
  Rng rng(5);
  MultiHeadAttention attn("attn", 8, 2, rng);
  const Matrix q = random_matrix(4, 8, rng);
  Matrix mem = random_matrix(6, 8, rng);
  MultiHeadAttention::Cache c1, c2;
  const Matrix a = attn.forward(q, mem, 2, c1);
  mem.bottomRows(3).setConstant(9.0);  // only the second sequence changes
  const Matrix b = attn.forward(q, mem, 2, c2);
  EXPECT_EQ(a.topRows(2), b.topRows(2));
  EXPECT_NE(a.bottomRows(2), b.bottomRows(2));
}

TEST(Forward, DeterministicForSameInputs) {
  Rng rng(6);
  TransformerEncoder enc("enc", {8, 2, 16, 2}, rng);
  const Matrix x = random_matrix(6, 8, rng);
  TransformerEncoder::Cache c1, c2;
  EXPECT_EQ(enc.forward(x, 2, c1), enc.forward(x, 2, c2));
}

TEST(Freeze, FrozenLayerKeepsZeroGradients) {
  Rng rng(7);
  FeedForward ff("ff", 4, 8, rng);
  ff.set_trainable(false);
  FeedForward::Cache c;
  ff.forward(random_matrix(3, 4, rng), c);
  ff.backward(c, random_matrix(3, 4, rng));
  for (auto* p : ff.parameters()) EXPECT_TRUE(p->grad.isZero(0.0)) << p->name;
}

// Gradient checks over shapes drawn at random.
class RandomShapes : public ::testing::TestWithParam<int> {};

TEST_P(RandomShapes, LinearWithL2) {
  Rng rng(100 + GetParam());
  const Index in = 1 + rng.index(6), out = 1 + rng.index(6), n = 1 + rng.index(5);
  Linear lin("lin", in, out, rng);
  Parameter x("x", random_matrix(n, in, rng));
  const Matrix target = random_matrix(n, out, rng);
  std::vector<Parameter*> ps = lin.parameters();
  ps.push_back(&x);
  auto loss = [&] {
    Linear::Cache c;
    return l2_distance_rows(lin.forward(x.value, c), target).value;
  };
  auto acc = [&] {
    Linear::Cache c;
    const auto l = l2_distance_rows(lin.forward(x.value, c), target);
    x.grad += lin.backward(c, l.grad);
  };
  EXPECT_LT(grad_check(ps, loss, acc).max_rel_error, 1e-6);
}

TEST_P(RandomShapes, LayerNormWithMse) {
  Rng rng(200 + GetParam());
  const Index d = 2 + rng.index(7), n = 1 + rng.index(5);
  LayerNorm ln("ln", d);
  ln.gain().value = random_matrix(1, d, rng);
  ln.shift().value = random_matrix(1, d, rng);
  Parameter x("x", random_matrix(n, d, rng, 2.0));
  const Matrix target = random_matrix(n, d, rng);
  std::vector<Parameter*> ps = ln.parameters();
  ps.push_back(&x);
  auto loss = [&] {
    LayerNorm::Cache c;
    return mse(ln.forward(x.value, c), target).value;
  };
  auto acc = [&] {
    LayerNorm::Cache c;
    const auto l = mse(ln.forward(x.value, c), target);
    x.grad += ln.backward(c, l.grad);
  };
  EXPECT_LT(grad_check(ps, loss, acc).max_rel_error, 1e-4);
}

TEST_P(RandomShapes, AttentionWithL1) {
  Rng rng(300 + GetParam());
  const Index heads = 1 + rng.index(3), d = heads * (1 + rng.index(3));
  const Index batch = 1 + rng.index(2), sq = 1 + rng.index(3), sk = 1 + rng.index(4);
  MultiHeadAttention attn("attn", d, heads, rng);
  Parameter q("q", random_matrix(batch * sq, d, rng)), m("m", random_matrix(batch * sk, d, rng));
  const Matrix target = random_matrix(batch * sq, d, rng);
  std::vector<Parameter*> ps = attn.parameters();
  ps.push_back(&q);
  ps.push_back(&m);
  auto loss = [&] {
    MultiHeadAttention::Cache c;
    return l1_sum(attn.forward(q.value, m.value, batch, c), target, 3.0).value;
  };
  auto acc = [&] {
    MultiHeadAttention::Cache c;
    const auto l = l1_sum(attn.forward(q.value, m.value, batch, c), target, 3.0);
    const auto g = attn.backward(c, l.grad);
    q.grad += g.query;
    m.grad += g.memory;
  };
  EXPECT_LT(grad_check(ps, loss, acc).max_rel_error, 1e-4);
}

TEST_P(RandomShapes, DecoderBlockWithMse) {
  Rng rng(400 + GetParam());
  const Index heads = 1 + rng.index(2), d = 2 * heads;
  const TransformerShape shape{d, heads, 2 + static_cast<Index>(rng.index(5)), 1};
  DecoderBlock block("dec", shape, rng);
  const Index batch = 1 + rng.index(2), s = 1 + rng.index(3), sm = 1 + rng.index(3);
  Parameter x("x", random_matrix(batch * s, d, rng)), m("m", random_matrix(batch * sm, d, rng));
  const Matrix target = random_matrix(batch * s, d, rng);
  std::vector<Parameter*> ps = block.parameters();
  ps.push_back(&x);
  ps.push_back(&m);
  auto loss = [&] {
    DecoderBlock::Cache c;
    return mse(block.forward(x.value, m.value, batch, c), target).value;
  };
  auto acc = [&] {
    DecoderBlock::Cache c;
    const auto l = mse(block.forward(x.value, m.value, batch, c), target);
    const auto g = block.backward(c, l.grad);
    x.grad += g.input;
    m.grad += g.memory;
  };
  EXPECT_LT(grad_check(ps, loss, acc).max_rel_error, 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomShapes, ::testing::Range(0, 8));

TEST(GradCheck, TwoLayerEncoderWithCosineLoss) {
  Rng rng(8);
  TransformerEncoder enc("enc", {8, 2, 12, 2}, rng);
  const Index batch = 2, s = 3;
  const Matrix x = random_matrix(batch * s, 8, rng);
  const Matrix target = random_matrix(batch, 8, rng);
  auto loss = [&] {
    TransformerEncoder::Cache c;
    return cosine_embedding_rows(mean_pool(enc.forward(x, batch, c), batch), target).value;
  };
  auto acc = [&] {
    TransformerEncoder::Cache c;
    const auto l = cosine_embedding_rows(mean_pool(enc.forward(x, batch, c), batch), target);
    enc.backward(c, mean_pool_backward(l.grad_a, s));
  };
  const auto ps = enc.parameters();
  EXPECT_LT(grad_check(ps, loss, acc).max_rel_error, 1e-4);
}

TEST(GradCheck, FrozenCoordinatesExcluded) {
  Rng rng(9);
  Linear a("a", 3, 4, rng), b("b", 4, 2, rng);
  b.set_trainable(false);
  const Matrix x = random_matrix(2, 3, rng), target = random_matrix(2, 2, rng);
  auto loss = [&] {
    Linear::Cache ca, cb;
    return mse(b.forward(a.forward(x, ca), cb), target).value;
  };
  auto acc = [&] {
    Linear::Cache ca, cb;
    const auto l = mse(b.forward(a.forward(x, ca), cb), target);
    a.backward(ca, b.backward(cb, l.grad));
  };
  std::vector<Parameter*> ps = a.parameters();
  for (auto* p : b.parameters()) ps.push_back(p);
  const auto r = grad_check(ps, loss, acc);
  EXPECT_EQ(r.checked, static_cast<std::size_t>(3 * 4 + 4));
  EXPECT_LT(r.max_rel_error, 1e-6);
}

// A backward that drops a factor of two must be caught and attributed.
TEST(GradCheck, BrokenBackwardIsReported) {
  Rng rng(10);
  Linear lin("broken", 3, 2, rng);
  const Matrix x = random_matrix(4, 3, rng), target = random_matrix(4, 2, rng);
  auto loss = [&] {
    Linear::Cache c;
    return mse(lin.forward(x, c), target).value;
  };
  auto acc = [&] {
    Linear::Cache c;
    const auto l = mse(lin.forward(x, c), target);
    lin.backward(c, 0.5 * l.grad);
  };
  const auto ps = lin.parameters();
  const auto r = grad_check(ps, loss, acc);
  EXPECT_GT(r.max_rel_error, 0.1);
  EXPECT_EQ(r.worst_parameter.rfind("broken", 0), 0u) << r.worst_parameter;
}

TEST(Losses, HandComputedValues) {
  Matrix a(1, 2), b(1, 2);
  a << 1.0, 0.0;
  b << -2.0, 0.0;
  EXPECT_NEAR(cosine_embedding_rows(a, b).value, 2.0, 1e-15);  // antiparallel
  EXPECT_NEAR(cosine_embedding_rows(a, a).value, 0.0, 1e-15);
  Matrix p(2, 2), t(2, 2);
  p << 3.0, 4.0, 0.0, 0.0;
  t.setZero();
  EXPECT_NEAR(l2_distance_rows(p, t).value, 2.5, 1e-15);  // (5 + 0) / 2
  EXPECT_TRUE(l2_distance_rows(t, t).grad.isZero(0.0));
  EXPECT_NEAR(mse(p, t).value, 25.0 / 4.0, 1e-15);
  EXPECT_NEAR(l1_sum(p, t, 7.0).value, 1.0, 1e-15);
  EXPECT_THROW(cosine_embedding_rows(t, p), NumericError);
  EXPECT_THROW(mse(p, Matrix::Zero(2, 3)), DimensionError);
}

TEST(LrSchedule, CosineDecaysFromBaseAndStaysPositive) {
  EXPECT_EQ(scheduled_lr(0.1, LrSchedule::Constant, 7, 10), 0.1);
  EXPECT_EQ(scheduled_lr(0.1, LrSchedule::Cosine, 0, 10), 0.1);
  EXPECT_NEAR(scheduled_lr(0.1, LrSchedule::Cosine, 5, 10), 0.05, 1e-15);
  double prev = 0.1;
  for (int e = 1; e < 10; ++e) {
    const double lr = scheduled_lr(0.1, LrSchedule::Cosine, e, 10);
    EXPECT_LT(lr, prev);
    EXPECT_GT(lr, 0.0);
    prev = lr;
  }
  EXPECT_THROW(scheduled_lr(0.1, LrSchedule::Cosine, 10, 10), InvalidArgument);
  EXPECT_EQ(parse_lr_schedule(to_string(LrSchedule::Cosine)), LrSchedule::Cosine);
  EXPECT_THROW(parse_lr_schedule("linear"), InvalidArgument);
}

TEST(Adam, ZeroGradientLeavesParametersButCountsStep) {
  Parameter p("p", Matrix::Constant(2, 2, 1.5));
  Adam opt({&p}, {});
  opt.step();
  EXPECT_EQ(p.value, Matrix::Constant(2, 2, 1.5));
  EXPECT_EQ(opt.step_count(), 1);
}

TEST(Adam, StepMovesAgainstGradientAndZeroesIt) {
  Parameter p("p", Matrix::Zero(1, 3));
  p.grad << 2.0, -3.0, 0.5;
  Adam opt({&p}, {0.01});
  opt.step();
  EXPECT_LT(p.value(0, 0), 0.0);
  EXPECT_GT(p.value(0, 1), 0.0);
  EXPECT_LT(p.value(0, 2), 0.0);
  // First bias-corrected step has magnitude lr for every nonzero gradient.
  EXPECT_NEAR(std::abs(p.value(0, 1)), 0.01, 1e-9);
  EXPECT_TRUE(p.grad.isZero(0.0));
}

TEST(Adam, FrozenParameterNotUpdated) {
  Parameter p("p", Matrix::Zero(1, 1));
  p.trainable = false;
  p.grad(0, 0) = 1.0;
  Adam opt({&p}, {0.1});
  opt.step();
  EXPECT_EQ(p.value(0, 0), 0.0);
}

TEST(Adam, QuadraticConverges) {
  Parameter x("x", Matrix::Zero(1, 1));
  Adam opt({&x}, {0.1});
  for (int i = 0; i < 500; ++i) {
    x.grad(0, 0) = 2.0 * (x.value(0, 0) - 3.0);
    opt.step();
  }
  EXPECT_NEAR(x.value(0, 0), 3.0, 1e-2);
}

TEST(Adam, StateRoundTripContinuesIdentically) {
  Parameter a("w", Matrix::Zero(1, 2)), b("w", Matrix::Zero(1, 2));
  Adam oa({&a}, {0.05}), ob({&b}, {0.05});
  auto grad = [](Parameter& p) { p.grad << p.value(0, 0) - 1.0, p.value(0, 1) + 2.0; };
  for (int i = 0; i < 3; ++i) {
    grad(a);
    oa.step();
  }
  b.value = a.value;
  ob.load_state(oa.state());
  grad(a);
  oa.step();
  grad(b);
  ob.step();
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(ob.step_count(), 4);
  Parameter c("w", Matrix::Zero(2, 2));
  Adam oc({&c}, {});
  EXPECT_THROW(oc.load_state(oa.state()), DimensionError);
}

TEST(Checkpoint, RoundTripAndShapeValidation) {
  Rng rng(11);
  Linear a("layer", 3, 2, rng), b("layer", 3, 2, rng);
  auto pa = a.parameters(), pb = b.parameters();
  const auto path = std::filesystem::temp_directory_path() / "emoface_test_ckpt.json";
  write_json_file(path, make_checkpoint("unit", {{"in", 3}}, pa));
  const auto manifest = open_checkpoint(path, "unit");
  parameters_from_json(manifest.at("parameters"), pb);
  EXPECT_EQ(a.weight().value, b.weight().value);
  EXPECT_EQ(a.bias().value, b.bias().value);
  EXPECT_THROW(open_checkpoint(path, "other"), Error);

  Linear wide("layer", 4, 2, rng);
  auto pw = wide.parameters();
  EXPECT_THROW(parameters_from_json(manifest.at("parameters"), pw), DimensionError);

  // Equal parameters serialise to identical bytes.
  const auto again = std::filesystem::temp_directory_path() / "emoface_test_ckpt2.json";
  write_json_file(again, make_checkpoint("unit", {{"in", 3}}, pb));
  EXPECT_EQ(read_json_file(path).dump(), read_json_file(again).dump());
  nlohmann::json bad = matrix_to_json(Matrix::Ones(2, 2));
  bad["values"].push_back(1.0);
  EXPECT_THROW(matrix_from_json(bad), DimensionError);
}

}  // namespace
}  // namespace emoface::nn
