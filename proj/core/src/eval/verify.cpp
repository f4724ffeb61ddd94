#include "emoface/eval/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "emoface/align/model.hpp"
#include "emoface/animgen/generator.hpp"
#include "emoface/animgen/losses.hpp"
#include "emoface/animgen/trainer.hpp"
#include "emoface/common/error.hpp"
#include "emoface/facs/blendshapes.hpp"
#include "emoface/nn/losses.hpp"
#include "emoface/nn/transformer.hpp"
#include "emoface/tead/augment.hpp"
#include "emoface/tead/store.hpp"

namespace emoface::eval {

using nn::Index;
using nn::Matrix;
using nn::Parameter;

namespace {

Matrix rand_mat(Index r, Index c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

double project(const Matrix& y, const Matrix& r) { return (y.array() * r.array()).sum(); }

std::vector<Parameter*> with(std::vector<Parameter*> params, std::initializer_list<Parameter*> extra) {
  params.insert(params.end(), extra.begin(), extra.end());
  return params;
}

std::vector<Parameter*> prefixed(const std::vector<Parameter*>& params, std::string_view prefix) {
  std::vector<Parameter*> out;
  for (auto* p : params)
    if (p->name.starts_with(prefix)) out.push_back(p);
  return out;
}

facs::BlendshapeWeights rand_weights(Rng& rng, double lo = 0.0, double hi = 1.0) {
  std::array<double, facs::kNumBlendshapes> v{};
  for (auto& x : v) x = rng.uniform(lo, hi);
  return facs::BlendshapeWeights(v);
}

align::ExpCLIPConfig small_expclip() {
  align::ExpCLIPConfig c;
  c.channels_per_token = 13;
  c.transformer = {8, 2, 8, 1};
  c.embed_dim = 6;
  c.text_width = 32;
  c.projector_hidden = 8;
  c.image_width = 5;
  c.seed = 3;
  return c;
}

animgen::GeneratorConfig small_generator() {
  animgen::GeneratorConfig g;
  g.speech_dim = 3;
  g.style_dim = 6;
  g.transformer = {8, 2, 8, 1};
  g.pooling = {8, 2, 8, 1};
  g.head_hidden = 6;
  g.seed = 5;
  return g;
}

CheckOutcome check_grad(std::vector<Parameter*> params, const std::function<double()>& loss,
                        const std::function<void()>& accumulate, double tol) {
  return grad_outcome(nn::grad_check(params, loss, accumulate), tol);
}

/// Elementwise function f with backward b(x, y, dy).
CheckOutcome elementwise(const std::function<Matrix(const Matrix&)>& f,
                         const std::function<Matrix(const Matrix&, const Matrix&, const Matrix&)>& b,
                         std::uint64_t seed, double tol) {
  Rng rng(seed);
  Parameter x("input", rand_mat(4, 5, rng, -2.0, 2.0));
  const Matrix r = rand_mat(4, 5, rng);
  return check_grad(
      {&x}, [&] { return project(f(x.value), r); },
      [&] { x.grad += b(x.value, f(x.value), r); }, tol);
}

void add_layer_checks(std::vector<NamedCheck>& out, double tol) {
  out.push_back({"gradcheck/identity", [tol] {
                   return elementwise([](const Matrix& x) { return nn::Identity{}.forward(x); },
                                      [](const Matrix&, const Matrix&, const Matrix& dy) {
                                        return nn::Identity{}.backward(dy);
                                      },
                                      10, tol);
                 }});
  out.push_back({"gradcheck/gelu", [tol] {
                   return elementwise(nn::gelu,
                                      [](const Matrix& x, const Matrix&, const Matrix& dy) {
                                        return nn::gelu_backward(x, dy);
                                      },
                                      11, tol);
                 }});
  out.push_back({"gradcheck/sigmoid", [tol] {
                   return elementwise(nn::sigmoid,
                                      [](const Matrix&, const Matrix& y, const Matrix& dy) {
                                        return nn::sigmoid_backward_from_output(y, dy);
                                      },
                                      12, tol);
                 }});
  out.push_back({"gradcheck/softmax_rows", [tol] {
                   return elementwise(nn::softmax_rows,
                                      [](const Matrix&, const Matrix& y, const Matrix& dy) {
                                        return nn::softmax_rows_backward(y, dy);
                                      },
                                      13, tol);
                 }});
  out.push_back({"gradcheck/mean_pool", [tol] {
                   Rng rng(14);
                   Parameter x("input", rand_mat(6, 4, rng));
                   const Matrix r = rand_mat(2, 4, rng);
                   return check_grad(
                       {&x}, [&] { return project(nn::mean_pool(x.value, 2), r); },
                       [&] { x.grad += nn::mean_pool_backward(r, 3); }, tol);
                 }});
  out.push_back({"gradcheck/linear", [tol] {
                   Rng rng(15);
                   nn::Linear layer("linear", 3, 4, rng);
                   layer.bias().value = rand_mat(1, 4, rng);
                   Parameter x("linear.input", rand_mat(5, 3, rng));
                   const Matrix r = rand_mat(5, 4, rng);
                   return check_grad(
                       with(layer.parameters(), {&x}),
                       [&] {
                         nn::Linear::Cache c;
                         return project(layer.forward(x.value, c), r);
                       },
                       [&] {
                         nn::Linear::Cache c;
                         layer.forward(x.value, c);
                         x.grad += layer.backward(c, r);
                       },
                       tol);
                 }});
  out.push_back({"gradcheck/layer_norm", [tol] {
                   Rng rng(16);
                   nn::LayerNorm layer("layer_norm", 6);
                   layer.gain().value = rand_mat(1, 6, rng, 0.5, 1.5);
                   layer.shift().value = rand_mat(1, 6, rng);
                   Parameter x("layer_norm.input", rand_mat(4, 6, rng));
                   const Matrix r = rand_mat(4, 6, rng);
                   return check_grad(
                       with(layer.parameters(), {&x}),
                       [&] {
                         nn::LayerNorm::Cache c;
                         return project(layer.forward(x.value, c), r);
                       },
                       [&] {
                         nn::LayerNorm::Cache c;
                         layer.forward(x.value, c);
                         x.grad += layer.backward(c, r);
                       },
                       tol);
                 }});
  out.push_back({"gradcheck/feed_forward", [tol] {
                   Rng rng(17);
                   nn::FeedForward layer("feed_forward", 4, 7, rng);
                   Parameter x("feed_forward.input", rand_mat(5, 4, rng));
                   const Matrix r = rand_mat(5, 4, rng);
                   return check_grad(
                       with(layer.parameters(), {&x}),
                       [&] {
                         nn::FeedForward::Cache c;
                         return project(layer.forward(x.value, c), r);
                       },
                       [&] {
                         nn::FeedForward::Cache c;
                         layer.forward(x.value, c);
                         x.grad += layer.backward(c, r);
                       },
                       tol);
                 }});
  out.push_back({"gradcheck/self_attention", [tol] {
                   Rng rng(18);
                   nn::MultiHeadAttention layer("self_attention", 8, 2, rng);
                   Parameter x("self_attention.input", rand_mat(2 * 4, 8, rng));
                   const Matrix r = rand_mat(2 * 4, 8, rng);
                   return check_grad(
                       with(layer.parameters(), {&x}),
                       [&] {
                         nn::MultiHeadAttention::Cache c;
                         return project(layer.forward(x.value, x.value, 2, c), r);
                       },
                       [&] {
                         nn::MultiHeadAttention::Cache c;
                         layer.forward(x.value, x.value, 2, c);
                         auto g = layer.backward(c, r);
                         x.grad += g.query + g.memory;
                       },
                       tol);
                 }});
  out.push_back({"gradcheck/cross_attention", [tol] {
                   Rng rng(19);
                   nn::MultiHeadAttention layer("cross_attention", 8, 2, rng);
                   Parameter q("cross_attention.query", rand_mat(2 * 3, 8, rng));
                   Parameter m("cross_attention.memory", rand_mat(2 * 5, 8, rng));
                   const Matrix r = rand_mat(2 * 3, 8, rng);
                   return check_grad(
                       with(layer.parameters(), {&q, &m}),
                       [&] {
                         nn::MultiHeadAttention::Cache c;
                         return project(layer.forward(q.value, m.value, 2, c), r);
                       },
                       [&] {
                         nn::MultiHeadAttention::Cache c;
                         layer.forward(q.value, m.value, 2, c);
                         auto g = layer.backward(c, r);
                         q.grad += g.query;
                         m.grad += g.memory;
                       },
                       tol);
                 }});
  out.push_back({"gradcheck/encoder_block", [tol] {
                   Rng rng(20);
                   nn::EncoderBlock layer("encoder_block", {8, 2, 12, 1}, rng);
                   Parameter x("encoder_block.input", rand_mat(2 * 4, 8, rng));
                   const Matrix r = rand_mat(2 * 4, 8, rng);
                   return check_grad(
                       with(layer.parameters(), {&x}),
                       [&] {
                         nn::EncoderBlock::Cache c;
                         return project(layer.forward(x.value, 2, c), r);
                       },
                       [&] {
                         nn::EncoderBlock::Cache c;
                         layer.forward(x.value, 2, c);
                         x.grad += layer.backward(c, r);
                       },
                       tol);
                 }});
  out.push_back({"gradcheck/decoder_block", [tol] {
                   Rng rng(21);
                   nn::DecoderBlock layer("decoder_block", {8, 2, 12, 1}, rng);
                   Parameter x("decoder_block.input", rand_mat(2 * 4, 8, rng));
                   Parameter m("decoder_block.memory", rand_mat(2 * 2, 8, rng));
                   const Matrix r = rand_mat(2 * 4, 8, rng);
                   return check_grad(
                       with(layer.parameters(), {&x, &m}),
                       [&] {
                         nn::DecoderBlock::Cache c;
                         return project(layer.forward(x.value, m.value, 2, c), r);
                       },
                       [&] {
                         nn::DecoderBlock::Cache c;
                         layer.forward(x.value, m.value, 2, c);
                         auto g = layer.backward(c, r);
                         x.grad += g.input;
                         m.grad += g.memory;
                       },
                       tol);
                 }});
  out.push_back({"gradcheck/transformer_encoder", [tol] {
                   Rng rng(22);
                   nn::TransformerEncoder layer("transformer_encoder", {8, 2, 8, 2}, rng);
                   Parameter x("transformer_encoder.input", rand_mat(2 * 3, 8, rng));
                   const Matrix r = rand_mat(2 * 3, 8, rng);
                   return check_grad(
                       with(layer.parameters(), {&x}),
                       [&] {
                         nn::TransformerEncoder::Cache c;
                         return project(layer.forward(x.value, 2, c), r);
                       },
                       [&] {
                         nn::TransformerEncoder::Cache c;
                         layer.forward(x.value, 2, c);
                         x.grad += layer.backward(c, r);
                       },
                       tol);
                 }});
  out.push_back({"gradcheck/transformer_decoder", [tol] {
                   Rng rng(23);
                   nn::TransformerDecoder layer("transformer_decoder", {8, 2, 8, 2}, rng);
                   Parameter x("transformer_decoder.input", rand_mat(2 * 3, 8, rng));
                   Parameter m("transformer_decoder.memory", rand_mat(2 * 1, 8, rng));
                   const Matrix r = rand_mat(2 * 3, 8, rng);
                   return check_grad(
                       with(layer.parameters(), {&x, &m}),
                       [&] {
                         nn::TransformerDecoder::Cache c;
                         return project(layer.forward(x.value, m.value, 2, c), r);
                       },
                       [&] {
                         nn::TransformerDecoder::Cache c;
                         layer.forward(x.value, m.value, 2, c);
                         auto g = layer.backward(c, r);
                         x.grad += g.input;
                         m.grad += g.memory;
                       },
                       tol);
                 }});
}

void add_model_checks(std::vector<NamedCheck>& out, double tol) {
  out.push_back({"gradcheck/expression_encoder", [tol] {
                   align::ExpCLIPModel model(small_expclip());
                   Rng rng(30);
                   Parameter b("expression_encoder.input", rand_mat(3, 52, rng, 0.05, 0.95));
                   const Matrix r = rand_mat(3, 6, rng);
                   auto& enc = model.encoder();
                   return check_grad(
                       with(enc.parameters(), {&b}),
                       [&] {
                         align::ExpressionEncoder::Cache c;
                         return project(enc.forward(b.value, c), r);
                       },
                       [&] {
                         align::ExpressionEncoder::Cache c;
                         enc.forward(b.value, c);
                         b.grad += enc.backward(c, r);
                       },
                       tol);
                 }});
  out.push_back({"gradcheck/expression_decoder", [tol] {
                   align::ExpCLIPModel model(small_expclip());
                   Rng rng(31);
                   Parameter z("expression_decoder.input", rand_mat(3, 6, rng));
                   const Matrix r = rand_mat(3, 52, rng);
                   auto& dec = model.decoder();
                   return check_grad(
                       with(dec.parameters(), {&z}),
                       [&] {
                         align::ExpressionDecoder::Cache c;
                         return project(dec.forward(z.value, c), r);
                       },
                       [&] {
                         align::ExpressionDecoder::Cache c;
                         dec.forward(z.value, c);
                         z.grad += dec.backward(c, r);
                       },
                       tol);
                 }});
  out.push_back({"gradcheck/projector", [tol] {
                   align::ExpCLIPModel model(small_expclip());
                   Rng rng(32);
                   Parameter f("projector.input", rand_mat(3, 5, rng));
                   const Matrix r = rand_mat(3, 6, rng);
                   auto& proj = model.image_projector();
                   return check_grad(
                       with(proj.parameters(), {&f}),
                       [&] {
                         align::Projector::Cache c;
                         return project(proj.forward(f.value, c), r);
                       },
                       [&] {
                         align::Projector::Cache c;
                         proj.forward(f.value, c);
                         f.grad += proj.backward(c, r);
                       },
                       tol);
                 }});
  out.push_back({"gradcheck/self_attention_pooling", [tol] {
                   Rng rng(33);
                   animgen::SelfAttentionPooling pool("E_sa", {8, 2, 8, 1}, rng);
                   Parameter frames("E_sa.input", rand_mat(2 * 5, 52, rng, 0.05, 0.95));
                   const Matrix r = rand_mat(2, 52, rng);
                   return check_grad(
                       with(pool.parameters(), {&frames}),
                       [&] {
                         animgen::SelfAttentionPooling::Cache c;
                         return project(pool.forward(frames.value, 2, c), r);
                       },
                       [&] {
                         animgen::SelfAttentionPooling::Cache c;
                         pool.forward(frames.value, 2, c);
                         frames.grad += pool.backward(c, r);
                       },
                       tol);
                 }});
  out.push_back({"gradcheck/generator", [tol] {
                   animgen::GeneratorModel gen(small_generator());
                   Rng rng(34);
                   const Matrix speech = rand_mat(2 * 4, 3, rng);
                   Parameter style("generator.style", rand_mat(2, 6, rng));
                   const Matrix r = rand_mat(2 * 4, 52, rng);
                   return check_grad(
                       with(prefixed(gen.parameters(), "G."), {&style}),
                       [&] {
                         animgen::GeneratorModel::Cache c;
                         return project(gen.forward(speech, style.value, 2, c), r);
                       },
                       [&] {
                         animgen::GeneratorModel::Cache c;
                         gen.forward(speech, style.value, 2, c);
                         style.grad += gen.backward(c, r);
                       },
                       tol);
                 }});
}

void add_loss_checks(std::vector<NamedCheck>& out, double tol) {
  out.push_back({"gradcheck/loss_l2_distance_rows", [tol] {
                   Rng rng(40);
                   Parameter p("pred", rand_mat(4, 6, rng));
                   const Matrix t = rand_mat(4, 6, rng);
                   return check_grad(
                       {&p}, [&] { return nn::l2_distance_rows(p.value, t).value; },
                       [&] { p.grad += nn::l2_distance_rows(p.value, t).grad; }, tol);
                 }});
  out.push_back({"gradcheck/loss_cosine_embedding_rows", [tol] {
                   Rng rng(41);
                   Parameter a("a", rand_mat(4, 6, rng));
                   Parameter b("b", rand_mat(4, 6, rng));
                   return check_grad(
                       {&a, &b}, [&] { return nn::cosine_embedding_rows(a.value, b.value).value; },
                       [&] {
                         auto g = nn::cosine_embedding_rows(a.value, b.value);
                         a.grad += g.grad_a;
                         b.grad += g.grad_b;
                       },
                       tol);
                 }});
  out.push_back({"gradcheck/loss_mse", [tol] {
                   Rng rng(42);
                   Parameter p("pred", rand_mat(4, 6, rng));
                   const Matrix t = rand_mat(4, 6, rng);
                   return check_grad(
                       {&p}, [&] { return nn::mse(p.value, t).value; },
                       [&] { p.grad += nn::mse(p.value, t).grad; }, tol);
                 }});
  out.push_back({"gradcheck/loss_l1_sum", [tol] {
                   Rng rng(43);
                   Parameter p("pred", rand_mat(4, 6, rng));
                   const Matrix t = rand_mat(4, 6, rng);
                   return check_grad(
                       {&p}, [&] { return nn::l1_sum(p.value, t, 3.0).value; },
                       [&] { p.grad += nn::l1_sum(p.value, t, 3.0).grad; }, tol);
                 }});

  struct AlignCase {
    const char* name;
    align::LossWeights w;
    align::PromptPath path;
  };
  const AlignCase align_cases[] = {
      {"gradcheck/loss_expclip_autoencoder", {1, 0, 0}, align::PromptPath::Text},
      {"gradcheck/loss_expclip_embedding_text", {0, 1, 0}, align::PromptPath::Text},
      {"gradcheck/loss_expclip_cross_text", {0, 0, 1}, align::PromptPath::Text},
      {"gradcheck/loss_expclip_total_text", {1, 10, 10}, align::PromptPath::Text},
      {"gradcheck/loss_expclip_embedding_image", {0, 1, 0}, align::PromptPath::Image},
      {"gradcheck/loss_expclip_cross_image", {0, 0, 1}, align::PromptPath::Image},
  };
  for (const auto& ac : align_cases) {
    out.push_back({ac.name, [ac, tol] {
                     align::ExpCLIPModel model(small_expclip());
                     Rng rng(44);
                     const Matrix b = rand_mat(3, 52, rng, 0.05, 0.95);
                     const Matrix f = ac.path == align::PromptPath::Text
                                          ? model.featurize_texts({"furrowed brows and pressed lips",
                                                                   "a bright open smile",
                                                                   "tired drooping eyelids"})
                                          : rand_mat(3, 5, rng);
                     return check_grad(
                         model.parameters(),
                         [&] { return align::expclip_losses(model, b, f, ac.path, ac.w, false).total; },
                         [&] { align::expclip_losses(model, b, f, ac.path, ac.w, true); }, tol);
                   }});
  }

  out.push_back({"gradcheck/loss_rec", [tol] {
                   Rng rng(45);
                   Parameter p("pred", rand_mat(2 * 4, 52, rng));
                   const Matrix t = rand_mat(2 * 4, 52, rng);
                   return check_grad(
                       {&p}, [&] { return animgen::rec_loss(p.value, t, 2).value; },
                       [&] { p.grad += animgen::rec_loss(p.value, t, 2).grad; }, tol);
                 }});
  out.push_back({"gradcheck/loss_lip", [tol] {
                   Rng rng(46);
                   Parameter p("pred", rand_mat(2 * 4, 52, rng));
                   const Matrix t = rand_mat(2 * 4, 52, rng);
                   return check_grad(
                       {&p}, [&] { return animgen::lip_loss(p.value, t, 2).value; },
                       [&] { p.grad += animgen::lip_loss(p.value, t, 2).grad; }, tol);
                 }});

  struct GenCase {
    const char* name;
    animgen::GenLossWeights w;
    bool epa;
  };
  const GenCase gen_cases[] = {
      {"gradcheck/loss_generator_rec", {1, 0, 0}, false},
      {"gradcheck/loss_generator_lip", {0, 1, 0}, true},
      {"gradcheck/loss_generator_style", {0, 0, 1}, true},
      {"gradcheck/loss_generator_total", {1, 1, 1}, true},
  };
  for (const auto& gc : gen_cases) {
    out.push_back({gc.name, [gc, tol] {
                     align::ExpCLIPModel expclip(small_expclip());
                     for (auto* p : expclip.parameters()) p->trainable = false;
                     animgen::GeneratorModel gen(small_generator());
                     Rng rng(47);
                     animgen::GenBatch batch{rand_mat(2 * 5, 3, rng), rand_mat(2 * 5, 52, rng, 0.05, 0.95), 2};
                     animgen::EpaDraw draw{{rand_weights(rng), rand_weights(rng)}, {0.3, 0.7}, {}};
                     // The style target is a constant of the objective, so the
                     // finite differences must not move it either.
                     draw.style_target = animgen::epa_style_target(gen, expclip, batch, draw);
                     const animgen::EpaDraw* epa = gc.epa ? &draw : nullptr;
                     return check_grad(
                         gen.parameters(),
                         [&] { return animgen::generator_losses(gen, expclip, batch, epa, gc.w, false).total; },
                         [&] { animgen::generator_losses(gen, expclip, batch, epa, gc.w, true); }, tol);
                   }});
  }
}

CheckOutcome verdict(bool ok, double worst, std::string detail) {
  return {ok, worst, std::move(detail)};
}

tead::Quadruple dummy_quadruple(std::size_t i) {
  return {"rec-" + std::to_string(i), "some transcript", {"calm", "quiet", "still"},
          facs::BlendshapeWeights{}, "a situation"};
}

void add_invariant_checks(std::vector<NamedCheck>& out, std::size_t n) {
  out.push_back({"invariant/blend_endpoints", [n] {
                   Rng rng(60);
                   std::size_t bad = 0;
                   for (std::size_t i = 0; i < n; ++i) {
                     const auto a = rand_weights(rng), b = rand_weights(rng);
                     if (!(facs::blend_prompts(a, b, 0.0) == a) || !(facs::blend_prompts(a, b, 1.0) == b))
                       ++bad;
                   }
                   return verdict(bad == 0, static_cast<double>(bad),
                                  std::to_string(bad) + " of " + std::to_string(n) + " not bit-exact");
                 }});
  out.push_back({"invariant/blend_midpoint", [n] {
                   Rng rng(61);
                   double worst = 0.0;
                   for (std::size_t i = 0; i < n; ++i) {
                     const auto a = rand_weights(rng), b = rand_weights(rng);
                     const auto m = facs::blend_prompts(a, b, 0.5);
                     for (std::size_t c = 0; c < facs::kNumBlendshapes; ++c)
                       worst = std::max(worst, std::abs(m[c] - (a[c] + b[c]) / 2.0));
                   }
                   return verdict(worst <= 1e-15, worst, "max deviation from (a+b)/2");
                 }});
  out.push_back({"invariant/blend_convex_hull", [n] {
                   Rng rng(62);
                   double worst = 0.0;
                   for (std::size_t i = 0; i < n; ++i) {
                     const auto a = rand_weights(rng), b = rand_weights(rng);
                     const auto m = facs::blend_prompts(a, b, rng.uniform());
                     for (std::size_t c = 0; c < facs::kNumBlendshapes; ++c) {
                       const double lo = std::min(a[c], b[c]), hi = std::max(a[c], b[c]);
                       worst = std::max({worst, lo - m[c], m[c] - hi});
                     }
                   }
                   return verdict(worst <= 0.0, worst, "max excursion outside [min, max]");
                 }});
  out.push_back({"invariant/lip_loss_offset", [n] {
                   Rng rng(63);
                   double worst = 0.0;
                   for (std::size_t i = 0; i < n; ++i) {
                     const Index frames = 2 + static_cast<Index>(rng.index(7));
                     const Matrix truth = rand_mat(frames, 52, rng, 0.0, 1.0);
                     const Matrix offset = rand_mat(1, 52, rng, -1.0, 1.0);
                     const Matrix pred = truth.rowwise() + offset.row(0);
                     worst = std::max(worst, animgen::lip_loss(pred, truth, 1).value);
                   }
                   return verdict(worst <= 1e-9, worst, "max lip loss under constant offsets");
                 }});
  out.push_back({"invariant/au_map_range", [n] {
                   Rng rng(64);
                   const auto& map = facs::AUBlendshapeMap::builtin();
                   bool zero_ok = facs::au_to_blendshapes(facs::AUVector{}, map) == facs::BlendshapeWeights{};
                   double worst = 0.0;
                   for (std::size_t i = 0; i < n; ++i) {
                     facs::AUVector u;
                     for (std::size_t k = 0; k < facs::kNumAUs; ++k) u.set(k, rng.bernoulli(0.3));
                     const auto b = facs::au_to_blendshapes(u, map);
                     for (double v : b.values()) worst = std::max({worst, -v, v - 1.0});
                   }
                   return verdict(zero_ok && worst <= 0.0, worst,
                                  zero_ok ? "max excursion outside [0, 1]" : "no AUs did not give zeros");
                 }});
  out.push_back({"invariant/perturb_range", [n] {
                   Rng rng(65);
                   double worst = 0.0;
                   bool inside = true;
                   for (std::size_t i = 0; i < n; ++i) {
                     const auto b = rand_weights(rng);
                     const double mag = rng.uniform(0.0, 0.2);
                     const auto p = facs::perturb_blendshapes(b, mag, rng);
                     for (std::size_t c = 0; c < facs::kNumBlendshapes; ++c) {
                       worst = std::max(worst, std::abs(p[c] - b[c]) - mag);
                       inside = inside && p[c] >= 0.0 && p[c] <= 1.0;
                     }
                   }
                   return verdict(inside && worst <= 1e-15, worst, "max step beyond the magnitude");
                 }});
  out.push_back({"invariant/augment_text", [n] {
                   Rng rng(66);
                   const std::vector<std::string> words = {"the", "cat", "is", "very", "happy", "sad",
                                                           "and", "i", "feel", "angry", "today"};
                   const std::vector<tead::TextAugOp> all = {tead::TextAugOp::StopwordRemoval,
                                                             tead::TextAugOp::SynonymReplace,
                                                             tead::TextAugOp::SentenceShuffle};
                   const std::vector<tead::TextAugOp> shuffle = {tead::TextAugOp::SentenceShuffle};
                   std::size_t empty = 0, broken = 0;
                   const std::size_t cases = std::max<std::size_t>(n / 10, 1);
                   for (std::size_t i = 0; i < cases; ++i) {
                     std::string text;
                     const std::size_t sentences = 1 + rng.index(3);
                     for (std::size_t s = 0; s < sentences; ++s) {
                       const std::size_t len = 1 + rng.index(5);
                       for (std::size_t w = 0; w < len; ++w)
                         text += (w ? " " : "") + words[rng.index(words.size())];
                       text += ". ";
                     }
                     if (tead::augment_text(text, rng, all).empty()) ++empty;
                     auto before = tead::split_sentences(text);
                     auto after = tead::split_sentences(tead::augment_text(text, rng, shuffle));
                     std::sort(before.begin(), before.end());
                     std::sort(after.begin(), after.end());
                     if (before != after) ++broken;
                   }
                   return verdict(empty == 0 && broken == 0, static_cast<double>(empty + broken),
                                  std::to_string(empty) + " empty, " + std::to_string(broken) +
                                      " shuffles not a permutation");
                 }});
  out.push_back({"invariant/split_partition", [n] {
                   Rng rng(67);
                   std::size_t bad = 0;
                   const std::size_t cases = std::max<std::size_t>(n / 100, 1);
                   for (std::size_t i = 0; i < cases; ++i) {
                     tead::TEADStore store(rng.index(1000));
                     const std::size_t size = 2 + rng.index(99);
                     for (std::size_t k = 0; k < size; ++k) store.add(dummy_quadruple(k));
                     const double f = rng.uniform(0.05, 0.95);
                     const auto split = tead::split_dataset(store, f);
                     std::set<std::string> seen(split.train.begin(), split.train.end());
                     seen.insert(split.test.begin(), split.test.end());
                     const auto expected = static_cast<std::size_t>(std::llround(f * static_cast<double>(size)));
                     if (seen.size() != size || split.train.size() + split.test.size() != size ||
                         split.train.size() != expected)
                       ++bad;
                   }
                   return verdict(bad == 0, static_cast<double>(bad), std::to_string(bad) + " bad partitions");
                 }});
  out.push_back({"invariant/pooling_weights", [n] {
                   Rng rng(68);
                   animgen::SelfAttentionPooling pool("E_sa", {16, 4, 32, 1}, rng);
                   double worst = 0.0;
                   const std::size_t cases = std::max<std::size_t>(n / 100, 1);
                   for (std::size_t i = 0; i < cases; ++i) {
                     const Index frames = 1 + static_cast<Index>(rng.index(20));
                     const auto clip = animgen::AnimationClip::from_matrix(rand_mat(frames, 52, rng, 0.0, 1.0));
                     const auto w = pool.frame_weights(clip);
                     worst = std::max({worst, std::abs(w.sum() - 1.0), -w.minCoeff()});
                     const auto pooled = pool.pool(clip);
                     const Matrix m = clip.to_matrix();
                     for (Index c = 0; c < 52; ++c) {
                       const double v = pooled[static_cast<std::size_t>(c)];
                       worst = std::max({worst, m.col(c).minCoeff() - v, v - m.col(c).maxCoeff()});
                     }
                   }
                   return verdict(worst <= 1e-12, worst, "max weight-sum error or hull excursion");
                 }});
  out.push_back({"invariant/generator_range", [n] {
                   animgen::GeneratorModel gen(small_generator());
                   Rng rng(69);
                   double worst = 0.0;
                   std::size_t length_mismatch = 0;
                   const std::size_t cases = std::max<std::size_t>(n / 100, 1);
                   for (std::size_t i = 0; i < cases; ++i) {
                     const Index frames = 1 + static_cast<Index>(rng.index(30));
                     animgen::SpeechFeatureSequence s{rand_mat(frames, 3, rng, -5.0, 5.0), 15.0};
                     const Eigen::RowVectorXd style = rand_mat(1, 6, rng, -50.0, 50.0).row(0);
                     const auto clip = gen.generate(s, style);
                     if (clip.frame_count() != static_cast<std::size_t>(frames)) ++length_mismatch;
                     const Matrix m = clip.to_matrix();
                     worst = std::max({worst, -m.minCoeff(), m.maxCoeff() - 1.0});
                   }
                   return verdict(worst <= 0.0 && length_mismatch == 0, worst,
                                  std::to_string(length_mismatch) + " length mismatches");
                 }});
}

}  // namespace

bool CheckReport::passed() const { return failures() == 0; }

std::size_t CheckReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.outcome.passed; }));
}

std::string CheckReport::text() const {
  std::ostringstream os;
  for (const auto& r : results) {
    os << (r.outcome.passed ? "PASS " : "FAIL ") << r.name << " metric=" << std::setprecision(6)
       << r.outcome.metric;
    if (!r.outcome.detail.empty()) os << " (" << r.outcome.detail << ")";
    os << '\n';
  }
  os << results.size() - failures() << "/" << results.size() << " checks passed\n";
  return os.str();
}

CheckOutcome grad_outcome(const nn::GradCheckResult& r, double tolerance) {
  std::ostringstream os;
  os << std::setprecision(6) << "worst " << r.worst_parameter << "[" << r.worst_index
     << "] analytic=" << r.worst_analytic << " numeric=" << r.worst_numeric << ", " << r.checked
     << " scalars";
  return {r.checked > 0 && r.max_rel_error < tolerance, r.max_rel_error, os.str()};
}

std::vector<NamedCheck> gradient_checks(double tolerance) {
  std::vector<NamedCheck> out;
  add_layer_checks(out, tolerance);
  add_model_checks(out, tolerance);
  add_loss_checks(out, tolerance);
  return out;
}

std::vector<NamedCheck> invariant_checks(std::size_t cases) {
  std::vector<NamedCheck> out;
  add_invariant_checks(out, cases);
  return out;
}

CheckReport run_checks(const std::vector<NamedCheck>& checks) {
  CheckReport report;
  for (const auto& c : checks) {
    CheckOutcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, 0.0, std::string("threw: ") + e.what()};
    }
    report.results.push_back({c.name, std::move(o)});
  }
  return report;
}

const NamedCheck& find_check(const std::vector<NamedCheck>& checks, const std::string& name) {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw InvalidArgument("no check named " + name);
}

}  // namespace emoface::eval
