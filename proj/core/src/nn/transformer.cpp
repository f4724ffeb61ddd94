#include "emoface/nn/transformer.hpp"

#include "emoface/common/error.hpp"

namespace emoface::nn {

EncoderBlock::EncoderBlock(const std::string& name, const TransformerShape& s, Rng& rng)
    : ln1_(name + ".ln1", s.model_dim),
      ln2_(name + ".ln2", s.model_dim),
      attn_(name + ".attn", s.model_dim, s.heads, rng),
      ff_(name + ".ff", s.model_dim, s.ff_dim, rng) {}

Matrix EncoderBlock::forward(const Matrix& x, Index batch, Cache& cache) const {
  Matrix n1 = ln1_.forward(x, cache.ln1);
  Matrix h = x + attn_.forward(n1, n1, batch, cache.attn);
  Matrix n2 = ln2_.forward(h, cache.ln2);
  return h + ff_.forward(n2, cache.ff);
}

Matrix EncoderBlock::backward(const Cache& cache, const Matrix& dy) {
  Matrix dh = dy + ln2_.backward(cache.ln2, ff_.backward(cache.ff, dy));
  auto ga = attn_.backward(cache.attn, dh);
  return dh + ln1_.backward(cache.ln1, ga.query + ga.memory);
}

void EncoderBlock::collect_parameters(std::vector<Parameter*>& out) {
  ln1_.collect_parameters(out);
  attn_.collect_parameters(out);
  ln2_.collect_parameters(out);
  ff_.collect_parameters(out);
}

DecoderBlock::DecoderBlock(const std::string& name, const TransformerShape& s, Rng& rng)
    : ln1_(name + ".ln1", s.model_dim),
      ln2_(name + ".ln2", s.model_dim),
      ln3_(name + ".ln3", s.model_dim),
      self_attn_(name + ".self_attn", s.model_dim, s.heads, rng),
      cross_attn_(name + ".cross_attn", s.model_dim, s.heads, rng),
      ff_(name + ".ff", s.model_dim, s.ff_dim, rng) {}

Matrix DecoderBlock::forward(const Matrix& x, const Matrix& memory, Index batch,
                             Cache& cache) const {
  Matrix n1 = ln1_.forward(x, cache.ln1);
  Matrix h1 = x + self_attn_.forward(n1, n1, batch, cache.self_attn);
  Matrix n2 = ln2_.forward(h1, cache.ln2);
  Matrix h2 = h1 + cross_attn_.forward(n2, memory, batch, cache.cross_attn);
  Matrix n3 = ln3_.forward(h2, cache.ln3);
  return h2 + ff_.forward(n3, cache.ff);
}

DecoderBlock::Gradients DecoderBlock::backward(const Cache& cache, const Matrix& dy) {
  Matrix dh2 = dy + ln3_.backward(cache.ln3, ff_.backward(cache.ff, dy));
  auto gc = cross_attn_.backward(cache.cross_attn, dh2);
  Matrix dh1 = dh2 + ln2_.backward(cache.ln2, gc.query);
  auto gs = self_attn_.backward(cache.self_attn, dh1);
  Gradients g;
  g.input = dh1 + ln1_.backward(cache.ln1, gs.query + gs.memory);
  g.memory = std::move(gc.memory);
  return g;
}

void DecoderBlock::collect_parameters(std::vector<Parameter*>& out) {
  ln1_.collect_parameters(out);
  self_attn_.collect_parameters(out);
  ln2_.collect_parameters(out);
  cross_attn_.collect_parameters(out);
  ln3_.collect_parameters(out);
  ff_.collect_parameters(out);
}

TransformerEncoder::TransformerEncoder(const std::string& name, const TransformerShape& shape,
                                       Rng& rng) {
  blocks_.reserve(static_cast<std::size_t>(shape.layers));
  for (Index i = 0; i < shape.layers; ++i)
    blocks_.emplace_back(name + ".block" + std::to_string(i), shape, rng);
}

Matrix TransformerEncoder::forward(const Matrix& x, Index batch, Cache& cache) const {
  cache.resize(blocks_.size());
  Matrix h = x;
  for (std::size_t i = 0; i < blocks_.size(); ++i) h = blocks_[i].forward(h, batch, cache[i]);
  return h;
}

Matrix TransformerEncoder::backward(const Cache& cache, const Matrix& dy) {
  if (cache.size() != blocks_.size()) throw InvalidArgument("encoder: mismatched cache");
  Matrix d = dy;
  for (std::size_t i = blocks_.size(); i-- > 0;) d = blocks_[i].backward(cache[i], d);
  return d;
}

void TransformerEncoder::collect_parameters(std::vector<Parameter*>& out) {
  for (auto& b : blocks_) b.collect_parameters(out);
}

TransformerDecoder::TransformerDecoder(const std::string& name, const TransformerShape& shape,
                                       Rng& rng) {
  blocks_.reserve(static_cast<std::size_t>(shape.layers));
  for (Index i = 0; i < shape.layers; ++i)
    blocks_.emplace_back(name + ".block" + std::to_string(i), shape, rng);
}

Matrix TransformerDecoder::forward(const Matrix& x, const Matrix& memory, Index batch,
                                   Cache& cache) const {
  cache.resize(blocks_.size());
  Matrix h = x;
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    h = blocks_[i].forward(h, memory, batch, cache[i]);
  return h;
}

TransformerDecoder::Gradients TransformerDecoder::backward(const Cache& cache, const Matrix& dy) {
  if (cache.size() != blocks_.size()) throw InvalidArgument("decoder: mismatched cache");
  Gradients g;
  g.input = dy;
  for (std::size_t i = blocks_.size(); i-- > 0;) {
    auto gi = blocks_[i].backward(cache[i], g.input);
    g.input = std::move(gi.input);
    if (g.memory.size() == 0) {
      g.memory = std::move(gi.memory);
    } else {
      g.memory += gi.memory;
    }
  }
  return g;
}

void TransformerDecoder::collect_parameters(std::vector<Parameter*>& out) {
  for (auto& b : blocks_) b.collect_parameters(out);
}

Matrix mean_pool(const Matrix& x, Index batch) {
  if (batch <= 0 || x.rows() % batch != 0) throw DimensionError("mean_pool: bad batch size");
  const Index s = x.rows() / batch;
  Matrix out(batch, x.cols());
  for (Index b = 0; b < batch; ++b) out.row(b) = x.middleRows(b * s, s).colwise().mean();
  return out;
}

Matrix mean_pool_backward(const Matrix& dy, Index seq_len) {
  Matrix dx(dy.rows() * seq_len, dy.cols());
  const double inv = 1.0 / static_cast<double>(seq_len);
  for (Index b = 0; b < dy.rows(); ++b)
    for (Index t = 0; t < seq_len; ++t) dx.row(b * seq_len + t) = dy.row(b) * inv;
  return dx;
}

}  // namespace emoface::nn
