#include "emoface/nn/attention.hpp"

#include <cmath>

#include "emoface/common/error.hpp"

namespace emoface::nn {

MultiHeadAttention::MultiHeadAttention(std::string name, Index model_dim, Index heads, Rng& rng)
    : name_(std::move(name)),
      model_dim_(model_dim),
      heads_(heads),
      wq_(name_ + ".q", model_dim, model_dim, rng),
      wk_(name_ + ".k", model_dim, model_dim, rng),
      wv_(name_ + ".v", model_dim, model_dim, rng),
      wo_(name_ + ".o", model_dim, model_dim, rng) {
  if (heads <= 0 || model_dim % heads != 0)
    throw InvalidArgument(name_ + ": model_dim must be divisible by heads");
}

Matrix MultiHeadAttention::forward(const Matrix& query, const Matrix& memory, Index batch,
                                   Cache& cache) const {
  if (batch <= 0 || query.rows() % batch != 0 || memory.rows() % batch != 0)
    throw DimensionError(name_ + ": rows are not a multiple of the batch size");
  const Index sq = query.rows() / batch;
  const Index sk = memory.rows() / batch;
  const Index dh = model_dim_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  cache.batch = batch;
  cache.query_len = sq;
  cache.memory_len = sk;
  cache.queries = wq_.forward(query, cache.q);
  cache.keys = wk_.forward(memory, cache.k);
  cache.values = wv_.forward(memory, cache.v);
  cache.probs.assign(static_cast<std::size_t>(batch * heads_), Matrix());
  cache.context.resize(query.rows(), model_dim_);

  for (Index b = 0; b < batch; ++b) {
    for (Index h = 0; h < heads_; ++h) {
      auto qh = cache.queries.block(b * sq, h * dh, sq, dh);
      auto kh = cache.keys.block(b * sk, h * dh, sk, dh);
      auto vh = cache.values.block(b * sk, h * dh, sk, dh);
      Matrix& p = cache.probs[static_cast<std::size_t>(b * heads_ + h)];
      p = softmax_rows((qh * kh.transpose()) * scale);
      cache.context.block(b * sq, h * dh, sq, dh).noalias() = p * vh;
    }
  }
  return wo_.forward(cache.context, cache.o);
}

MultiHeadAttention::Gradients MultiHeadAttention::backward(const Cache& cache, const Matrix& dy) {
  const Index batch = cache.batch, sq = cache.query_len, sk = cache.memory_len;
  const Index dh = model_dim_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  if (cache.probs.size() != static_cast<std::size_t>(batch * heads_))
    throw InvalidArgument(name_ + ": backward with a mismatched cache");

  Matrix dcontext = wo_.backward(cache.o, dy);
  Matrix dq = Matrix::Zero(cache.queries.rows(), model_dim_);
  Matrix dk = Matrix::Zero(cache.keys.rows(), model_dim_);
  Matrix dv = Matrix::Zero(cache.values.rows(), model_dim_);

  for (Index b = 0; b < batch; ++b) {
    for (Index h = 0; h < heads_; ++h) {
      const Matrix& p = cache.probs[static_cast<std::size_t>(b * heads_ + h)];
      auto qh = cache.queries.block(b * sq, h * dh, sq, dh);
      auto kh = cache.keys.block(b * sk, h * dh, sk, dh);
      auto vh = cache.values.block(b * sk, h * dh, sk, dh);
      auto dctx = dcontext.block(b * sq, h * dh, sq, dh);
      Matrix dp = dctx * vh.transpose();
      dv.block(b * sk, h * dh, sk, dh).noalias() += p.transpose() * dctx;
      Matrix ds = softmax_rows_backward(p, dp) * scale;
      dq.block(b * sq, h * dh, sq, dh).noalias() += ds * kh;
      dk.block(b * sk, h * dh, sk, dh).noalias() += ds.transpose() * qh;
    }
  }
  Gradients g;
  g.query = wq_.backward(cache.q, dq);
  g.memory = wk_.backward(cache.k, dk) + wv_.backward(cache.v, dv);
  return g;
}

void MultiHeadAttention::collect_parameters(std::vector<Parameter*>& out) {
  wq_.collect_parameters(out);
  wk_.collect_parameters(out);
  wv_.collect_parameters(out);
  wo_.collect_parameters(out);
}

}  // namespace emoface::nn
