#include "emoface/nn/layers.hpp"

#include <cmath>

#include "emoface/common/error.hpp"

namespace emoface::nn {

void check_cache(const CacheTag& tag, const void* owner, std::uint64_t version,
                 std::string_view layer) {
  if (tag.owner != owner)
    throw InvalidArgument(std::string(layer) + ": backward with a cache from another forward");
  if (tag.version != version)
    throw InvalidArgument(std::string(layer) + ": stale cache (parameters changed since forward)");
}

// --- Linear ---------------------------------------------------------------

Linear::Linear(std::string name, Index in, Index out, Rng& rng)
    : name_(std::move(name)),
      weight_(name_ + ".weight", glorot_uniform(in, out, rng)),
      bias_(name_ + ".bias", Matrix::Zero(1, out)) {}

Matrix Linear::forward(const Matrix& x, Cache& cache) const {
  require_cols(x, in_features(), name_);
  require_finite(x, name_ + " input");
  cache.tag = {this, weight_.version};
  cache.input = x;
  Matrix y = x * weight_.value;
  y.rowwise() += bias_.value.row(0);
  return y;
}

Matrix Linear::backward(const Cache& cache, const Matrix& dy) {
  check_cache(cache.tag, this, weight_.version, name_);
  if (dy.rows() != cache.input.rows() || dy.cols() != out_features())
    throw DimensionError(name_ + ": upstream gradient shape mismatch");
  if (weight_.trainable) weight_.grad.noalias() += cache.input.transpose() * dy;
  if (bias_.trainable) bias_.grad += dy.colwise().sum();
  return dy * weight_.value.transpose();
}

void Linear::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// --- LayerNorm --------------------------------------------------------------

LayerNorm::LayerNorm(std::string name, Index features, double eps)
    : name_(std::move(name)),
      eps_(eps),
      gain_(name_ + ".gain", Matrix::Ones(1, features)),
      shift_(name_ + ".shift", Matrix::Zero(1, features)) {}

Matrix LayerNorm::forward(const Matrix& x, Cache& cache) const {
  require_cols(x, gain_.value.cols(), name_);
  const Index n = x.cols();
  cache.tag = {this, gain_.version};
  cache.normalized.resize(x.rows(), n);
  cache.inv_std.resize(x.rows());
  for (Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().sum() / static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps_);
    cache.inv_std(r) = inv;
    cache.normalized.row(r) = (x.row(r).array() - mean) * inv;
  }
  Matrix y = cache.normalized.array().rowwise() * gain_.value.row(0).array();
  y.rowwise() += shift_.value.row(0);
  return y;
}

Matrix LayerNorm::backward(const Cache& cache, const Matrix& dy) {
  check_cache(cache.tag, this, gain_.version, name_);
  if (dy.rows() != cache.normalized.rows() || dy.cols() != cache.normalized.cols())
    throw DimensionError(name_ + ": upstream gradient shape mismatch");
  if (gain_.trainable) gain_.grad += (dy.array() * cache.normalized.array()).colwise().sum().matrix();
  if (shift_.trainable) shift_.grad += dy.colwise().sum();
  const double n = static_cast<double>(dy.cols());
  Matrix dxhat = dy.array().rowwise() * gain_.value.row(0).array();
  Matrix dx(dy.rows(), dy.cols());
  for (Index r = 0; r < dy.rows(); ++r) {
    const double sum_d = dxhat.row(r).sum();
    const double sum_dx = dxhat.row(r).dot(cache.normalized.row(r));
    dx.row(r) = (cache.inv_std(r) / n) *
                (n * dxhat.row(r).array() - sum_d - cache.normalized.row(r).array() * sum_dx);
  }
  return dx;
}

void LayerNorm::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&gain_);
  out.push_back(&shift_);
}

// --- activations ------------------------------------------------------------

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Matrix gelu(const Matrix& x) {
  return x.unaryExpr([](double v) {
    return 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  });
}

Matrix gelu_backward(const Matrix& x, const Matrix& dy) {
  Matrix d = x.unaryExpr([](double v) {
    const double u = kGeluC * (v + kGeluA * v * v * v);
    const double t = std::tanh(u);
    const double du = kGeluC * (1.0 + 3.0 * kGeluA * v * v);
    return 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * du;
  });
  return d.cwiseProduct(dy);
}

Matrix sigmoid(const Matrix& x) {
  return x.unaryExpr([](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

Matrix sigmoid_backward_from_output(const Matrix& y, const Matrix& dy) {
  return (y.array() * (1.0 - y.array()) * dy.array()).matrix();
}

Matrix softmax_rows(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    y.row(r) = (x.row(r).array() - m).exp();
    y.row(r) /= y.row(r).sum();
  }
  return y;
}

Matrix softmax_rows_backward(const Matrix& y, const Matrix& dy) {
  Matrix dx(y.rows(), y.cols());
  for (Index r = 0; r < y.rows(); ++r) {
    const double dot = y.row(r).dot(dy.row(r));
    dx.row(r) = y.row(r).array() * (dy.row(r).array() - dot);
  }
  return dx;
}

// --- FeedForward ------------------------------------------------------------

FeedForward::FeedForward(std::string name, Index features, Index hidden, Rng& rng)
    : in_(name + ".in", features, hidden, rng), out_(name + ".out", hidden, features, rng) {}

Matrix FeedForward::forward(const Matrix& x, Cache& cache) const {
  cache.hidden_pre = in_.forward(x, cache.in);
  return out_.forward(gelu(cache.hidden_pre), cache.out);
}

Matrix FeedForward::backward(const Cache& cache, const Matrix& dy) {
  Matrix dh = out_.backward(cache.out, dy);
  return in_.backward(cache.in, gelu_backward(cache.hidden_pre, dh));
}

void FeedForward::collect_parameters(std::vector<Parameter*>& out) {
  in_.collect_parameters(out);
  out_.collect_parameters(out);
}

}  // namespace emoface::nn
