#include "emoface/nn/adam.hpp"

#include <cmath>

#include "emoface/common/error.hpp"
#include "emoface/nn/checkpoint.hpp"

namespace emoface::nn {

Adam::Adam(std::vector<Parameter*> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (auto* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step() {
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    if (p.trainable) {
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * p.grad;
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * p.grad.cwiseAbs2();
      p.value.array() -=
          cfg_.lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + cfg_.eps);
      ++p.version;
    }
    p.zero_grad();
  }
}

nlohmann::json Adam::state() const {
  nlohmann::json s;
  s["step"] = step_;
  s["lr"] = cfg_.lr;
  s["beta1"] = cfg_.beta1;
  s["beta2"] = cfg_.beta2;
  s["eps"] = cfg_.eps;
  auto& moments = s["moments"] = nlohmann::json::array();
  for (std::size_t i = 0; i < params_.size(); ++i) {
    moments.push_back({{"name", params_[i]->name},
                       {"m", matrix_to_json(m_[i])},
                       {"v", matrix_to_json(v_[i])}});
  }
  return s;
}

void Adam::load_state(const nlohmann::json& s) {
  const auto& moments = s.at("moments");
  if (moments.size() != params_.size())
    throw DimensionError("optimizer state has " + std::to_string(moments.size()) +
                         " entries for " + std::to_string(params_.size()) + " parameters");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& e = moments[i];
    if (e.at("name").get<std::string>() != params_[i]->name)
      throw DimensionError("optimizer state order mismatch at " + params_[i]->name);
    Matrix m = matrix_from_json(e.at("m"));
    Matrix v = matrix_from_json(e.at("v"));
    if (m.rows() != params_[i]->value.rows() || m.cols() != params_[i]->value.cols() ||
        v.rows() != m.rows() || v.cols() != m.cols())
      throw DimensionError("optimizer moment shape mismatch for " + params_[i]->name);
    m_[i] = std::move(m);
    v_[i] = std::move(v);
  }
  step_ = s.at("step").get<long>();
  cfg_.lr = s.value("lr", cfg_.lr);
  cfg_.beta1 = s.value("beta1", cfg_.beta1);
  cfg_.beta2 = s.value("beta2", cfg_.beta2);
  cfg_.eps = s.value("eps", cfg_.eps);
}

std::string to_string(LrSchedule s) { return s == LrSchedule::Cosine ? "cosine" : "constant"; }

LrSchedule parse_lr_schedule(std::string_view name) {
  if (name == "constant") return LrSchedule::Constant;
  if (name == "cosine") return LrSchedule::Cosine;
  throw InvalidArgument("unknown learning-rate schedule '" + std::string(name) + "'");
}

double scheduled_lr(double base, LrSchedule s, int epoch, int epochs) {
  if (epochs <= 0 || epoch < 0 || epoch >= epochs) throw InvalidArgument("epoch outside the schedule");
  if (s == LrSchedule::Constant) return base;
  constexpr double kPi = 3.14159265358979323846;
  return base * 0.5 * (1.0 + std::cos(kPi * epoch / epochs));
}

}  // namespace emoface::nn
