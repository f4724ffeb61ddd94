#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "emoface/nn/tensor.hpp"

namespace emoface::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Only trainable parameters are updated; every
/// gradient buffer is zeroed after a step.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig cfg);

  void step();
  long step_count() const { return step_; }
  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }

  /// Moments keyed by parameter name, plus the step count.
  nlohmann::json state() const;
  /// Throws DimensionError if a moment does not match its parameter.
  void load_state(const nlohmann::json& state);

 private:
  std::vector<Parameter*> params_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  AdamConfig cfg_;
  long step_ = 0;
};

/// Per-epoch learning rate. Cosine decays from `base` at epoch 0 towards
/// zero, reaching base * (1 + cos(pi * (epochs - 1) / epochs)) / 2 on the
/// last epoch, so every epoch still takes a step.
enum class LrSchedule { Constant, Cosine };

std::string to_string(LrSchedule s);
/// Throws InvalidArgument for an unknown name.
LrSchedule parse_lr_schedule(std::string_view name);
double scheduled_lr(double base, LrSchedule s, int epoch, int epochs);

}  // namespace emoface::nn
