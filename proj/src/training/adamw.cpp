#include "fd3/adamw.hpp"

#include <cmath>

#include "fd3/error.hpp"

namespace fd3 {

AdamW::AdamW(std::vector<nn::Var> params, AdamWConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  if (!(cfg.learning_rate > 0.0)) throw ArgumentError("AdamW: learning_rate must be > 0");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    throw ArgumentError("AdamW: betas must lie in [0, 1)");
  }
  if (!(cfg.eps > 0.0)) throw ArgumentError("AdamW: eps must be > 0");
  if (!(cfg.weight_decay >= 0.0)) throw ArgumentError("AdamW: weight_decay must be >= 0");
  for (const auto& p : params_) {
    m_.emplace_back(p->value.numel(), 0.0f);
    v_.emplace_back(p->value.numel(), 0.0f);
  }
}

void AdamW::step() {
  ++steps_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
  const float b1 = static_cast<float>(cfg_.beta1);
  const float b2 = static_cast<float>(cfg_.beta2);
  const float step_size = static_cast<float>(cfg_.learning_rate / bc1);
  const float inv_sqrt_bc2 = static_cast<float>(1.0 / std::sqrt(bc2));
  const float decay = static_cast<float>(1.0 - cfg_.learning_rate * cfg_.weight_decay);
  const float eps = static_cast<float>(cfg_.eps);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    nn::Node& p = *params_[i];
    if (p.grad.numel() != p.value.numel()) continue;
    float* w = p.value.data();
    const float* g = p.grad.data();
    float* m = m_[i].data();
    float* v = v_[i].data();
    for (std::size_t j = 0; j < p.value.numel(); ++j) {
      m[j] = b1 * m[j] + (1.0f - b1) * g[j];
      v[j] = b2 * v[j] + (1.0f - b2) * g[j] * g[j];
      w[j] = w[j] * decay - step_size * m[j] / (std::sqrt(v[j]) * inv_sqrt_bc2 + eps);
    }
  }
}

}  // namespace fd3
