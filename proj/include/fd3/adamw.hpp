#pragma once

#include <vector>

#include "fd3/nn/autograd.hpp"

namespace fd3 {

struct AdamWConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// Adam with decoupled weight decay: p <- p - lr * (wd * p + m_hat / (sqrt(v_hat) + eps)).
class AdamW {
 public:
  AdamW(std::vector<nn::Var> params, AdamWConfig cfg);

  // Applies one update from the accumulated grads. Parameters without a
  // grad are skipped.
  void step();
  long long steps() const { return steps_; }
  const AdamWConfig& config() const { return cfg_; }

 private:
  std::vector<nn::Var> params_;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
  AdamWConfig cfg_;
  long long steps_ = 0;
};

}  // namespace fd3
