#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "fd3/nn/tensor.hpp"

namespace fd3::nn {

struct Node;
using Var = std::shared_ptr<Node>;

// A value in the computation graph. Parameters are leaves with
// requires_grad set; op results record their parents and a backward rule
// that reads `grad` and accumulates into the parents' grads.
struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<Var> parents;
  std::function<void(Node&)> backward_fn;

  Tensor& ensure_grad();
};

Var constant(Tensor value);
Var parameter(Tensor value);

// Graph recording is on by default; NoGradGuard disables it for its scope.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Builds an op result; the backward rule is kept only when recording and some
// parent needs a gradient.
Var make_result(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward_fn);

// Seeds d(root)/d(root) = 1 (root must hold one element) and runs every
// recorded backward rule in reverse topological order.
void backward(const Var& root);

}  // namespace fd3::nn
