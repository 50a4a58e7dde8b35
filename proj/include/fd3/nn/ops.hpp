#pragma once

#include <span>

#include "fd3/nn/autograd.hpp"

namespace fd3::nn {

// 2-D convolution, stride 1, zero padding `pad`. x: [B,C,H,W],
// weight: [O,C,K,K], bias: [O] or null. Output [B,O,H+2p-K+1,W+2p-K+1].
Var conv2d(const Var& x, const Var& weight, const Var& bias, int pad);

// x: [B,I], weight: [O,I], bias: [O] or null. Output [B,O].
Var linear(const Var& x, const Var& weight, const Var& bias);

Var silu(const Var& x);
Var add(const Var& a, const Var& b);

// x: [B,C,H,W] plus per-sample channel offsets e: [B,C].
Var add_channel(const Var& x, const Var& e);

// x: [B,C,H,W] normalised over groups of C/groups channels; affine per channel.
Var group_norm(const Var& x, const Var& gamma, const Var& beta, int groups, float eps = 1e-5f);

Var avg_pool2(const Var& x);
Var upsample_nearest2(const Var& x);
Var concat_channels(const Var& a, const Var& b);

// Single-head softmax attention over spatial positions. q, k, v: [B,C,H,W];
// out[:, :, i] = sum_j softmax_j(q_i . k_j / sqrt(C)) v_j.
Var attention(const Var& q, const Var& k, const Var& v);

// Mean squared error over every element; returns a one-element tensor.
Var mse_loss(const Var& pred, const Tensor& target);

// Sinusoidal features of t * 1000: [cos(w_i t'), sin(w_i t')] with
// w_i = 10000^(-i / (dim/2)). dim must be even.
Tensor sinusoidal_embedding(std::span<const double> t, int dim);

}  // namespace fd3::nn
