#include "fd3/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "fd3/error.hpp"
#include "fd3/simd/kernels.hpp"

namespace fd3::nn {
namespace {

void gemm(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k, const float* a,
          std::size_t lda, const float* b, std::size_t ldb, float beta, float* c, std::size_t ldc) {
  simd::active().gemm_f32(ta, tb, m, n, k, 1.0f, a, lda, b, ldb, beta, c, ldc);
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw ArgumentError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " + t.shape_string());
  }
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ArgumentError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  }
}

struct ConvGeom {
  int channels, height, width, kernel, pad, out_h, out_w;
  std::size_t rows() const { return static_cast<std::size_t>(channels) * kernel * kernel; }
  std::size_t cols() const { return static_cast<std::size_t>(out_h) * out_w; }
};

void im2col(const float* x, const ConvGeom& g, float* col) {
  const std::size_t hw = g.cols();
  for (int c = 0; c < g.channels; ++c) {
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        float* dst = col + ((static_cast<std::size_t>(c) * g.kernel + ky) * g.kernel + kx) * hw;
        const int x_lo = std::max(0, g.pad - kx);
        const int x_hi = std::min(g.out_w, g.width + g.pad - kx);
        for (int y = 0; y < g.out_h; ++y) {
          float* row = dst + static_cast<std::size_t>(y) * g.out_w;
          const int sy = y + ky - g.pad;
          if (sy < 0 || sy >= g.height || x_lo >= x_hi) {
            std::memset(row, 0, sizeof(float) * g.out_w);
            continue;
          }
          const float* src = x + (static_cast<std::size_t>(c) * g.height + sy) * g.width + (kx - g.pad);
          std::fill(row, row + x_lo, 0.0f);
          std::memcpy(row + x_lo, src + x_lo, sizeof(float) * (x_hi - x_lo));
          std::fill(row + x_hi, row + g.out_w, 0.0f);
        }
      }
    }
  }
}

void col2im_add(const float* col, const ConvGeom& g, float* x) {
  const std::size_t hw = g.cols();
  for (int c = 0; c < g.channels; ++c) {
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        const float* src = col + ((static_cast<std::size_t>(c) * g.kernel + ky) * g.kernel + kx) * hw;
        const int x_lo = std::max(0, g.pad - kx);
        const int x_hi = std::min(g.out_w, g.width + g.pad - kx);
        for (int y = 0; y < g.out_h; ++y) {
          const int sy = y + ky - g.pad;
          if (sy < 0 || sy >= g.height) continue;
          float* dst = x + (static_cast<std::size_t>(c) * g.height + sy) * g.width + (kx - g.pad);
          const float* row = src + static_cast<std::size_t>(y) * g.out_w;
          for (int xx = x_lo; xx < x_hi; ++xx) dst[xx] += row[xx];
        }
      }
    }
  }
}

float sigmoid(float v) { return 1.0f / (1.0f + std::exp(-v)); }

}  // namespace

Var conv2d(const Var& x, const Var& weight, const Var& bias, int pad) {
  const Tensor& xt = x->value;
  const Tensor& wt = weight->value;
  require_rank(xt, 4, "conv2d input");
  require_rank(wt, 4, "conv2d weight");
  if (wt.dim(1) != xt.dim(1) || wt.dim(2) != wt.dim(3)) {
    throw ArgumentError("conv2d: weight " + wt.shape_string() + " incompatible with input " + xt.shape_string());
  }
  const int batch = xt.dim(0);
  const int out_ch = wt.dim(0);
  ConvGeom g{xt.dim(1), xt.dim(2), xt.dim(3), wt.dim(2), pad, 0, 0};
  g.out_h = g.height + 2 * pad - g.kernel + 1;
  g.out_w = g.width + 2 * pad - g.kernel + 1;
  if (g.out_h <= 0 || g.out_w <= 0) throw ArgumentError("conv2d: kernel larger than padded input");
  if (bias && (bias->value.rank() != 1 || bias->value.dim(0) != out_ch)) {
    throw ArgumentError("conv2d: bias shape " + bias->value.shape_string());
  }

  const bool direct = g.kernel == 1 && pad == 0;
  const std::size_t ck = g.rows();
  const std::size_t hw = g.cols();
  const std::size_t in_stride = static_cast<std::size_t>(g.channels) * g.height * g.width;
  Tensor out({batch, out_ch, g.out_h, g.out_w});
  std::vector<float> col(direct ? 0 : ck * hw);
  for (int b = 0; b < batch; ++b) {
    const float* xb = xt.data() + b * in_stride;
    const float* src = xb;
    if (!direct) {
      im2col(xb, g, col.data());
      src = col.data();
    }
    float* ob = out.data() + static_cast<std::size_t>(b) * out_ch * hw;
    gemm(false, false, out_ch, hw, ck, wt.data(), ck, src, hw, 0.0f, ob, hw);
    if (bias) {
      for (int o = 0; o < out_ch; ++o) {
        const float bv = bias->value[o];
        float* row = ob + static_cast<std::size_t>(o) * hw;
        for (std::size_t i = 0; i < hw; ++i) row[i] += bv;
      }
    }
  }

  std::vector<Var> parents{x, weight};
  if (bias) parents.push_back(bias);
  return make_result(std::move(out), std::move(parents), [g, batch, out_ch, direct](Node& self) {
    Node& xn = *self.parents[0];
    Node& wn = *self.parents[1];
    Node* bn = self.parents.size() > 2 ? self.parents[2].get() : nullptr;
    const std::size_t ck = g.rows();
    const std::size_t hw = g.cols();
    const std::size_t in_stride = static_cast<std::size_t>(g.channels) * g.height * g.width;
    std::vector<float> col(direct ? 0 : ck * hw);
    for (int b = 0; b < batch; ++b) {
      const float* dy = self.grad.data() + static_cast<std::size_t>(b) * out_ch * hw;
      const float* xb = xn.value.data() + b * in_stride;
      if (wn.requires_grad) {
        const float* src = xb;
        if (!direct) {
          im2col(xb, g, col.data());
          src = col.data();
        }
        gemm(false, true, out_ch, ck, hw, dy, hw, src, hw, 1.0f, wn.grad.data(), ck);
      }
      if (bn != nullptr && bn->requires_grad) {
        for (int o = 0; o < out_ch; ++o) {
          double acc = 0.0;
          const float* row = dy + static_cast<std::size_t>(o) * hw;
          for (std::size_t i = 0; i < hw; ++i) acc += row[i];
          bn->grad[o] += static_cast<float>(acc);
        }
      }
      if (xn.requires_grad) {
        float* dx = xn.grad.data() + b * in_stride;
        if (direct) {
          gemm(true, false, ck, hw, out_ch, wn.value.data(), ck, dy, hw, 1.0f, dx, hw);
        } else {
          gemm(true, false, ck, hw, out_ch, wn.value.data(), ck, dy, hw, 0.0f, col.data(), hw);
          col2im_add(col.data(), g, dx);
        }
      }
    }
  });
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
  const Tensor& xt = x->value;
  const Tensor& wt = weight->value;
  require_rank(xt, 2, "linear input");
  require_rank(wt, 2, "linear weight");
  if (wt.dim(1) != xt.dim(1)) {
    throw ArgumentError("linear: weight " + wt.shape_string() + " incompatible with input " + xt.shape_string());
  }
  const int batch = xt.dim(0);
  const int in = xt.dim(1);
  const int out_f = wt.dim(0);
  Tensor out({batch, out_f});
  gemm(false, true, batch, out_f, in, xt.data(), in, wt.data(), in, 0.0f, out.data(), out_f);
  if (bias) {
    for (int b = 0; b < batch; ++b)
      for (int o = 0; o < out_f; ++o) out[static_cast<std::size_t>(b) * out_f + o] += bias->value[o];
  }
  std::vector<Var> parents{x, weight};
  if (bias) parents.push_back(bias);
  return make_result(std::move(out), std::move(parents), [batch, in, out_f](Node& self) {
    Node& xn = *self.parents[0];
    Node& wn = *self.parents[1];
    Node* bn = self.parents.size() > 2 ? self.parents[2].get() : nullptr;
    const float* dy = self.grad.data();
    if (xn.requires_grad) gemm(false, false, batch, in, out_f, dy, out_f, wn.value.data(), in, 1.0f, xn.grad.data(), in);
    if (wn.requires_grad) gemm(true, false, out_f, in, batch, dy, out_f, xn.value.data(), in, 1.0f, wn.grad.data(), in);
    if (bn != nullptr && bn->requires_grad) {
      for (int b = 0; b < batch; ++b)
        for (int o = 0; o < out_f; ++o) bn->grad[o] += dy[static_cast<std::size_t>(b) * out_f + o];
    }
  });
}

Var silu(const Var& x) {
  Tensor out(x->value.shape());
  const float* src = x->value.data();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = src[i] * sigmoid(src[i]);
  return make_result(std::move(out), {x}, [](Node& self) {
    Node& xn = *self.parents[0];
    const float* src = xn.value.data();
    for (std::size_t i = 0; i < self.grad.numel(); ++i) {
      const float s = sigmoid(src[i]);
      xn.grad[i] += self.grad[i] * s * (1.0f + src[i] * (1.0f - s));
    }
  });
}

Var add(const Var& a, const Var& b) {
  require_same(a->value, b->value, "add");
  Tensor out(a->value.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a->value[i] + b->value[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    for (const Var& p : self.parents) {
      if (!p->requires_grad) continue;
      for (std::size_t i = 0; i < self.grad.numel(); ++i) p->grad[i] += self.grad[i];
    }
  });
}

Var add_channel(const Var& x, const Var& e) {
  const Tensor& xt = x->value;
  require_rank(xt, 4, "add_channel input");
  require_rank(e->value, 2, "add_channel offsets");
  if (e->value.dim(0) != xt.dim(0) || e->value.dim(1) != xt.dim(1)) {
    throw ArgumentError("add_channel: offsets " + e->value.shape_string() + " vs input " + xt.shape_string());
  }
  const std::size_t planes = static_cast<std::size_t>(xt.dim(0)) * xt.dim(1);
  const std::size_t hw = static_cast<std::size_t>(xt.dim(2)) * xt.dim(3);
  Tensor out = xt;
  for (std::size_t p = 0; p < planes; ++p) {
    const float v = e->value[p];
    float* row = out.data() + p * hw;
    for (std::size_t i = 0; i < hw; ++i) row[i] += v;
  }
  return make_result(std::move(out), {x, e}, [planes, hw](Node& self) {
    Node& xn = *self.parents[0];
    Node& en = *self.parents[1];
    if (xn.requires_grad) {
      for (std::size_t i = 0; i < self.grad.numel(); ++i) xn.grad[i] += self.grad[i];
    }
    if (en.requires_grad) {
      for (std::size_t p = 0; p < planes; ++p) {
        double acc = 0.0;
        const float* row = self.grad.data() + p * hw;
        for (std::size_t i = 0; i < hw; ++i) acc += row[i];
        en.grad[p] += static_cast<float>(acc);
      }
    }
  });
}

Var group_norm(const Var& x, const Var& gamma, const Var& beta, int groups, float eps) {
  const Tensor& xt = x->value;
  require_rank(xt, 4, "group_norm input");
  const int batch = xt.dim(0);
  const int channels = xt.dim(1);
  if (groups < 1 || channels % groups != 0) {
    throw ArgumentError("group_norm: " + std::to_string(channels) + " channels not divisible into " +
                        std::to_string(groups) + " groups");
  }
  if (gamma->value.numel() != static_cast<std::size_t>(channels) ||
      beta->value.numel() != static_cast<std::size_t>(channels)) {
    throw ArgumentError("group_norm: affine parameters must have " + std::to_string(channels) + " entries");
  }
  const std::size_t hw = static_cast<std::size_t>(xt.dim(2)) * xt.dim(3);
  const int per_group = channels / groups;
  const std::size_t group_len = per_group * hw;

  std::vector<float> mean(static_cast<std::size_t>(batch) * groups);
  std::vector<float> rstd(mean.size());
  Tensor out(xt.shape());
  for (int b = 0; b < batch; ++b) {
    for (int g = 0; g < groups; ++g) {
      const std::size_t gi = static_cast<std::size_t>(b) * groups + g;
      const float* src = xt.data() + gi * group_len;
      double s = 0.0;
      double s2 = 0.0;
      for (std::size_t i = 0; i < group_len; ++i) {
        s += src[i];
        s2 += static_cast<double>(src[i]) * src[i];
      }
      const double m = s / group_len;
      const double var = std::max(0.0, s2 / group_len - m * m);
      mean[gi] = static_cast<float>(m);
      rstd[gi] = static_cast<float>(1.0 / std::sqrt(var + eps));
      float* dst = out.data() + gi * group_len;
      for (int c = 0; c < per_group; ++c) {
        const int ch = g * per_group + c;
        const float ga = gamma->value[ch];
        const float be = beta->value[ch];
        for (std::size_t i = 0; i < hw; ++i) {
          const std::size_t j = c * hw + i;
          dst[j] = (src[j] - mean[gi]) * rstd[gi] * ga + be;
        }
      }
    }
  }
  return make_result(std::move(out), {x, gamma, beta},
                     [batch, groups, per_group, hw, mean = std::move(mean), rstd = std::move(rstd)](Node& self) {
    Node& xn = *self.parents[0];
    Node& gn = *self.parents[1];
    Node& bn = *self.parents[2];
    const std::size_t group_len = per_group * hw;
    for (int b = 0; b < batch; ++b) {
      for (int g = 0; g < groups; ++g) {
        const std::size_t gi = static_cast<std::size_t>(b) * groups + g;
        const float* src = xn.value.data() + gi * group_len;
        const float* dy = self.grad.data() + gi * group_len;
        const float m = mean[gi];
        const float r = rstd[gi];
        double sum_dxhat = 0.0;
        double sum_dxhat_xhat = 0.0;
        for (int c = 0; c < per_group; ++c) {
          const int ch = g * per_group + c;
          const float ga = gn.value[ch];
          double dga = 0.0;
          double dbe = 0.0;
          for (std::size_t i = 0; i < hw; ++i) {
            const std::size_t j = c * hw + i;
            const float xhat = (src[j] - m) * r;
            dga += static_cast<double>(dy[j]) * xhat;
            dbe += dy[j];
            const double dxhat = static_cast<double>(dy[j]) * ga;
            sum_dxhat += dxhat;
            sum_dxhat_xhat += dxhat * xhat;
          }
          if (gn.requires_grad) gn.grad[ch] += static_cast<float>(dga);
          if (bn.requires_grad) bn.grad[ch] += static_cast<float>(dbe);
        }
        if (!xn.requires_grad) continue;
        const double mean_dxhat = sum_dxhat / group_len;
        const double mean_dxhat_xhat = sum_dxhat_xhat / group_len;
        float* dx = xn.grad.data() + gi * group_len;
        for (int c = 0; c < per_group; ++c) {
          const float ga = gn.value[g * per_group + c];
          for (std::size_t i = 0; i < hw; ++i) {
            const std::size_t j = c * hw + i;
            const double xhat = (src[j] - m) * r;
            const double dxhat = static_cast<double>(dy[j]) * ga;
            dx[j] += static_cast<float>(r * (dxhat - mean_dxhat - xhat * mean_dxhat_xhat));
          }
        }
      }
    }
  });
}

Var avg_pool2(const Var& x) {
  const Tensor& xt = x->value;
  require_rank(xt, 4, "avg_pool2");
  const int h = xt.dim(2);
  const int w = xt.dim(3);
  if (h % 2 != 0 || w % 2 != 0) throw ArgumentError("avg_pool2: spatial size must be even, got " + xt.shape_string());
  const std::size_t planes = static_cast<std::size_t>(xt.dim(0)) * xt.dim(1);
  Tensor out({xt.dim(0), xt.dim(1), h / 2, w / 2});
  for (std::size_t p = 0; p < planes; ++p) {
    const float* src = xt.data() + p * h * w;
    float* dst = out.data() + p * (h / 2) * (w / 2);
    for (int y = 0; y < h / 2; ++y)
      for (int xx = 0; xx < w / 2; ++xx) {
        const float* s = src + (2 * y) * w + 2 * xx;
        dst[y * (w / 2) + xx] = 0.25f * (s[0] + s[1] + s[w] + s[w + 1]);
      }
  }
  return make_result(std::move(out), {x}, [planes, h, w](Node& self) {
    Node& xn = *self.parents[0];
    for (std::size_t p = 0; p < planes; ++p) {
      const float* dy = self.grad.data() + p * (h / 2) * (w / 2);
      float* dx = xn.grad.data() + p * h * w;
      for (int y = 0; y < h / 2; ++y)
        for (int xx = 0; xx < w / 2; ++xx) {
          const float g = 0.25f * dy[y * (w / 2) + xx];
          float* d = dx + (2 * y) * w + 2 * xx;
          d[0] += g;
          d[1] += g;
          d[w] += g;
          d[w + 1] += g;
        }
    }
  });
}

Var upsample_nearest2(const Var& x) {
  const Tensor& xt = x->value;
  require_rank(xt, 4, "upsample_nearest2");
  const int h = xt.dim(2);
  const int w = xt.dim(3);
  const std::size_t planes = static_cast<std::size_t>(xt.dim(0)) * xt.dim(1);
  Tensor out({xt.dim(0), xt.dim(1), 2 * h, 2 * w});
  for (std::size_t p = 0; p < planes; ++p) {
    const float* src = xt.data() + p * h * w;
    float* dst = out.data() + p * 4 * h * w;
    for (int y = 0; y < 2 * h; ++y)
      for (int xx = 0; xx < 2 * w; ++xx) dst[y * 2 * w + xx] = src[(y / 2) * w + xx / 2];
  }
  return make_result(std::move(out), {x}, [planes, h, w](Node& self) {
    Node& xn = *self.parents[0];
    for (std::size_t p = 0; p < planes; ++p) {
      const float* dy = self.grad.data() + p * 4 * h * w;
      float* dx = xn.grad.data() + p * h * w;
      for (int y = 0; y < 2 * h; ++y)
        for (int xx = 0; xx < 2 * w; ++xx) dx[(y / 2) * w + xx / 2] += dy[y * 2 * w + xx];
    }
  });
}

Var concat_channels(const Var& a, const Var& b) {
  const Tensor& at = a->value;
  const Tensor& bt = b->value;
  require_rank(at, 4, "concat_channels");
  require_rank(bt, 4, "concat_channels");
  if (at.dim(0) != bt.dim(0) || at.dim(2) != bt.dim(2) || at.dim(3) != bt.dim(3)) {
    throw ArgumentError("concat_channels: " + at.shape_string() + " vs " + bt.shape_string());
  }
  const int batch = at.dim(0);
  const std::size_t a_len = static_cast<std::size_t>(at.dim(1)) * at.dim(2) * at.dim(3);
  const std::size_t b_len = static_cast<std::size_t>(bt.dim(1)) * bt.dim(2) * bt.dim(3);
  Tensor out({batch, at.dim(1) + bt.dim(1), at.dim(2), at.dim(3)});
  for (int n = 0; n < batch; ++n) {
    float* dst = out.data() + n * (a_len + b_len);
    std::memcpy(dst, at.data() + n * a_len, sizeof(float) * a_len);
    std::memcpy(dst + a_len, bt.data() + n * b_len, sizeof(float) * b_len);
  }
  return make_result(std::move(out), {a, b}, [batch, a_len, b_len](Node& self) {
    Node& an = *self.parents[0];
    Node& bn = *self.parents[1];
    for (int n = 0; n < batch; ++n) {
      const float* dy = self.grad.data() + n * (a_len + b_len);
      if (an.requires_grad) {
        float* d = an.grad.data() + n * a_len;
        for (std::size_t i = 0; i < a_len; ++i) d[i] += dy[i];
      }
      if (bn.requires_grad) {
        float* d = bn.grad.data() + n * b_len;
        for (std::size_t i = 0; i < b_len; ++i) d[i] += dy[a_len + i];
      }
    }
  });
}

Var attention(const Var& q, const Var& k, const Var& v) {
  require_rank(q->value, 4, "attention");
  require_same(q->value, k->value, "attention");
  require_same(q->value, v->value, "attention");
  const int batch = q->value.dim(0);
  const int channels = q->value.dim(1);
  const std::size_t n = static_cast<std::size_t>(q->value.dim(2)) * q->value.dim(3);
  const float scale = 1.0f / std::sqrt(static_cast<float>(channels));
  const std::size_t cn = channels * n;

  std::vector<float> probs(static_cast<std::size_t>(batch) * n * n);
  Tensor out(q->value.shape());
  for (int b = 0; b < batch; ++b) {
    const float* qb = q->value.data() + b * cn;
    const float* kb = k->value.data() + b * cn;
    const float* vb = v->value.data() + b * cn;
    float* p = probs.data() + b * n * n;
    // scores[i, j] = q[:, i] . k[:, j]
    gemm(true, false, n, n, channels, qb, n, kb, n, 0.0f, p, n);
    for (std::size_t i = 0; i < n; ++i) {
      float* row = p + i * n;
      float mx = row[0] * scale;
      for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, row[j] * scale);
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        row[j] = std::exp(row[j] * scale - mx);
        sum += row[j];
      }
      const float inv = static_cast<float>(1.0 / sum);
      for (std::size_t j = 0; j < n; ++j) row[j] *= inv;
    }
    // out[:, i] = sum_j v[:, j] p[i, j]
    gemm(false, true, channels, n, n, vb, n, p, n, 0.0f, out.data() + b * cn, n);
  }
  return make_result(std::move(out), {q, k, v},
                     [batch, channels, n, scale, cn, probs = std::move(probs)](Node& self) {
    Node& qn = *self.parents[0];
    Node& kn = *self.parents[1];
    Node& vn = *self.parents[2];
    std::vector<float> dp(n * n);
    for (int b = 0; b < batch; ++b) {
      const float* dout = self.grad.data() + b * cn;
      const float* p = probs.data() + b * n * n;
      const float* qb = qn.value.data() + b * cn;
      const float* kb = kn.value.data() + b * cn;
      const float* vb = vn.value.data() + b * cn;
      if (vn.requires_grad) gemm(false, false, channels, n, n, dout, n, p, n, 1.0f, vn.grad.data() + b * cn, n);
      // dP[i, j] = dout[:, i] . v[:, j]
      gemm(true, false, n, n, channels, dout, n, vb, n, 0.0f, dp.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        float* drow = dp.data() + i * n;
        const float* prow = p + i * n;
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += static_cast<double>(drow[j]) * prow[j];
        for (std::size_t j = 0; j < n; ++j) drow[j] = scale * prow[j] * (drow[j] - static_cast<float>(dot));
      }
      // dq[:, i] = sum_j k[:, j] dS[i, j];  dk[:, j] = sum_i q[:, i] dS[i, j]
      if (qn.requires_grad) gemm(false, true, channels, n, n, kb, n, dp.data(), n, 1.0f, qn.grad.data() + b * cn, n);
      if (kn.requires_grad) gemm(false, false, channels, n, n, qb, n, dp.data(), n, 1.0f, kn.grad.data() + b * cn, n);
    }
  });
}

Var mse_loss(const Var& pred, const Tensor& target) {
  require_same(pred->value, target, "mse_loss");
  const std::size_t count = target.numel();
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double d = static_cast<double>(pred->value[i]) - target[i];
    acc += d * d;
  }
  Tensor out({1});
  out[0] = static_cast<float>(acc / count);
  return make_result(std::move(out), {pred}, [target, count](Node& self) {
    Node& pn = *self.parents[0];
    const float g = self.grad[0] * 2.0f / static_cast<float>(count);
    for (std::size_t i = 0; i < count; ++i) pn.grad[i] += g * (pn.value[i] - target[i]);
  });
}

Tensor sinusoidal_embedding(std::span<const double> t, int dim) {
  if (dim < 2 || dim % 2 != 0) throw ArgumentError("sinusoidal_embedding: dim must be even and >= 2");
  const int half = dim / 2;
  Tensor out({static_cast<int>(t.size()), dim});
  for (std::size_t b = 0; b < t.size(); ++b) {
    const double scaled = t[b] * 1000.0;
    for (int i = 0; i < half; ++i) {
      const double freq = std::exp(-std::log(10000.0) * i / half);
      out[b * dim + i] = static_cast<float>(std::cos(scaled * freq));
      out[b * dim + half + i] = static_cast<float>(std::sin(scaled * freq));
    }
  }
  return out;
}

}  // namespace fd3::nn
