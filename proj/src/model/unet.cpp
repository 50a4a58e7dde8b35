#include "fd3/unet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fd3/error.hpp"
#include "fd3/nn/ops.hpp"
#include "fd3/random.hpp"

namespace fd3 {

using nn::Tensor;
using nn::Var;

std::map<std::string, std::string> UNetConfig::to_map() const {
  std::string mult;
  for (std::size_t i = 0; i < channel_mult.size(); ++i) {
    if (i) mult += ",";
    mult += std::to_string(channel_mult[i]);
  }
  return {{"base_channels", std::to_string(base_channels)},
          {"channel_mult", mult},
          {"time_embed_dim", std::to_string(time_embed_dim)},
          {"groups", std::to_string(groups)},
          {"attention", attention ? "1" : "0"}};
}

UNetConfig UNetConfig::from_map(const std::map<std::string, std::string>& kv) {
  UNetConfig cfg;
  const auto get = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw DecodeError(std::string("architecture config is missing '") + key + "'");
    return it->second;
  };
  try {
    cfg.base_channels = std::stoi(get("base_channels"));
    cfg.time_embed_dim = std::stoi(get("time_embed_dim"));
    cfg.groups = std::stoi(get("groups"));
    cfg.attention = get("attention") == "1";
    cfg.channel_mult.clear();
    std::stringstream ss(get("channel_mult"));
    std::string item;
    while (std::getline(ss, item, ',')) cfg.channel_mult.push_back(std::stoi(item));
  } catch (const std::logic_error&) {
    throw DecodeError("architecture config holds a malformed integer");
  }
  validate(cfg);
  return cfg;
}

void validate(const UNetConfig& cfg) {
  if (cfg.base_channels < 1) throw ArgumentError("model.base_channels must be >= 1");
  if (cfg.channel_mult.empty()) throw ArgumentError("model.channel_mult must list at least one level");
  if (cfg.time_embed_dim < 2 || cfg.time_embed_dim % 2 != 0) {
    throw ArgumentError("model.time_embed_dim must be even and >= 2");
  }
  for (int m : cfg.channel_mult) {
    if (m < 1) throw ArgumentError("model.channel_mult entries must be >= 1");
    const int ch = m * cfg.base_channels;
    if (cfg.groups < 1 || ch % cfg.groups != 0 || (2 * ch) % cfg.groups != 0) {
      throw ArgumentError("model.groups must divide every level width");
    }
  }
}

namespace {

// Creates named, seeded parameters in a fixed order.
class ParamFactory {
 public:
  ParamFactory(std::vector<NamedParameter>& out, std::uint64_t seed) : out_(out), rng_(seed) {}

  Var uniform(const std::string& name, std::vector<int> shape, float bound) {
    Tensor t(std::move(shape));
    std::uniform_real_distribution<float> dist(-bound, bound);
    for (float& v : t.values()) v = dist(rng_);
    return add(name, std::move(t));
  }

  Var filled(const std::string& name, std::vector<int> shape, float value) {
    return add(name, Tensor(std::move(shape), value));
  }

 private:
  Var add(const std::string& name, Tensor t) {
    Var v = nn::parameter(std::move(t));
    out_.push_back({name, v});
    return v;
  }

  std::vector<NamedParameter>& out_;
  Rng rng_;
};

struct Conv {
  Var weight;
  Var bias;
  int pad = 0;

  Conv() = default;
  Conv(ParamFactory& f, const std::string& name, int in, int out, int kernel, bool zero = false)
      : pad(kernel / 2) {
    const float bound = 1.0f / std::sqrt(static_cast<float>(in * kernel * kernel));
    weight = zero ? f.filled(name + ".weight", {out, in, kernel, kernel}, 0.0f)
                  : f.uniform(name + ".weight", {out, in, kernel, kernel}, bound);
    bias = zero ? f.filled(name + ".bias", {out}, 0.0f) : f.uniform(name + ".bias", {out}, bound);
  }

  Var operator()(const Var& x) const { return nn::conv2d(x, weight, bias, pad); }
};

struct Linear {
  Var weight;
  Var bias;

  Linear() = default;
  Linear(ParamFactory& f, const std::string& name, int in, int out) {
    const float bound = 1.0f / std::sqrt(static_cast<float>(in));
    weight = f.uniform(name + ".weight", {out, in}, bound);
    bias = f.uniform(name + ".bias", {out}, bound);
  }

  Var operator()(const Var& x) const { return nn::linear(x, weight, bias); }
};

struct GroupNorm {
  Var gamma;
  Var beta;
  int groups = 1;

  GroupNorm() = default;
  GroupNorm(ParamFactory& f, const std::string& name, int channels, int g) : groups(g) {
    gamma = f.filled(name + ".gamma", {channels}, 1.0f);
    beta = f.filled(name + ".beta", {channels}, 0.0f);
  }

  Var operator()(const Var& x) const { return nn::group_norm(x, gamma, beta, groups); }
};

struct ResBlock {
  GroupNorm norm1;
  Conv conv1;
  Linear time_proj;
  GroupNorm norm2;
  Conv conv2;
  bool has_skip = false;
  Conv skip;

  ResBlock(ParamFactory& f, const std::string& name, int in, int out, int time_dim, int groups)
      : norm1(f, name + ".norm1", in, groups),
        conv1(f, name + ".conv1", in, out, 3),
        time_proj(f, name + ".time_proj", time_dim, out),
        norm2(f, name + ".norm2", out, groups),
        conv2(f, name + ".conv2", out, out, 3, /*zero=*/true),
        has_skip(in != out) {
    if (has_skip) skip = Conv(f, name + ".skip", in, out, 1);
  }

  Var operator()(const Var& x, const Var& emb) const {
    Var h = conv1(nn::silu(norm1(x)));
    h = nn::add_channel(h, time_proj(nn::silu(emb)));
    h = conv2(nn::silu(norm2(h)));
    return nn::add(has_skip ? skip(x) : x, h);
  }
};

struct AttnBlock {
  GroupNorm norm;
  Conv q, k, v, proj;

  AttnBlock(ParamFactory& f, const std::string& name, int ch, int groups)
      : norm(f, name + ".norm", ch, groups),
        q(f, name + ".q", ch, ch, 1),
        k(f, name + ".k", ch, ch, 1),
        v(f, name + ".v", ch, ch, 1),
        proj(f, name + ".proj", ch, ch, 1, /*zero=*/true) {}

  Var operator()(const Var& x) const {
    const Var h = norm(x);
    return nn::add(x, proj(nn::attention(q(h), k(h), v(h))));
  }
};

}  // namespace

struct UNet::Impl {
  int sin_dim = 0;
  Linear time1;
  Linear time2;
  Conv conv_in;
  std::vector<ResBlock> down;
  std::vector<AttnBlock> down_attn;  // coarsest level only
  std::vector<ResBlock> mid;
  std::vector<ResBlock> up;           // index = level
  std::vector<AttnBlock> up_attn;
  std::vector<Conv> up_conv;          // index = level - 1
  GroupNorm norm_out;
  Conv conv_out;
};

UNet::UNet(UNetConfig cfg, std::uint64_t init_seed) : cfg_(std::move(cfg)), impl_(std::make_unique<Impl>()) {
  validate(cfg_);
  ParamFactory f(params_, init_seed);
  Impl& m = *impl_;
  const int levels = cfg_.levels();
  const int base = cfg_.base_channels;
  const int tdim = cfg_.time_embed_dim;
  const int groups = cfg_.groups;
  const auto width = [&](int level) { return base * cfg_.channel_mult[level]; };

  m.sin_dim = std::max(2, base - base % 2);
  m.time1 = Linear(f, "time.fc1", m.sin_dim, tdim);
  m.time2 = Linear(f, "time.fc2", tdim, tdim);
  m.conv_in = Conv(f, "conv_in", Image::kChannels, base, 3);

  int prev = base;
  for (int l = 0; l < levels; ++l) {
    m.down.emplace_back(f, "down" + std::to_string(l), prev, width(l), tdim, groups);
    prev = width(l);
  }
  if (cfg_.attention) m.down_attn.emplace_back(f, "down_attn", prev, groups);
  m.mid.emplace_back(f, "mid", prev, prev, tdim, groups);

  m.up.reserve(levels);
  for (int l = 0; l < levels; ++l) {
    m.up.emplace_back(f, "up" + std::to_string(l), 2 * width(l), width(l), tdim, groups);
  }
  if (cfg_.attention) m.up_attn.emplace_back(f, "up_attn", width(levels - 1), groups);
  for (int l = 1; l < levels; ++l) {
    m.up_conv.emplace_back(f, "upsample" + std::to_string(l), width(l), width(l - 1), 3);
  }
  m.norm_out = GroupNorm(f, "norm_out", base, groups);
  m.conv_out = Conv(f, "conv_out", base, Image::kChannels, 3, /*zero=*/true);
}

UNet::~UNet() = default;

std::size_t UNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.var->value.numel();
  return n;
}

void UNet::zero_grad() {
  for (auto& p : params_) p.var->ensure_grad().fill(0.0f);
}

Var UNet::forward(const Var& x, std::span<const double> t) const {
  const Tensor& xt = x->value;
  if (xt.rank() != 4 || xt.dim(1) != Image::kChannels) {
    throw ArgumentError("UNet: expected input [B,3,H,W], got " + xt.shape_string());
  }
  if (static_cast<std::size_t>(xt.dim(0)) != t.size()) {
    throw ArgumentError("UNet: batch of " + std::to_string(xt.dim(0)) + " images but " +
                        std::to_string(t.size()) + " time values");
  }
  const int mult = size_multiple();
  if (xt.dim(2) % mult != 0 || xt.dim(3) % mult != 0) {
    throw ArgumentError("UNet: spatial size must be a multiple of " + std::to_string(mult) + ", got " +
                        xt.shape_string());
  }
  const Impl& m = *impl_;
  const int levels = cfg_.levels();

  const Var emb = m.time2(nn::silu(m.time1(nn::constant(nn::sinusoidal_embedding(t, m.sin_dim)))));

  Var h = m.conv_in(x);
  std::vector<Var> skips;
  for (int l = 0; l < levels; ++l) {
    h = m.down[l](h, emb);
    if (l == levels - 1 && cfg_.attention) h = m.down_attn[0](h);
    skips.push_back(h);
    if (l < levels - 1) h = nn::avg_pool2(h);
  }
  h = m.mid[0](h, emb);
  for (int l = levels - 1; l >= 0; --l) {
    h = m.up[l](nn::concat_channels(h, skips[l]), emb);
    if (l == levels - 1 && cfg_.attention) h = m.up_attn[0](h);
    if (l > 0) h = m.up_conv[l - 1](nn::upsample_nearest2(h));
  }
  h = m.conv_out(nn::silu(m.norm_out(h)));
  return nn::add(x, h);
}

Tensor images_to_tensor(std::span<const Image> images) {
  if (images.empty()) throw ArgumentError("empty image batch");
  const int h = images.front().height();
  const int w = images.front().width();
  Tensor t({static_cast<int>(images.size()), Image::kChannels, h, w});
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (std::size_t b = 0; b < images.size(); ++b) {
    require_same_shape(images[b], images.front(), "image batch");
    const double* src = images[b].data();
    float* dst = t.data() + b * Image::kChannels * plane;
    for (std::size_t i = 0; i < plane; ++i)
      for (int c = 0; c < Image::kChannels; ++c) dst[c * plane + i] = static_cast<float>(src[i * Image::kChannels + c]);
  }
  return t;
}

std::vector<Image> tensor_to_images(const Tensor& t) {
  if (t.rank() != 4 || t.dim(1) != Image::kChannels) throw ArgumentError("expected [B,3,H,W] tensor");
  const int h = t.dim(2);
  const int w = t.dim(3);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  std::vector<Image> out;
  out.reserve(t.dim(0));
  for (int b = 0; b < t.dim(0); ++b) {
    Image img(h, w);
    const float* src = t.data() + b * Image::kChannels * plane;
    for (std::size_t i = 0; i < plane; ++i)
      for (int c = 0; c < Image::kChannels; ++c) img.data()[i * Image::kChannels + c] = src[c * plane + i];
    out.push_back(std::move(img));
  }
  return out;
}

std::vector<Image> UNet::predict(std::span<const Image> x_t, std::span<const double> t) const {
  if (x_t.size() != t.size()) {
    throw ArgumentError("predict: " + std::to_string(x_t.size()) + " images but " + std::to_string(t.size()) +
                        " time values");
  }
  for (double v : t) {
    if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("predict: t must lie in [0, 1]");
  }
  constexpr std::size_t kChunk = 8;
  nn::NoGradGuard no_grad;
  std::vector<Image> out;
  out.reserve(x_t.size());
  for (std::size_t i = 0; i < x_t.size(); i += kChunk) {
    const std::size_t n = std::min(kChunk, x_t.size() - i);
    const Var y = forward(nn::constant(images_to_tensor(x_t.subspan(i, n))), t.subspan(i, n));
    for (Image& img : tensor_to_images(y->value)) out.push_back(std::move(img));
  }
  return out;
}

}  // namespace fd3
