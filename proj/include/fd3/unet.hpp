#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fd3/denoiser.hpp"
#include "fd3/nn/autograd.hpp"

namespace fd3 {

struct UNetConfig {
  int base_channels = 32;
  std::vector<int> channel_mult{1, 2, 2, 4};  // one entry per resolution level
  int time_embed_dim = 128;
  int groups = 8;
  bool attention = true;  // self-attention at the coarsest level

  int levels() const { return static_cast<int>(channel_mult.size()); }

  // Stable key/value form stored in checkpoints ("arch.*" keys without prefix).
  std::map<std::string, std::string> to_map() const;
  static UNetConfig from_map(const std::map<std::string, std::string>& kv);
};

void validate(const UNetConfig& cfg);

struct NamedParameter {
  std::string name;
  nn::Var var;
};

// Encoder-decoder denoiser with skip connections, sinusoidal time embedding
// added in every residual block, and a residual linear output head:
// F(x, t) = x + head(features).
class UNet final : public Denoiser {
 public:
  UNet(UNetConfig cfg, std::uint64_t init_seed);
  ~UNet() override;
  UNet(const UNet&) = delete;
  UNet& operator=(const UNet&) = delete;

  const UNetConfig& config() const { return cfg_; }

  // x: [B,3,H,W] with H and W divisible by 2^(levels-1); t has B entries.
  nn::Var forward(const nn::Var& x, std::span<const double> t) const;

  std::vector<Image> predict(std::span<const Image> x_t, std::span<const double> t) const override;
  std::size_t parameter_count() const override;

  const std::vector<NamedParameter>& parameters() const { return params_; }
  void zero_grad();

  // Spatial multiple required of input sides.
  int size_multiple() const { return 1 << (cfg_.levels() - 1); }

 private:
  struct Impl;
  UNetConfig cfg_;
  std::vector<NamedParameter> params_;
  std::unique_ptr<Impl> impl_;
};

nn::Tensor images_to_tensor(std::span<const Image> images);
std::vector<Image> tensor_to_images(const nn::Tensor& t);

}  // namespace fd3
