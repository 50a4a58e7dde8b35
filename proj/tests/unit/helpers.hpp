#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fd3/denoiser.hpp"
#include "fd3/image.hpp"
#include "fd3/random.hpp"

namespace fd3::test {

inline Image random_image(int h, int w, Rng& rng, double lo = 0.0, double hi = 1.0) {
  Image img(h, w);
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& v : img.values()) v = u(rng);
  return img;
}

inline double max_abs_diff(const Image& a, const Image& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

// F*(x_t, t) = x0_true for every batch element.
class OracleDenoiser final : public Denoiser {
 public:
  explicit OracleDenoiser(std::vector<Image> x0) : x0_(std::move(x0)) {}
  std::vector<Image> predict(std::span<const Image> x_t, std::span<const double>) const override {
    return {x0_.begin(), x0_.begin() + static_cast<std::ptrdiff_t>(x_t.size())};
  }

 private:
  std::vector<Image> x0_;
};

class IdentityDenoiser final : public Denoiser {
 public:
  std::vector<Image> predict(std::span<const Image> x_t, std::span<const double>) const override {
    return {x_t.begin(), x_t.end()};
  }
};

// Returns x0 + c regardless of the input.
class OffsetDenoiser final : public Denoiser {
 public:
  OffsetDenoiser(Image x0, double c) : x0_(std::move(x0)), c_(c) {}
  std::vector<Image> predict(std::span<const Image> x_t, std::span<const double>) const override {
    Image out = x0_;
    for (double& v : out.values()) v += c_;
    return std::vector<Image>(x_t.size(), out);
  }

 private:
  Image x0_;
  double c_;
};

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("fd3_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fd3::test
