#include "fd3/filter.hpp"

#include <cmath>

#include "fd3/error.hpp"
#include "fd3/simd/kernels.hpp"

namespace fd3 {

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) return {1.0};
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * (i * i) / (sigma * sigma));
    taps[i + radius] = w;
    sum += w;
  }
  for (double& w : taps) w /= sum;
  return taps;
}

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n - 2;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

std::vector<double> gaussian_blur(const std::vector<double>& src, int height, int width,
                                  int channels, double sigma) {
  if (sigma < 0.0 || !std::isfinite(sigma)) throw ArgumentError("gaussian_blur: sigma must be finite and >= 0");
  if (sigma == 0.0) return src;
  const auto& k = simd::active();
  const std::vector<double> taps = gaussian_kernel(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  const std::size_t row_len = static_cast<std::size_t>(width) * channels;

  // Horizontal pass through a reflected, padded copy of each row.
  std::vector<double> tmp(src.size());
  std::vector<double> padded((width + 2 * radius) * static_cast<std::size_t>(channels));
  for (int y = 0; y < height; ++y) {
    const double* row = src.data() + y * row_len;
    for (int x = -radius; x < width + radius; ++x) {
      const int sx = reflect_index(x, width);
      for (int c = 0; c < channels; ++c) {
        padded[static_cast<std::size_t>(x + radius) * channels + c] = row[static_cast<std::size_t>(sx) * channels + c];
      }
    }
    k.fir_f64(row_len, taps.data(), taps.size(), channels, padded.data(), tmp.data() + y * row_len);
  }

  // Vertical pass as weighted row accumulation.
  std::vector<double> out(src.size(), 0.0);
  for (int y = 0; y < height; ++y) {
    double* dst = out.data() + y * row_len;
    for (int t = -radius; t <= radius; ++t) {
      const int sy = reflect_index(y + t, height);
      k.axpy_f64(row_len, taps[t + radius], tmp.data() + sy * row_len, dst);
    }
  }
  return out;
}

Image gaussian_blur(const Image& img, double sigma) {
  if (sigma == 0.0) return img;
  std::vector<double> buf(img.values().begin(), img.values().end());
  buf = gaussian_blur(buf, img.height(), img.width(), Image::kChannels, sigma);
  Image out(img.height(), img.width());
  std::copy(buf.begin(), buf.end(), out.data());
  return out;
}

std::vector<double> rasterize_disc(int height, int width, double center_row, double center_col,
                                   double radius, double amplitude) {
  std::vector<double> plane(static_cast<std::size_t>(height) * width, 0.0);
  if (amplitude == 0.0 || radius <= 0.0) return plane;
  const double r2 = radius * radius;
  const int y0 = std::max(0, static_cast<int>(std::floor(center_row - radius)) - 1);
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(center_row + radius)) + 1);
  const int x0 = std::max(0, static_cast<int>(std::floor(center_col - radius)) - 1);
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(center_col + radius)) + 1);
  for (int y = y0; y <= y1; ++y) {
    const double dy = y + 0.5 - center_row;
    for (int x = x0; x <= x1; ++x) {
      const double dx = x + 0.5 - center_col;
      if (dy * dy + dx * dx <= r2) plane[static_cast<std::size_t>(y) * width + x] = amplitude;
    }
  }
  return plane;
}

}  // namespace fd3
