#include "fd3/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fd3/error.hpp"

namespace fd3 {

Image::Image(int height, int width, double fill) : height_(height), width_(width) {
  if (height < kMinSide || width < kMinSide) {
    throw ArgumentError("image must be at least " + std::to_string(kMinSide) + "x" +
                        std::to_string(kMinSide) + ", got " + std::to_string(height) + "x" +
                        std::to_string(width));
  }
  data_.assign(static_cast<std::size_t>(height) * width * kChannels, fill);
}

bool same_shape(const Image& a, const Image& b) {
  return a.height() == b.height() && a.width() == b.width();
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!same_shape(a, b)) {
    throw ArgumentError(std::string(what) + ": shape mismatch " + std::to_string(a.height()) + "x" +
                        std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                        std::to_string(b.width()));
  }
}

bool in_unit_range(const Image& img) {
  return std::all_of(img.values().begin(), img.values().end(),
                     [](double v) { return v >= 0.0 && v <= 1.0; });
}

Image clamp01(Image img) {
  for (double& v : img.values()) v = std::clamp(v, 0.0, 1.0);
  return img;
}

namespace {

struct Tap {
  int lo;
  int hi;
  double frac;
};

std::vector<Tap> bilinear_taps(int src, int dst) {
  std::vector<Tap> taps(dst);
  const double scale = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    double pos = (i + 0.5) * scale - 0.5;
    pos = std::clamp(pos, 0.0, static_cast<double>(src - 1));
    const int lo = static_cast<int>(std::floor(pos));
    taps[i] = {lo, std::min(lo + 1, src - 1), pos - lo};
  }
  return taps;
}

}  // namespace

Image resize_bilinear(const Image& img, int height, int width) {
  if (height == img.height() && width == img.width()) return img;
  Image out(height, width);
  const auto ry = bilinear_taps(img.height(), height);
  const auto rx = bilinear_taps(img.width(), width);
  for (int y = 0; y < height; ++y) {
    const Tap& ty = ry[y];
    for (int x = 0; x < width; ++x) {
      const Tap& tx = rx[x];
      for (int c = 0; c < Image::kChannels; ++c) {
        const double top = img.at(ty.lo, tx.lo, c) * (1.0 - tx.frac) + img.at(ty.lo, tx.hi, c) * tx.frac;
        const double bot = img.at(ty.hi, tx.lo, c) * (1.0 - tx.frac) + img.at(ty.hi, tx.hi, c) * tx.frac;
        out.at(y, x, c) = top * (1.0 - ty.frac) + bot * ty.frac;
      }
    }
  }
  return out;
}

Image center_crop_resize(const Image& img, int size) {
  if (size < Image::kMinSide) {
    throw ArgumentError("center_crop_resize: size must be >= " + std::to_string(Image::kMinSide) +
                        ", got " + std::to_string(size));
  }
  const int short_side = std::min(img.height(), img.width());
  const double scale = static_cast<double>(size) / short_side;
  const int h = img.height() == short_side ? size : std::max(size, static_cast<int>(std::lround(img.height() * scale)));
  const int w = img.width() == short_side ? size : std::max(size, static_cast<int>(std::lround(img.width() * scale)));
  const Image scaled = resize_bilinear(img, h, w);
  if (h == size && w == size) return scaled;

  Image out(size, size);
  const int top = (h - size) / 2;
  const int left = (w - size) / 2;
  for (int y = 0; y < size; ++y) {
    const double* src = scaled.data() + (static_cast<std::size_t>(y + top) * w + left) * Image::kChannels;
    std::copy(src, src + static_cast<std::size_t>(size) * Image::kChannels,
              out.data() + static_cast<std::size_t>(y) * size * Image::kChannels);
  }
  return out;
}

}  // namespace fd3
