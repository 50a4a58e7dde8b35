#include <algorithm>
#include <cmath>

#include "fd3/color.hpp"
#include "fd3/error.hpp"
#include "fd3/metrics.hpp"

namespace fd3 {
namespace {

std::vector<double> luma_plane(const Image& img) {
  std::vector<double> out(static_cast<std::size_t>(img.height()) * img.width());
  const double* p = img.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = color::luma(p[3 * i], p[3 * i + 1], p[3 * i + 2]);
  return out;
}

// Separable running extreme over a (2r+1)^2 window, edges clamped to the image.
std::vector<double> window_extreme(const std::vector<double>& in, int h, int w, int r, bool take_max) {
  auto pick = [take_max](double a, double b) { return take_max ? std::max(a, b) : std::min(a, b); };
  std::vector<double> tmp(in.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = in[static_cast<std::size_t>(y) * w + x];
      for (int d = std::max(0, x - r); d <= std::min(w - 1, x + r); ++d) v = pick(v, in[static_cast<std::size_t>(y) * w + d]);
      tmp[static_cast<std::size_t>(y) * w + x] = v;
    }
  }
  std::vector<double> out(in.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = tmp[static_cast<std::size_t>(y) * w + x];
      for (int d = std::max(0, y - r); d <= std::min(h - 1, y + r); ++d) v = pick(v, tmp[static_cast<std::size_t>(d) * w + x]);
      out[static_cast<std::size_t>(y) * w + x] = v;
    }
  }
  return out;
}

}  // namespace

LumaPoolExtractor::LumaPoolExtractor(int grid) : grid_(grid) {
  if (grid < 1) throw ArgumentError("LumaPoolExtractor: grid must be >= 1");
}

std::vector<double> LumaPoolExtractor::extract(const Image& img) const {
  if (img.height() < grid_ || img.width() < grid_) throw ArgumentError("LumaPoolExtractor: image smaller than grid");
  const std::vector<double> y = luma_plane(img);
  std::vector<double> feats(dimension(), 0.0);
  for (int gy = 0; gy < grid_; ++gy) {
    const int r0 = gy * img.height() / grid_;
    const int r1 = (gy + 1) * img.height() / grid_;
    for (int gx = 0; gx < grid_; ++gx) {
      const int c0 = gx * img.width() / grid_;
      const int c1 = (gx + 1) * img.width() / grid_;
      double sum = 0.0;
      for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) sum += y[static_cast<std::size_t>(r) * img.width() + c];
      }
      feats[static_cast<std::size_t>(gy) * grid_ + gx] = sum / static_cast<double>((r1 - r0) * (c1 - c0));
    }
  }
  return feats;
}

TopHatSegmenter::TopHatSegmenter(int radius, double k) : radius_(radius), k_(k) {
  if (radius < 1) throw ArgumentError("TopHatSegmenter: radius must be >= 1");
}

SegmentationMask TopHatSegmenter::segment(const Image& img) const {
  const int h = img.height();
  const int w = img.width();
  const std::vector<double> y = luma_plane(img);
  // Closing = erosion of dilation; vessels are darker than background.
  const std::vector<double> closed =
      window_extreme(window_extreme(y, h, w, radius_, true), h, w, radius_, false);
  std::vector<double> response(y.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    response[i] = closed[i] - y[i];
    mean += response[i];
  }
  mean /= static_cast<double>(y.size());
  double var = 0.0;
  for (double v : response) var += (v - mean) * (v - mean);
  const double threshold = mean + k_ * std::sqrt(var / static_cast<double>(y.size()));
  SegmentationMask mask(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) mask.set(r, c, response[static_cast<std::size_t>(r) * w + c] > threshold);
  }
  return mask;
}

}  // namespace fd3
