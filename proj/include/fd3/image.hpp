#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace fd3 {

// H x W x 3 RGB image with interleaved double-precision samples.
//
// Loaded and preprocessed images live in [0, 1]. Intermediate bridge states and
// raw network outputs may leave that range; use clamp01() before saving.
class Image {
 public:
  static constexpr int kChannels = 3;
  static constexpr int kMinSide = 8;

  Image() = default;
  // Throws ArgumentError when either side is below kMinSide.
  Image(int height, int width, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int row, int col, int ch) { return data_[index(row, col, ch)]; }
  double at(int row, int col, int ch) const { return data_[index(row, col, ch)]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool operator==(const Image& other) const = default;

 private:
  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * width_ + col) * kChannels + ch;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

bool same_shape(const Image& a, const Image& b);
// Throws ArgumentError naming `what` when shapes differ.
void require_same_shape(const Image& a, const Image& b, const char* what);

bool in_unit_range(const Image& img);
Image clamp01(Image img);

// Decodes an 8-bit PNG or JPEG colour image into [0, 1] by dividing by 255.
// Missing files raise IoError; greyscale, 16-bit or corrupt files raise
// DecodeError naming the path.
Image load_image(const std::filesystem::path& path);

// Writes an 8-bit RGB PNG; samples are clamped to [0, 1] and rounded.
void save_png(const Image& img, const std::filesystem::path& path);

// Resizes the shorter side to `size` with bilinear interpolation, then
// crops the central size x size window.
Image center_crop_resize(const Image& img, int size);

// Bilinear resample to an exact target shape (half-pixel centres).
Image resize_bilinear(const Image& img, int height, int width);

}  // namespace fd3
