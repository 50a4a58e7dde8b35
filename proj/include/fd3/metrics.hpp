#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fd3/image.hpp"

namespace fd3 {

// 20 log10(MAX(x) / sqrt(MSE(x, xhat))) with MAX taken from the ground truth
// x. Identical images give +infinity.
double psnr(const Image& x, const Image& xhat);

using FeatureSet = std::vector<std::vector<double>>;

// Sum over feature dimensions of (mu_ref - mu_test)^2 + (sd_ref - sd_test)^2,
// population standard deviations. Needs >= 2 samples per set.
double fid_gaussian(const FeatureSet& ref, const FeatureSet& test);

// Standard Frechet distance between full-covariance Gaussian fits
// (population covariance). Optional alternative to fid_gaussian.
double fid_frechet(const FeatureSet& ref, const FeatureSet& test);

class SegmentationMask {
 public:
  SegmentationMask(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }
  bool at(int row, int col) const { return bits_[static_cast<std::size_t>(row) * width_ + col] != 0; }
  void set(int row, int col, bool on) { bits_[static_cast<std::size_t>(row) * width_ + col] = on ? 1 : 0; }
  std::size_t count() const;
  const std::vector<unsigned char>& bits() const { return bits_; }

 private:
  int height_;
  int width_;
  std::vector<unsigned char> bits_;
};

// |a & b| / |a | b|; two empty masks give 1.
double iou(const SegmentationMask& a, const SegmentationMask& b);

class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<double> extract(const Image& img) const = 0;
};

// Rec. 601 luma averaged over a grid x grid partition, flattened row-major.
class LumaPoolExtractor final : public FeatureExtractor {
 public:
  explicit LumaPoolExtractor(int grid = 8);
  std::size_t dimension() const override { return static_cast<std::size_t>(grid_) * grid_; }
  std::vector<double> extract(const Image& img) const override;

 private:
  int grid_;
};

class Segmenter {
 public:
  virtual ~Segmenter() = default;
  virtual SegmentationMask segment(const Image& img) const = 0;
};

// Toy vessel detector standing in for a trained segmentation network: black
// top-hat (closing minus image) of the luma with a square window, thresholded
// at mean + k * std of the response.
class TopHatSegmenter final : public Segmenter {
 public:
  explicit TopHatSegmenter(int radius = 3, double k = 2.0);
  SegmentationMask segment(const Image& img) const override;

 private:
  int radius_;
  double k_;
};

struct ImagePair {
  const Image* gt;
  const Image* est;
};

struct MetricReport {
  std::size_t n_images = 0;
  std::vector<double> psnr;   // per pair, may hold +inf
  std::vector<double> iou;    // per pair, empty without a segmenter
  double psnr_mean = std::numeric_limits<double>::quiet_NaN();  // over finite entries
  std::size_t psnr_inf_count = 0;
  std::optional<double> fid;       // absent for fewer than 2 pairs
  std::optional<double> iou_mean;  // absent without a segmenter
};

MetricReport evaluate(std::span<const ImagePair> pairs, const FeatureExtractor& extractor,
                      const Segmenter* segmenter = nullptr);

}  // namespace fd3
