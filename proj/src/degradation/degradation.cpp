#include "fd3/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fd3/error.hpp"
#include "fd3/filter.hpp"

namespace fd3 {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ArgumentError(what);
}

void check_interval(const Interval& iv, const char* name) {
  require(std::isfinite(iv.lo) && std::isfinite(iv.hi), std::string("ranges.") + name + ": non-finite bound");
  require(iv.lo <= iv.hi, std::string("ranges.") + name + ": lo > hi");
}

double min_side(const Image& img) { return std::min(img.height(), img.width()); }

// Blurred disc plane added to every channel of `acc`.
void add_blurred_disc(std::vector<double>& acc, const Image& img, double center_row,
                      double center_col, double radius, double amplitude, double sigma) {
  if (amplitude == 0.0) return;
  std::vector<double> disc = rasterize_disc(img.height(), img.width(), center_row * img.height(),
                                            center_col * img.width(), radius * min_side(img), amplitude);
  disc = gaussian_blur(disc, img.height(), img.width(), 1, sigma);
  for (std::size_t i = 0; i < disc.size(); ++i) acc[i] += disc[i];
}

}  // namespace

ParamRanges ParamRanges::identity() {
  ParamRanges r;
  r.alpha = {1.0, 1.0};
  r.beta = {0.0, 0.0};
  r.gamma = {1.0, 1.0};
  r.bias_amplitude = {0.0, 0.0};
  r.bias_radius = {0.5, 0.5};
  r.bias_center_row = {0.5, 0.5};
  r.bias_center_col = {0.5, 0.5};
  r.bias_blur_sigma = {0.0, 0.0};
  r.blur_sigma = {0.0, 0.0};
  r.noise_std = {0.0, 0.0};
  r.spot_count = {0, 0};
  return r;
}

void validate(const TransmissionParams& p) {
  require(p.alpha > 0.0, "transmission.alpha must be > 0");
  require(p.gamma > 0.0 && p.gamma <= 1.0, "transmission.gamma must lie in (0, 1]");
  require(p.bias_radius > 0.0 && p.bias_radius <= 0.75, "transmission.bias_radius must lie in (0, 0.75]");
  require(p.bias_blur_sigma >= 0.0, "transmission.bias_blur_sigma must be >= 0");
  require(std::isfinite(p.beta) && std::isfinite(p.bias_amplitude), "transmission: non-finite value");
}

void validate(const BlurParams& p) {
  require(p.blur_sigma >= 0.0 && std::isfinite(p.blur_sigma), "blur.blur_sigma must be >= 0");
  require(p.noise_std >= 0.0 && std::isfinite(p.noise_std), "blur.noise_std must be >= 0");
}

void validate(const ArtifactParams& p) {
  for (const Spot& s : p.spots) {
    require(s.radius > 0.0, "artifacts: spot radius must be > 0");
    require(s.blur_sigma >= 0.0, "artifacts: spot blur_sigma must be >= 0");
    require(std::isfinite(s.amplitude), "artifacts: non-finite spot amplitude");
  }
}

void validate(const DegradationParams& p) {
  validate(p.transmission);
  validate(p.blur);
  validate(p.artifacts);
}

void validate(const ParamRanges& r) {
  check_interval(r.alpha, "alpha");
  check_interval(r.beta, "beta");
  check_interval(r.gamma, "gamma");
  check_interval(r.bias_amplitude, "bias_amplitude");
  check_interval(r.bias_radius, "bias_radius");
  check_interval(r.bias_center_row, "bias_center_row");
  check_interval(r.bias_center_col, "bias_center_col");
  check_interval(r.bias_blur_sigma, "bias_blur_sigma");
  check_interval(r.blur_sigma, "blur_sigma");
  check_interval(r.noise_std, "noise_std");
  check_interval(r.spot_center_row, "spot_center_row");
  check_interval(r.spot_center_col, "spot_center_col");
  check_interval(r.spot_radius, "spot_radius");
  check_interval(r.spot_amplitude, "spot_amplitude");
  check_interval(r.spot_blur_sigma, "spot_blur_sigma");
  require(r.spot_count.lo <= r.spot_count.hi, "ranges.spot_count: lo > hi");
  require(r.spot_count.lo >= 0, "ranges.spot_count must be >= 0");
  require(r.alpha.lo > 0.0, "ranges.alpha must be > 0");
  require(r.gamma.lo > 0.0 && r.gamma.hi <= 1.0, "ranges.gamma must lie in (0, 1]");
  require(r.bias_radius.lo > 0.0 && r.bias_radius.hi <= 0.75, "ranges.bias_radius must lie in (0, 0.75]");
  require(r.bias_blur_sigma.lo >= 0.0, "ranges.bias_blur_sigma must be >= 0");
  require(r.blur_sigma.lo >= 0.0, "ranges.blur_sigma must be >= 0");
  require(r.noise_std.lo >= 0.0, "ranges.noise_std must be >= 0");
  require(r.spot_radius.lo > 0.0 || r.spot_count.hi == 0, "ranges.spot_radius must be > 0");
  require(r.spot_blur_sigma.lo >= 0.0, "ranges.spot_blur_sigma must be >= 0");
}

Image light_transmission(const Image& img, const TransmissionParams& p) {
  validate(p);
  std::vector<double> bias(static_cast<std::size_t>(img.height()) * img.width(), 0.0);
  add_blurred_disc(bias, img, p.bias_center_row, p.bias_center_col, p.bias_radius, p.bias_amplitude,
                   p.bias_blur_sigma);
  Image out(img.height(), img.width());
  const double* src = img.data();
  double* dst = out.data();
  for (std::size_t i = 0; i < bias.size(); ++i) {
    for (int c = 0; c < Image::kChannels; ++c) {
      const std::size_t j = i * Image::kChannels + c;
      dst[j] = std::clamp(p.alpha * (bias[i] + src[j]) + p.beta, 0.0, p.gamma);
    }
  }
  return out;
}

Image blur_noise(const Image& img, const BlurParams& p, Rng& rng) {
  validate(p);
  Image out = gaussian_blur(img, p.blur_sigma);
  if (p.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, p.noise_std);
    for (double& v : out.values()) v += noise(rng);
  }
  for (double& v : out.values()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

Image retinal_artifacts(const Image& img, const ArtifactParams& p) {
  validate(p);
  if (p.spots.empty()) return img;
  std::vector<double> sum(static_cast<std::size_t>(img.height()) * img.width(), 0.0);
  for (const Spot& s : p.spots) {
    add_blurred_disc(sum, img, s.center_row, s.center_col, s.radius, s.amplitude, s.blur_sigma);
  }
  Image out(img.height(), img.width());
  for (std::size_t i = 0; i < sum.size(); ++i) {
    for (int c = 0; c < Image::kChannels; ++c) {
      const std::size_t j = i * Image::kChannels + c;
      out.data()[j] = std::clamp(img.data()[j] + sum[i], 0.0, 1.0);
    }
  }
  return out;
}

Image degrade(const Image& img, const DegradationParams& p, Rng& rng) {
  validate(p);
  return retinal_artifacts(blur_noise(light_transmission(img, p.transmission), p.blur, rng), p.artifacts);
}

DegradationParams sample_params(const ParamRanges& ranges, int min_side, Rng& rng) {
  validate(ranges);
  if (min_side < Image::kMinSide) throw ArgumentError("sample_params: min_side too small");
  const double side = min_side;
  DegradationParams p;
  TransmissionParams& t = p.transmission;
  t.alpha = uniform(rng, ranges.alpha.lo, ranges.alpha.hi);
  t.beta = uniform(rng, ranges.beta.lo, ranges.beta.hi);
  t.gamma = uniform(rng, ranges.gamma.lo, ranges.gamma.hi);
  t.bias_amplitude = uniform(rng, ranges.bias_amplitude.lo, ranges.bias_amplitude.hi);
  t.bias_radius = uniform(rng, ranges.bias_radius.lo, ranges.bias_radius.hi);
  t.bias_center_row = uniform(rng, ranges.bias_center_row.lo, ranges.bias_center_row.hi);
  t.bias_center_col = uniform(rng, ranges.bias_center_col.lo, ranges.bias_center_col.hi);
  t.bias_blur_sigma = side * uniform(rng, ranges.bias_blur_sigma.lo, ranges.bias_blur_sigma.hi);

  p.blur.blur_sigma = side / kBlurReferenceSide * uniform(rng, ranges.blur_sigma.lo, ranges.blur_sigma.hi);
  p.blur.noise_std = uniform(rng, ranges.noise_std.lo, ranges.noise_std.hi);

  const int count = ranges.spot_count.lo == ranges.spot_count.hi
                        ? ranges.spot_count.lo
                        : std::uniform_int_distribution<int>(ranges.spot_count.lo, ranges.spot_count.hi)(rng);
  p.artifacts.spots.resize(count);
  for (Spot& s : p.artifacts.spots) {
    s.center_row = uniform(rng, ranges.spot_center_row.lo, ranges.spot_center_row.hi);
    s.center_col = uniform(rng, ranges.spot_center_col.lo, ranges.spot_center_col.hi);
    s.radius = uniform(rng, ranges.spot_radius.lo, ranges.spot_radius.hi);
    s.amplitude = uniform(rng, ranges.spot_amplitude.lo, ranges.spot_amplitude.hi);
    s.blur_sigma = side * uniform(rng, ranges.spot_blur_sigma.lo, ranges.spot_blur_sigma.hi);
  }
  p.seed = rng();
  return p;
}

TrainingPair make_training_pair(const Image& img, const ParamRanges& ranges,
                                const std::optional<ClaheParams>& target, Rng& rng,
                                DegradationParams* drawn) {
  const DegradationParams p = sample_params(ranges, std::min(img.height(), img.width()), rng);
  Rng noise(p.seed);
  TrainingPair pair{target ? clahe(img, *target) : img, degrade(img, p, noise)};
  if (drawn != nullptr) *drawn = p;
  return pair;
}

}  // namespace fd3
