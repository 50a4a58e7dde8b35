#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fd3/clahe.hpp"
#include "fd3/image.hpp"
#include "fd3/random.hpp"

namespace fd3 {

// Global contrast/brightness change plus a blurred disc of over- or
// under-illumination, clipped to [0, gamma].
struct TransmissionParams {
  double alpha = 1.0;           // contrast factor
  double beta = 0.0;            // brightness offset
  double gamma = 1.0;           // upper clip level, (0, 1]
  double bias_center_row = 0.5; // fraction of height
  double bias_center_col = 0.5; // fraction of width
  double bias_radius = 0.5;     // fraction of min(H, W), (0, 0.75]
  double bias_amplitude = 0.0;  // sign selects over/under-illumination
  double bias_blur_sigma = 0.0; // pixels
};

struct BlurParams {
  double blur_sigma = 0.0;  // pixels
  double noise_std = 0.0;
};

struct Spot {
  double center_row = 0.5;  // fraction of height
  double center_col = 0.5;  // fraction of width
  double radius = 0.05;     // fraction of min(H, W)
  double amplitude = 0.0;
  double blur_sigma = 0.0;  // pixels
};

struct ArtifactParams {
  std::vector<Spot> spots;
};

struct DegradationParams {
  TransmissionParams transmission;
  BlurParams blur;
  ArtifactParams artifacts;
  std::uint64_t seed = 0;  // noise stream used by make_training_pair
};

struct Interval {
  double lo;
  double hi;
};

struct IntInterval {
  int lo;
  int hi;
};

// Sampling intervals for every scalar of DegradationParams. Blur widths are
// expressed relative to the image so one range set serves every resolution.
struct ParamRanges {
  Interval alpha{0.5, 1.0};
  Interval beta{-0.2, 0.2};
  Interval gamma{0.8, 1.0};
  Interval bias_amplitude{-0.3, 0.3};
  Interval bias_radius{0.3, 0.6};
  Interval bias_center_row{0.25, 0.75};
  Interval bias_center_col{0.25, 0.75};
  Interval bias_blur_sigma{0.05, 0.15};  // fraction of min(H, W)
  Interval blur_sigma{0.0, 3.0};         // pixels at a 512-pixel side, scaled linearly
  Interval noise_std{0.0, 0.02};
  IntInterval spot_count{0, 5};
  Interval spot_center_row{0.2, 0.8};
  Interval spot_center_col{0.2, 0.8};
  Interval spot_radius{0.02, 0.08};
  Interval spot_amplitude{-0.4, 0.4};
  Interval spot_blur_sigma{0.01, 0.04};  // fraction of min(H, W)

  // Every interval collapsed to the identity transform.
  static ParamRanges identity();
};

inline constexpr double kBlurReferenceSide = 512.0;

void validate(const TransmissionParams& p);
void validate(const BlurParams& p);
void validate(const ArtifactParams& p);
void validate(const DegradationParams& p);
void validate(const ParamRanges& r);

Image light_transmission(const Image& img, const TransmissionParams& p);
Image blur_noise(const Image& img, const BlurParams& p, Rng& rng);
Image retinal_artifacts(const Image& img, const ArtifactParams& p);

// retinal_artifacts(blur_noise(light_transmission(img))) in that order.
Image degrade(const Image& img, const DegradationParams& p, Rng& rng);

// Uniform draws from every interval. `min_side` is min(H, W) of the target
// image and converts relative blur widths to pixels.
DegradationParams sample_params(const ParamRanges& ranges, int min_side, Rng& rng);

struct TrainingPair {
  Image x0;  // CLAHE pseudo-ground-truth
  Image y;   // degraded measurement
};

// x0 = clahe(img) (or img itself when `target` is empty), y = degrade(img, p)
// with p drawn from `ranges` and the noise stream seeded from p.seed.
TrainingPair make_training_pair(const Image& img, const ParamRanges& ranges,
                                const std::optional<ClaheParams>& target, Rng& rng,
                                DegradationParams* drawn = nullptr);

}  // namespace fd3
