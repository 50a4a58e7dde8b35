#pragma once

#include "fd3/image.hpp"

namespace fd3 {

struct ClaheParams {
  double clip_limit = 2.0;  // multiple of the mean bin count
  int tile_rows = 8;
  int tile_cols = 8;
};

inline constexpr int kClaheBins = 256;

// Throws ArgumentError unless clip_limit > 0 and 1 <= tiles <= min(H, W) / 2.
void validate(const ClaheParams& params, const Image& img);

// Contrast limited adaptive histogram equalisation of the CIE L* channel.
// Chroma (a*, b*) is preserved; results are clamped to [0, 1] after the
// conversion back to RGB.
Image clahe(const Image& img, const ClaheParams& params);

}  // namespace fd3
