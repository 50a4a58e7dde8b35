#pragma once

namespace fd3::color {

// CIE L*a*b* under D65 with sRGB primaries. L lies in [0, 100].
struct Lab {
  double l;
  double a;
  double b;
};

struct Rgb {
  double r;
  double g;
  double b;
};

Lab rgb_to_lab(Rgb rgb);
// Result may fall outside [0, 1] for out-of-gamut colours.
Rgb lab_to_rgb(Lab lab);

// Rec. 601 luma of gamma-encoded RGB.
inline double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

}  // namespace fd3::color
