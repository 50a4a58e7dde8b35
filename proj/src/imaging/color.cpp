#include "fd3/color.hpp"

#include <array>
#include <cmath>

namespace fd3::color {
namespace {

constexpr double kEpsilon = 216.0 / 24389.0;
constexpr double kKappa = 24389.0 / 27.0;

double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double v) {
  return v <= 0.0031308 ? v * 12.92 : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

using Mat3 = std::array<std::array<double, 3>, 3>;

// Linear sRGB -> XYZ (D65).
constexpr Mat3 kRgbToXyz = {{{0.4124564, 0.3575761, 0.1804375},
                             {0.2126729, 0.7151522, 0.0721750},
                             {0.0193339, 0.1191920, 0.9503041}}};

// Reference white = XYZ of RGB (1, 1, 1), so neutral greys have a* = b* = 0.
constexpr double row_sum(int r) { return kRgbToXyz[r][0] + kRgbToXyz[r][1] + kRgbToXyz[r][2]; }
constexpr double kWhiteX = row_sum(0);
constexpr double kWhiteY = row_sum(1);
constexpr double kWhiteZ = row_sum(2);

Mat3 invert(const Mat3& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  Mat3 inv{};
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return inv;
}

const Mat3& xyz_to_rgb() {
  static const Mat3 inv = invert(kRgbToXyz);
  return inv;
}

double f_forward(double t) { return t > kEpsilon ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0; }

double f_inverse(double f) {
  const double f3 = f * f * f;
  return f3 > kEpsilon ? f3 : (116.0 * f - 16.0) / kKappa;
}

}  // namespace

Lab rgb_to_lab(Rgb rgb) {
  const double r = srgb_to_linear(rgb.r);
  const double g = srgb_to_linear(rgb.g);
  const double b = srgb_to_linear(rgb.b);
  const Mat3& m = kRgbToXyz;
  const double x = (m[0][0] * r + m[0][1] * g + m[0][2] * b) / kWhiteX;
  const double y = (m[1][0] * r + m[1][1] * g + m[1][2] * b) / kWhiteY;
  const double z = (m[2][0] * r + m[2][1] * g + m[2][2] * b) / kWhiteZ;
  const double fx = f_forward(x);
  const double fy = f_forward(y);
  const double fz = f_forward(z);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Rgb lab_to_rgb(Lab lab) {
  const double fy = (lab.l + 16.0) / 116.0;
  const double fx = fy + lab.a / 500.0;
  const double fz = fy - lab.b / 200.0;
  const double x = f_inverse(fx) * kWhiteX;
  const double y = f_inverse(fy) * kWhiteY;
  const double z = f_inverse(fz) * kWhiteZ;
  const Mat3& m = xyz_to_rgb();
  const double r = m[0][0] * x + m[0][1] * y + m[0][2] * z;
  const double g = m[1][0] * x + m[1][1] * y + m[1][2] * z;
  const double b = m[2][0] * x + m[2][1] * y + m[2][2] * z;
  return {linear_to_srgb(r), linear_to_srgb(g), linear_to_srgb(b)};
}

}  // namespace fd3::color
