#pragma once

#include <vector>

#include "fd3/image.hpp"

namespace fd3 {

// Normalised Gaussian taps truncated at radius ceil(4 * sigma). sigma <= 0
// yields the single tap {1}.
std::vector<double> gaussian_kernel(double sigma);

// Index into [0, n) by mirror reflection without repeating the edge sample
// (… 2 1 | 0 1 2 … n-1 | n-2 …). Valid for any integer i.
int reflect_index(int i, int n);

// Separable Gaussian blur of an interleaved height x width x channels buffer
// with reflective borders. sigma == 0 returns the input unchanged.
std::vector<double> gaussian_blur(const std::vector<double>& src, int height, int width,
                                  int channels, double sigma);

Image gaussian_blur(const Image& img, double sigma);

// Single-channel plane holding `amplitude` on pixels whose centre lies within
// `radius` pixels of (center_row, center_col), zero elsewhere. Coordinates are
// in pixels with pixel (r, c) centred at (r + 0.5, c + 0.5).
std::vector<double> rasterize_disc(int height, int width, double center_row, double center_col,
                                   double radius, double amplitude);

}  // namespace fd3
