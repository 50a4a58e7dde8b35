#include "fd3/clahe.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "fd3/color.hpp"
#include "fd3/error.hpp"

namespace fd3 {

void validate(const ClaheParams& params, const Image& img) {
  if (!(params.clip_limit > 0.0)) throw ArgumentError("clahe: clip_limit must be > 0");
  const int limit = std::min(img.height(), img.width()) / 2;
  if (params.tile_rows < 1 || params.tile_cols < 1 || params.tile_rows > limit ||
      params.tile_cols > limit) {
    throw ArgumentError("clahe: tile grid " + std::to_string(params.tile_rows) + "x" +
                        std::to_string(params.tile_cols) + " invalid for a " +
                        std::to_string(img.height()) + "x" + std::to_string(img.width()) + " image");
  }
}

namespace {

using Lut = std::array<double, kClaheBins>;

int bin_of(double l) {
  const int b = static_cast<int>(l / 100.0 * kClaheBins);
  return std::clamp(b, 0, kClaheBins - 1);
}

// Maps each bin to the normalised cumulative count of the clipped histogram.
Lut tile_lut(const std::vector<int>& bins, int width, int y0, int y1, int x0, int x1,
             double clip_limit) {
  std::array<long, kClaheBins> hist{};
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) ++hist[bins[static_cast<std::size_t>(y) * width + x]];
  const long area = static_cast<long>(y1 - y0) * (x1 - x0);

  const long clip = std::max<long>(1, static_cast<long>(clip_limit * area / kClaheBins));
  long excess = 0;
  for (long& h : hist) {
    if (h > clip) {
      excess += h - clip;
      h = clip;
    }
  }
  // Uniform single-pass redistribution; the remainder of the division is dropped.
  const long per_bin = excess / kClaheBins;
  for (long& h : hist) h += per_bin;

  Lut lut{};
  long cumulative = 0;
  for (int b = 0; b < kClaheBins; ++b) {
    cumulative += hist[b];
    lut[b] = static_cast<double>(cumulative) / static_cast<double>(area);
  }
  return lut;
}

struct Grid {
  std::vector<int> start;   // tile boundaries, size tiles + 1
  std::vector<double> center;
};

Grid make_grid(int extent, int tiles) {
  Grid g;
  g.start.resize(tiles + 1);
  for (int i = 0; i <= tiles; ++i) g.start[i] = static_cast<int>(static_cast<long>(i) * extent / tiles);
  g.center.resize(tiles);
  for (int i = 0; i < tiles; ++i) g.center[i] = 0.5 * (g.start[i] + g.start[i + 1]) - 0.5;
  return g;
}

// Index of the lower neighbouring tile centre and the interpolation weight
// toward the upper one. Positions outside the outermost centres clamp.
std::pair<int, double> locate(const Grid& g, int pos) {
  const int n = static_cast<int>(g.center.size());
  if (n == 1 || pos <= g.center.front()) return {0, 0.0};
  if (pos >= g.center.back()) return {n - 2, 1.0};
  int i = 0;
  while (i + 1 < n - 1 && g.center[i + 1] <= pos) ++i;
  return {i, (pos - g.center[i]) / (g.center[i + 1] - g.center[i])};
}

}  // namespace

Image clahe(const Image& img, const ClaheParams& params) {
  validate(params, img);
  const int h = img.height();
  const int w = img.width();

  std::vector<color::Lab> lab(static_cast<std::size_t>(h) * w);
  std::vector<int> bins(lab.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      lab[i] = color::rgb_to_lab({img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2)});
      bins[i] = bin_of(lab[i].l);
    }
  }

  const Grid rows = make_grid(h, params.tile_rows);
  const Grid cols = make_grid(w, params.tile_cols);
  std::vector<Lut> luts(static_cast<std::size_t>(params.tile_rows) * params.tile_cols);
  for (int ty = 0; ty < params.tile_rows; ++ty) {
    for (int tx = 0; tx < params.tile_cols; ++tx) {
      luts[static_cast<std::size_t>(ty) * params.tile_cols + tx] =
          tile_lut(bins, w, rows.start[ty], rows.start[ty + 1], cols.start[tx], cols.start[tx + 1],
                   params.clip_limit);
    }
  }

  const int last_col = params.tile_cols - 1;
  const int last_row = params.tile_rows - 1;
  Image out(h, w);
  for (int y = 0; y < h; ++y) {
    const auto [ty, wy] = locate(rows, y);
    const int ty1 = std::min(ty + 1, last_row);
    for (int x = 0; x < w; ++x) {
      const auto [tx, wx] = locate(cols, x);
      const int tx1 = std::min(tx + 1, last_col);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const int b = bins[i];
      const auto lut = [&](int r, int c) { return luts[static_cast<std::size_t>(r) * params.tile_cols + c][b]; };
      const double top = (1.0 - wx) * lut(ty, tx) + wx * lut(ty, tx1);
      const double bot = (1.0 - wx) * lut(ty1, tx) + wx * lut(ty1, tx1);
      const double mapped = (1.0 - wy) * top + wy * bot;

      const color::Rgb rgb = color::lab_to_rgb({100.0 * mapped, lab[i].a, lab[i].b});
      out.at(y, x, 0) = std::clamp(rgb.r, 0.0, 1.0);
      out.at(y, x, 1) = std::clamp(rgb.g, 0.0, 1.0);
      out.at(y, x, 2) = std::clamp(rgb.b, 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace fd3
