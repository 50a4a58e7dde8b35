#include "fd3/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "fd3/error.hpp"

namespace fd3 {
namespace {

struct Segment {
  double x0, y0, x1, y1, width;
};

double segment_distance(const Segment& s, double x, double y) {
  const double dx = s.x1 - s.x0;
  const double dy = s.y1 - s.y0;
  const double len2 = dx * dx + dy * dy;
  double u = len2 > 0.0 ? ((x - s.x0) * dx + (y - s.y0) * dy) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  return std::hypot(x - (s.x0 + u * dx), y - (s.y0 + u * dy));
}

// Random-walk branch in unit coordinates; spawns thinner children.
void grow(std::vector<Segment>& out, Rng& rng, double x, double y, double angle, double width, int depth) {
  const int steps = 10 + static_cast<int>(uniform(rng, 0.0, 8.0));
  for (int i = 0; i < steps; ++i) {
    angle += uniform(rng, -0.25, 0.25);
    const double len = uniform(rng, 0.025, 0.045);
    const double nx = x + len * std::cos(angle);
    const double ny = y + len * std::sin(angle);
    out.push_back({x, y, nx, ny, width});
    x = nx;
    y = ny;
    width *= 0.96;
    if (std::hypot(x - 0.5, y - 0.5) > 0.5) return;
    if (depth < 3 && i > 2 && uniform(rng, 0.0, 1.0) < 0.18) {
      const double side = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
      grow(out, rng, x, y, angle + side * uniform(rng, 0.4, 0.9), width * 0.7, depth + 1);
    }
  }
}

double smoothstep(double edge0, double edge1, double v) {
  const double t = std::clamp((v - edge0) / (edge1 - edge0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

}  // namespace

Image make_phantom(int size, Rng& rng) {
  if (size < Image::kMinSide) throw ArgumentError("make_phantom: size must be >= 8");
  const double fov = uniform(rng, 0.44, 0.48);
  const double side = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;  // left or right eye
  const double disc_x = 0.5 + side * uniform(rng, 0.18, 0.24);
  const double disc_y = 0.5 + uniform(rng, -0.04, 0.04);
  const double disc_r = uniform(rng, 0.055, 0.075);
  const double mac_x = 0.5 - side * uniform(rng, 0.04, 0.08);
  const double mac_y = 0.5 + uniform(rng, -0.03, 0.03);
  const double mac_r = uniform(rng, 0.07, 0.1);
  const double base_r = uniform(rng, 0.72, 0.88);
  const double base_g = uniform(rng, 0.32, 0.42);
  const double base_b = uniform(rng, 0.12, 0.2);

  std::vector<Segment> vessels;
  const int trunks = 4 + static_cast<int>(uniform(rng, 0.0, 2.99));
  for (int k = 0; k < trunks; ++k) {
    const double base_angle = 2.0 * std::numbers::pi * (k + uniform(rng, 0.0, 0.6)) / trunks;
    grow(vessels, rng, disc_x, disc_y, base_angle, uniform(rng, 0.010, 0.016), 0);
  }

  Image img(size, size);
  const double px = 1.0 / size;
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const double x = (c + 0.5) * px;
      const double y = (r + 0.5) * px;
      const double rad = std::hypot(x - 0.5, y - 0.5);
      const double inside = 1.0 - smoothstep(fov - px, fov + px, rad);
      const double vignette = 1.0 - 0.35 * (rad / fov) * (rad / fov);
      double red = base_r * vignette;
      double green = base_g * vignette;
      double blue = base_b * vignette;

      const double macula = std::exp(-std::pow(std::hypot(x - mac_x, y - mac_y) / mac_r, 2.0));
      red *= 1.0 - 0.25 * macula;
      green *= 1.0 - 0.35 * macula;
      blue *= 1.0 - 0.3 * macula;

      double vessel = 0.0;
      for (const Segment& s : vessels) {
        const double d = segment_distance(s, x, y);
        vessel = std::max(vessel, 1.0 - smoothstep(0.5 * s.width - 0.5 * px, 0.5 * s.width + 0.5 * px, d));
      }
      red *= 1.0 - 0.35 * vessel;
      green *= 1.0 - 0.6 * vessel;
      blue *= 1.0 - 0.5 * vessel;

      const double disc = 1.0 - smoothstep(disc_r - px, disc_r + px, std::hypot(x - disc_x, y - disc_y));
      red = red + disc * (0.97 - red);
      green = green + disc * (0.82 - green);
      blue = blue + disc * (0.55 - blue);

      img.at(r, c, 0) = std::clamp(red * inside, 0.0, 1.0);
      img.at(r, c, 1) = std::clamp(green * inside, 0.0, 1.0);
      img.at(r, c, 2) = std::clamp(blue * inside, 0.0, 1.0);
    }
  }
  return img;
}

}  // namespace fd3
