#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "fd3/clahe.hpp"
#include "fd3/color.hpp"
#include "fd3/error.hpp"
#include "fd3/filter.hpp"
#include "fd3/image.hpp"
#include "helpers.hpp"

using namespace fd3;
using fd3::test::max_abs_diff;
using fd3::test::random_image;

TEST_SUITE("imaging") {
  TEST_CASE("image construction validates sides") {
    CHECK_THROWS_AS(Image(7, 8), ArgumentError);
    CHECK_THROWS_AS(Image(8, 0), ArgumentError);
    Image img(8, 9, 0.25);
    CHECK(img.size() == 8u * 9u * 3u);
    CHECK(img.at(7, 8, 2) == 0.25);
  }

  TEST_CASE("png round trip is exact on 8-bit values") {
    Rng rng(1);
    Image img(12, 10);
    std::uniform_int_distribution<int> q(0, 255);
    for (double& v : img.values()) v = q(rng) / 255.0;
    const auto dir = test::temp_dir("png");
    save_png(img, dir / "a.png");
    CHECK(load_image(dir / "a.png") == img);
  }

  TEST_CASE("loader errors name the file") {
    const auto dir = test::temp_dir("badimg");
    CHECK_THROWS_AS(load_image(dir / "missing.png"), IoError);
    {
      std::ofstream(dir / "junk.png") << "not an image at all";
    }
    try {
      load_image(dir / "junk.png");
      FAIL("expected DecodeError");
    } catch (const DecodeError& e) {
      CHECK(std::string(e.what()).find("junk.png") != std::string::npos);
    }
  }

  TEST_CASE("center_crop_resize yields a square of the requested size") {
    Rng rng(2);
    const Image img = random_image(30, 50, rng);
    const Image out = center_crop_resize(img, 16);
    CHECK(out.height() == 16);
    CHECK(out.width() == 16);
    CHECK(in_unit_range(out));
    CHECK(center_crop_resize(random_image(16, 16, rng), 16).height() == 16);
    CHECK_THROWS_AS(center_crop_resize(img, 4), ArgumentError);
  }

  TEST_CASE("resize to the same shape is the identity") {
    Rng rng(3);
    const Image img = random_image(9, 11, rng);
    CHECK(resize_bilinear(img, 9, 11) == img);
  }

  TEST_CASE("Lab conversion round trips in gamut") {
    Rng rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
      const color::Rgb in{u(rng), u(rng), u(rng)};
      const color::Rgb back = color::lab_to_rgb(color::rgb_to_lab(in));
      CHECK(back.r == doctest::Approx(in.r).epsilon(1e-9));
      CHECK(back.g == doctest::Approx(in.g).epsilon(1e-9));
      CHECK(back.b == doctest::Approx(in.b).epsilon(1e-9));
    }
    const color::Lab white = color::rgb_to_lab({1.0, 1.0, 1.0});
    CHECK(white.l == doctest::Approx(100.0).epsilon(1e-9));
    CHECK(std::abs(white.a) < 1e-6);
    CHECK(std::abs(white.b) < 1e-6);
  }

  TEST_CASE("gaussian kernel is normalised with radius ceil(4 sigma)") {
    const auto k = gaussian_kernel(1.3);
    CHECK(k.size() == 2 * 6 + 1);
    double s = 0.0;
    for (double v : k) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(gaussian_kernel(0.0) == std::vector<double>{1.0});
  }

  TEST_CASE("reflect index mirrors without repeating the edge") {
    CHECK(reflect_index(-1, 5) == 1);
    CHECK(reflect_index(-2, 5) == 2);
    CHECK(reflect_index(5, 5) == 3);
    CHECK(reflect_index(6, 5) == 2);
    CHECK(reflect_index(3, 5) == 3);
    CHECK(reflect_index(-9, 5) == 1);
    CHECK(reflect_index(0, 1) == 0);
  }

  TEST_CASE("blur preserves constants and matches a direct 2-D convolution") {
    Rng rng(5);
    const Image flat(16, 12, 0.4);
    CHECK(max_abs_diff(gaussian_blur(flat, 2.0), flat) < 1e-14);

    const Image img = random_image(13, 17, rng);
    const double sigma = 1.1;
    const Image got = gaussian_blur(img, sigma);
    const auto k = gaussian_kernel(sigma);
    const int r = static_cast<int>(k.size() / 2);
    double worst = 0.0;
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        for (int c = 0; c < 3; ++c) {
          double s = 0.0;
          for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
              s += k[dy + r] * k[dx + r] *
                   img.at(reflect_index(y + dy, img.height()), reflect_index(x + dx, img.width()), c);
            }
          }
          worst = std::max(worst, std::abs(s - got.at(y, x, c)));
        }
      }
    }
    CHECK(worst < 1e-12);
    CHECK(gaussian_blur(img, 0.0) == img);
  }

  TEST_CASE("disc rasterisation uses pixel centres") {
    const auto d = rasterize_disc(8, 8, 4.0, 4.0, 1.0, 2.0);
    int on = 0;
    for (double v : d) on += v == 2.0;
    CHECK(on == 4);  // the four pixels centred at distance sqrt(0.5)
  }

  TEST_CASE("clahe output stays in range and is deterministic") {
    Rng rng(6);
    const Image img = random_image(40, 48, rng);
    const Image a = clahe(img, {});
    CHECK(in_unit_range(a));
    CHECK(clahe(img, {}) == a);
    CHECK_THROWS_AS(clahe(img, {2.0, 0, 8}), ArgumentError);
    CHECK_THROWS_AS(clahe(img, {0.0, 8, 8}), ArgumentError);
    CHECK_THROWS_AS(clahe(Image(8, 8), {2.0, 8, 8}), ArgumentError);
  }

  TEST_CASE("single tile with an unreachable clip limit is global histogram equalisation of L*") {
    // Oracle: for a grey image the mapped lightness of a pixel is 100 times
    // the fraction of pixels whose L* falls in the same or a lower 1/256 bin.
    Rng rng(7);
    Image img(24, 20);
    std::uniform_real_distribution<double> u(0.05, 0.8);
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        const double g = u(rng);
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = g;
      }
    }
    const Image out = clahe(img, {1e9, 1, 1});
    std::vector<int> bins;
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        const double l = color::rgb_to_lab({img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2)}).l;
        bins.push_back(std::min(255, static_cast<int>(l * 2.56)));
      }
    }
    std::vector<int> sorted = bins;
    std::sort(sorted.begin(), sorted.end());
    double worst = 0.0;
    for (int y = 0, i = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x, ++i) {
        const auto rank = std::upper_bound(sorted.begin(), sorted.end(), bins[i]) - sorted.begin();
        const double want_l = 100.0 * static_cast<double>(rank) / static_cast<double>(bins.size());
        const double got_l = color::rgb_to_lab({out.at(y, x, 0), out.at(y, x, 1), out.at(y, x, 2)}).l;
        worst = std::max(worst, std::abs(want_l - got_l));
      }
    }
    CHECK(worst < 1e-6);
  }

  TEST_CASE("clahe keeps chroma of in-gamut colours") {
    Image img(16, 16);
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) {
        const double s = 0.3 + 0.02 * ((x + y) % 10);
        img.at(y, x, 0) = s;
        img.at(y, x, 1) = 0.8 * s;
        img.at(y, x, 2) = 0.7 * s;
      }
    }
    const Image out = clahe(img, {1e9, 1, 1});
    const color::Lab in = color::rgb_to_lab({img.at(3, 4, 0), img.at(3, 4, 1), img.at(3, 4, 2)});
    const color::Lab got = color::rgb_to_lab({out.at(3, 4, 0), out.at(3, 4, 1), out.at(3, 4, 2)});
    if (got.l < 95.0) {
      CHECK(got.a == doctest::Approx(in.a).epsilon(1e-6));
      CHECK(got.b == doctest::Approx(in.b).epsilon(1e-6));
    }
  }

  TEST_CASE("lower clip limits reduce contrast gain") {
    Rng rng(8);
    Image img(32, 32);
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        const double g = 0.4 + 0.05 * std::sin(x * 0.4) + 0.01 * std::uniform_real_distribution<double>(0, 1)(rng);
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = g;
      }
    }
    auto spread = [](const Image& im) {
      const auto [lo, hi] = std::minmax_element(im.values().begin(), im.values().end());
      return *hi - *lo;
    };
    CHECK(spread(clahe(img, {1.0, 4, 4})) <= spread(clahe(img, {8.0, 4, 4})) + 1e-12);
    CHECK(spread(clahe(img, {8.0, 4, 4})) > spread(img));
  }
}
