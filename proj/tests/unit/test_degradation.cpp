#include <doctest.h>

#include <set>

#include "fd3/degradation.hpp"
#include "fd3/degradation_io.hpp"
#include "fd3/error.hpp"
#include "fd3/filter.hpp"
#include "helpers.hpp"

using namespace fd3;
using fd3::test::max_abs_diff;
using fd3::test::random_image;

namespace {

DegradationParams identity_params() {
  Rng rng(0);
  return sample_params(ParamRanges::identity(), 32, rng);
}

}  // namespace

TEST_SUITE("degradation") {
  TEST_CASE("identity parameters reproduce the input bitwise") {
    Rng rng(1);
    const Image img = random_image(32, 32, rng);
    const DegradationParams p = identity_params();
    Rng noise(5);
    CHECK(light_transmission(img, p.transmission) == img);
    CHECK(blur_noise(img, p.blur, noise) == img);
    CHECK(retinal_artifacts(img, p.artifacts) == img);
    CHECK(degrade(img, p, noise) == img);
  }

  TEST_CASE("degrade equals the explicit three-stage chain") {
    Rng rng(2);
    const Image img = random_image(32, 32, rng);
    for (int i = 0; i < 50; ++i) {
      const DegradationParams p = sample_params(ParamRanges{}, 32, rng);
      Rng n1(p.seed), n2(p.seed);
      const Image chain = retinal_artifacts(blur_noise(light_transmission(img, p.transmission), p.blur, n2), p.artifacts);
      CHECK(degrade(img, p, n1) == chain);
    }
  }

  TEST_CASE("outputs stay in [0, 1] for random parameters") {
    Rng rng(3);
    ParamRanges wide;
    wide.beta = {-0.6, 0.6};
    wide.noise_std = {0.0, 0.3};
    wide.spot_amplitude = {-1.0, 1.0};
    for (int i = 0; i < 40; ++i) {
      const Image img = random_image(24, 24, rng);
      const DegradationParams p = sample_params(wide, 24, rng);
      Rng n(p.seed);
      CHECK(in_unit_range(degrade(img, p, n)));
    }
  }

  TEST_CASE("transmission matches its formula with the disc bias") {
    Rng rng(4);
    const Image img = random_image(20, 20, rng);
    TransmissionParams t;
    t.alpha = 0.7;
    t.beta = 0.1;
    t.gamma = 0.9;
    t.bias_center_row = 0.5;
    t.bias_center_col = 0.5;
    t.bias_radius = 0.3;
    t.bias_amplitude = -0.2;
    t.bias_blur_sigma = 1.5;
    const auto disc = gaussian_blur(rasterize_disc(20, 20, 10.0, 10.0, 6.0, -0.2), 20, 20, 1, 1.5);
    const Image out = light_transmission(img, t);
    double worst = 0.0;
    for (int y = 0; y < 20; ++y) {
      for (int x = 0; x < 20; ++x) {
        for (int c = 0; c < 3; ++c) {
          const double want = std::clamp(0.7 * (disc[y * 20 + x] + img.at(y, x, c)) + 0.1, 0.0, 0.9);
          worst = std::max(worst, std::abs(want - out.at(y, x, c)));
        }
      }
    }
    CHECK(worst < 1e-15);
  }

  TEST_CASE("raising beta never darkens a pixel") {
    Rng rng(5);
    const Image img = random_image(16, 16, rng);
    TransmissionParams t;
    t.alpha = 0.8;
    t.gamma = 1.0;
    t.bias_amplitude = 0.15;
    t.bias_blur_sigma = 2.0;
    for (double beta = -0.3; beta < 0.3; beta += 0.05) {
      t.beta = beta;
      const Image lo = light_transmission(img, t);
      t.beta = beta + 0.05;
      const Image hi = light_transmission(img, t);
      for (std::size_t i = 0; i < lo.size(); ++i) REQUIRE(hi.data()[i] >= lo.data()[i]);
    }
  }

  TEST_CASE("artifacts add blurred discs") {
    Image img(16, 16, 0.5);
    ArtifactParams a;
    a.spots.push_back({0.5, 0.5, 0.25, 0.3, 0.0});
    const Image out = retinal_artifacts(img, a);
    CHECK(out.at(8, 8, 1) == doctest::Approx(0.8));
    CHECK(out.at(0, 0, 1) == 0.5);
  }

  TEST_CASE("point ranges give deterministic parameters equal to lo") {
    ParamRanges r = ParamRanges::identity();
    r.alpha = {0.6, 0.6};
    r.beta = {0.05, 0.05};
    r.spot_count = {2, 2};
    r.spot_amplitude = {0.1, 0.1};
    Rng rng(6);
    const DegradationParams p = sample_params(r, 64, rng);
    CHECK(p.transmission.alpha == 0.6);
    CHECK(p.transmission.beta == 0.05);
    CHECK(p.artifacts.spots.size() == 2);
    CHECK(p.artifacts.spots[1].amplitude == 0.1);
  }

  TEST_CASE("sampling is reproducible and uniform") {
    Rng a(7), b(7);
    const DegradationParams pa = sample_params(ParamRanges{}, 64, a);
    const DegradationParams pb = sample_params(ParamRanges{}, 64, b);
    CHECK(to_json(pa) == to_json(pb));

    Rng rng(8);
    double sum = 0.0;
    std::set<std::size_t> counts;
    for (int i = 0; i < 1000; ++i) {
      const DegradationParams p = sample_params(ParamRanges{}, 64, rng);
      sum += p.transmission.alpha;
      counts.insert(p.artifacts.spots.size());
      REQUIRE(p.transmission.alpha >= 0.5);
      REQUIRE(p.transmission.alpha <= 1.0);
    }
    CHECK(std::abs(sum / 1000.0 - 0.75) <= 0.02);
    CHECK(counts == std::set<std::size_t>{0, 1, 2, 3, 4, 5});
  }

  TEST_CASE("blur widths scale with the image side") {
    ParamRanges r = ParamRanges::identity();
    r.blur_sigma = {3.0, 3.0};
    r.bias_blur_sigma = {0.1, 0.1};
    Rng rng(9);
    const DegradationParams p = sample_params(r, 64, rng);
    CHECK(p.blur.blur_sigma == doctest::Approx(3.0 * 64 / 512));
    CHECK(p.transmission.bias_blur_sigma == doctest::Approx(6.4));
  }

  TEST_CASE("invalid ranges are rejected") {
    ParamRanges r;
    r.alpha = {1.0, 0.5};
    Rng rng(1);
    CHECK_THROWS_AS(sample_params(r, 32, rng), ArgumentError);
    r = ParamRanges{};
    r.spot_count = {3, 1};
    CHECK_THROWS_AS(sample_params(r, 32, rng), ArgumentError);
    r = ParamRanges{};
    r.noise_std = {-0.1, 0.1};
    CHECK_THROWS_AS(validate(r), ArgumentError);
  }

  TEST_CASE("training pairs: shapes, determinism and the identity case") {
    Rng rng(10);
    const Image img = random_image(128, 128, rng);
    Rng a(11), b(11);
    const TrainingPair pa = make_training_pair(img, ParamRanges{}, ClaheParams{}, a);
    const TrainingPair pb = make_training_pair(img, ParamRanges{}, ClaheParams{}, b);
    CHECK(pa.x0.height() == 128);
    CHECK(pa.y.width() == 128);
    CHECK(pa.x0 == pb.x0);
    CHECK(pa.y == pb.y);

    const Image small = random_image(32, 32, rng);
    Rng c(12);
    const ClaheParams he{1e9, 1, 1};
    const TrainingPair id = make_training_pair(small, ParamRanges::identity(), he, c);
    CHECK(id.y == small);
    CHECK(id.x0 == clahe(small, he));

    Rng d(13);
    const TrainingPair plain = make_training_pair(small, ParamRanges::identity(), std::nullopt, d);
    CHECK(plain.x0 == small);
  }

  TEST_CASE("ranges config round trip and validation") {
    ParamRanges r;
    r.alpha = {0.55, 0.9};
    r.spot_count = {1, 3};
    Config c;
    ranges_to_config(r, c, "");
    const ParamRanges back = ranges_from_config(c);
    CHECK(back.alpha.lo == 0.55);
    CHECK(back.alpha.hi == 0.9);
    CHECK(back.spot_count.hi == 3);

    CHECK_THROWS_AS(ranges_from_config(Config::parse("alhpa = 0.5, 1")), ArgumentError);
    CHECK_THROWS_AS(ranges_from_config(Config::parse("alpha = 0.5")), ArgumentError);
    CHECK_THROWS_AS(ranges_from_config(Config::parse("spot_count = 0.5, 2")), ArgumentError);
    CHECK_THROWS_AS(ranges_from_config(Config::parse("beta = 0.3, 0.1")), ArgumentError);
  }

  TEST_CASE("clahe config keys") {
    CHECK_FALSE(clahe_from_config(Config::parse("clahe.enabled = false")).has_value());
    const auto p = clahe_from_config(Config::parse("clahe.clip_limit = 3.5\nclahe.tile_grid = [4, 6]"));
    REQUIRE(p.has_value());
    CHECK(p->clip_limit == 3.5);
    CHECK(p->tile_rows == 4);
    CHECK(p->tile_cols == 6);
    CHECK_THROWS_AS(clahe_from_config(Config::parse("clahe.tile_grid = 8")), ArgumentError);
  }
}
