#include <doctest.h>

#include "fd3/bridge.hpp"
#include "fd3/error.hpp"
#include "helpers.hpp"

using namespace fd3;
using fd3::test::max_abs_diff;
using fd3::test::random_image;

TEST_SUITE("bridge") {
  TEST_CASE("uniform schedules") {
    const auto s10 = uniform_schedule(10).steps();
    REQUIRE(s10.size() == 11);
    for (int i = 0; i <= 10; ++i) CHECK(s10[i] == doctest::Approx(1.0 - 0.1 * i).epsilon(1e-15));
    CHECK(s10.front() == 1.0);
    CHECK(s10.back() == 0.0);
    CHECK(uniform_schedule(1).steps() == std::vector<double>{1.0, 0.0});
    CHECK(uniform_schedule(2).steps() == std::vector<double>{1.0, 0.5, 0.0});
    CHECK(uniform_schedule(7).nfe() == 7);
    CHECK_THROWS_AS(uniform_schedule(0), ArgumentError);
  }

  TEST_CASE("schedule validation") {
    CHECK_THROWS_AS(TimestepSchedule({0.9, 0.0}), ArgumentError);
    CHECK_THROWS_AS(TimestepSchedule({1.0, 0.1}), ArgumentError);
    CHECK_THROWS_AS(TimestepSchedule({1.0, 0.5, 0.5, 0.0}), ArgumentError);
    CHECK_THROWS_AS(TimestepSchedule({1.0}), ArgumentError);
    CHECK(TimestepSchedule({1.0, 0.7, 0.2, 0.0}).nfe() == 3);
  }

  TEST_CASE("bridge endpoints are exact") {
    Rng rng(1);
    const Image x0 = random_image(16, 16, rng);
    const Image x1 = random_image(16, 16, rng);
    const BridgeConfig cfg;
    CHECK(bridge_state(x0, x1, 0.0, cfg, rng) == x0);
    CHECK(bridge_state(x0, x1, 1.0, cfg, rng) == x1);
    const Image mid = bridge_state(x0, x1, 0.25, cfg, rng);
    CHECK(mid.at(3, 4, 1) == doctest::Approx(0.75 * x0.at(3, 4, 1) + 0.25 * x1.at(3, 4, 1)));
    CHECK_THROWS_AS(bridge_state(x0, x1, 1.5, cfg, rng), ArgumentError);
  }

  TEST_CASE("noise schedule adds gaussian noise when enabled") {
    Rng rng(2);
    const Image x0(32, 32, 0.3);
    const Image x1(32, 32, 0.7);
    BridgeConfig cfg;
    cfg.sigma = [](double t) { return 0.1 * t * (1.0 - t); };
    const Image s = bridge_state(x0, x1, 0.5, cfg, rng);
    double mean = 0.0;
    for (double v : s.values()) mean += v;
    mean /= static_cast<double>(s.size());
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
    CHECK(max_abs_diff(s, Image(32, 32, 0.5)) > 0.0);
  }

  TEST_CASE("step coefficients") {
    const auto c = ddb_coefficients(0.8, 0.3);
    CHECK(c.estimate + c.state == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c.state == doctest::Approx(0.375));
    CHECK_THROWS_AS(ddb_coefficients(0.5, 0.5), ArgumentError);
    CHECK_THROWS_AS(ddb_coefficients(0.5, 0.7), ArgumentError);
    CHECK_THROWS_AS(ddb_coefficients(0.0, 0.0), ArgumentError);
    CHECK_THROWS_AS(ddb_coefficients(1.2, 0.1), ArgumentError);
    CHECK_THROWS_AS(ddb_coefficients(0.5, -0.1), ArgumentError);
  }

  TEST_CASE("ddb_step special cases") {
    Rng rng(3);
    const Image xt = random_image(8, 8, rng);
    const Image est = random_image(8, 8, rng);
    CHECK(ddb_step(xt, 0.7, 0.0, est) == est);
    CHECK(ddb_step(xt, 0.7, 0.3, xt) == xt);
    const Image mid = ddb_step(Image(8, 8, 1.0), 1.0, 0.5, Image(8, 8, 0.0));
    CHECK(mid == Image(8, 8, 0.5));
    CHECK_THROWS_AS(ddb_step(xt, 0.5, 0.5, est), ArgumentError);
    CHECK_THROWS_AS(ddb_step(xt, 0.5, 0.2, Image(8, 9)), ArgumentError);
  }

  TEST_CASE("telescoping with the oracle predictor") {
    Rng rng(4);
    const Image x0 = random_image(16, 16, rng);
    const Image x1 = random_image(16, 16, rng);
    const BridgeConfig cfg;
    const double t = 0.9, s = 0.55, r = 0.2;
    const Image xt = bridge_state(x0, x1, t, cfg, rng);
    const Image two = ddb_step(ddb_step(xt, t, s, x0), s, r, x0);
    const Image one = ddb_step(xt, t, r, x0);
    CHECK(max_abs_diff(two, one) <= 1e-12);
    CHECK(max_abs_diff(one, bridge_state(x0, x1, r, cfg, rng)) <= 1e-12);
  }

  TEST_CASE("sampling special predictors") {
    Rng rng(5);
    const Image x0 = random_image(16, 16, rng);
    const Image y = random_image(16, 16, rng);
    const test::OracleDenoiser oracle({x0});
    for (int k : {1, 3, 10}) CHECK(max_abs_diff(sample(oracle, y, uniform_schedule(k)), x0) <= 1e-12);
    CHECK(sample(test::IdentityDenoiser{}, y, uniform_schedule(10)) == y);

    // One step returns the clamped prediction.
    const test::OffsetDenoiser shifted(x0, 0.5);
    const Image one = sample(shifted, y, uniform_schedule(1));
    Image want = x0;
    for (double& v : want.values()) v = std::min(1.0, v + 0.5);
    CHECK(one == want);
  }

  TEST_CASE("intermediate states are not clamped") {
    // With an offset predictor the intermediate state leaves [0, 1]; a
    // clamped trajectory would land elsewhere.
    const Image y(8, 8, 0.9);
    const test::OffsetDenoiser over(Image(8, 8, 0.9), 0.5);  // predicts 1.4
    class Recorder final : public Denoiser {
     public:
      explicit Recorder(const Denoiser& inner) : inner_(inner) {}
      std::vector<Image> predict(std::span<const Image> x, std::span<const double> t) const override {
        for (const auto& im : x) seen.push_back(im.at(0, 0, 0));
        return inner_.predict(x, t);
      }
      mutable std::vector<double> seen;

     private:
      const Denoiser& inner_;
    } rec(over);
    sample(rec, y, uniform_schedule(2));
    REQUIRE(rec.seen.size() == 2);
    CHECK(rec.seen[1] == doctest::Approx(1.15));
  }

  TEST_CASE("batched sampling matches single sampling") {
    Rng rng(6);
    std::vector<Image> x0{random_image(8, 8, rng), random_image(8, 8, rng)};
    std::vector<Image> y{random_image(8, 8, rng), random_image(8, 8, rng)};
    const test::OracleDenoiser oracle(x0);
    const auto out = sample(oracle, y, uniform_schedule(5));
    CHECK(max_abs_diff(out[0], x0[0]) <= 1e-12);
    CHECK(max_abs_diff(out[1], x0[1]) <= 1e-12);
  }

  TEST_CASE("training loss oracles") {
    Rng rng(7);
    const Image x0 = random_image(12, 12, rng);
    const Image y = random_image(12, 12, rng);
    const BridgeConfig cfg;
    Rng r1(9);
    CHECK(training_loss(test::OracleDenoiser({x0}), x0, y, cfg, r1) == 0.0);
    Rng r2(9);
    CHECK(training_loss(test::OffsetDenoiser(x0, 0.3), x0, y, cfg, r2) == doctest::Approx(0.09).epsilon(1e-12));

    Rng a(10), b(10);
    double ta = -1.0, tb = -1.0;
    const test::IdentityDenoiser id;
    const double la = training_loss(id, x0, y, cfg, a, &ta);
    const double lb = training_loss(id, x0, y, cfg, b, &tb);
    CHECK(la == lb);
    CHECK(ta == tb);
    CHECK(ta >= 0.0);
    CHECK(ta <= 1.0);
    CHECK(la >= 0.0);
  }
}
