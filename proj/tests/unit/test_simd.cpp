#include <doctest.h>

#include <random>
#include <vector>

#include "fd3/error.hpp"
#include "fd3/simd/kernels.hpp"

using namespace fd3;

namespace {

std::vector<float> randf(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (float& x : v) x = u(rng);
  return v;
}

std::vector<double> randd(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// Naive double-accumulated GEMM used as the oracle for both variants.
std::vector<float> gemm_oracle(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k, float alpha,
                               const std::vector<float>& a, std::size_t lda, const std::vector<float>& b,
                               std::size_t ldb, float beta, std::vector<float> c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) {
        const double av = ta ? a[p * lda + i] : a[i * lda + p];
        const double bv = tb ? b[j * ldb + p] : b[p * ldb + j];
        s += av * bv;
      }
      c[i * ldc + j] = static_cast<float>(alpha * s + (beta == 0.0f ? 0.0 : beta * c[i * ldc + j]));
    }
  }
  return c;
}

}  // namespace

TEST_SUITE("simd") {
  TEST_CASE("scalar table is always available") {
    CHECK(simd::supported(simd::Isa::scalar));
    CHECK(simd::table(simd::Isa::scalar).isa == simd::Isa::scalar);
    CHECK_FALSE(simd::isa_name(simd::active().isa).empty());
  }

  TEST_CASE("unsupported isa throws") {
    if (!simd::supported(simd::Isa::avx2)) CHECK_THROWS_AS(simd::table(simd::Isa::avx2), ArgumentError);
  }

  TEST_CASE("gemm variants match the oracle for every transpose combination and odd shapes") {
    std::mt19937 rng(3);
    std::vector<simd::Isa> isas{simd::Isa::scalar};
    if (simd::supported(simd::Isa::avx2)) isas.push_back(simd::Isa::avx2);
    const std::size_t shapes[][3] = {{1, 1, 1}, {3, 5, 7}, {4, 32, 9}, {7, 33, 17}, {13, 70, 40}, {64, 9, 128}};
    for (const auto& s : shapes) {
      const std::size_t m = s[0], n = s[1], k = s[2];
      for (int ta = 0; ta < 2; ++ta) {
        for (int tb = 0; tb < 2; ++tb) {
          for (float beta : {0.0f, 0.5f}) {
            const std::size_t lda = ta ? m + 1 : k + 2;
            const std::size_t ldb = tb ? k + 3 : n + 1;
            const std::size_t ldc = n + 2;
            const auto a = randf((ta ? k : m) * lda, rng);
            const auto b = randf((tb ? n : k) * ldb, rng);
            auto c0 = randf(m * ldc, rng);
            const auto want = gemm_oracle(ta, tb, m, n, k, 0.75f, a, lda, b, ldb, beta, c0, ldc);
            for (simd::Isa isa : isas) {
              auto c = c0;
              simd::table(isa).gemm_f32(ta, tb, m, n, k, 0.75f, a.data(), lda, b.data(), ldb, beta, c.data(), ldc);
              for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < ldc; ++j) {
                  if (j < n) {
                    REQUIRE(c[i * ldc + j] == doctest::Approx(want[i * ldc + j]).epsilon(1e-4));
                  } else {
                    REQUIRE(c[i * ldc + j] == c0[i * ldc + j]);  // padding untouched
                  }
                }
              }
            }
          }
        }
      }
    }
  }

  TEST_CASE("beta zero ignores NaN garbage in C") {
    std::mt19937 rng(5);
    const auto a = randf(6 * 5, rng);
    const auto b = randf(5 * 11, rng);
    for (simd::Isa isa : {simd::Isa::scalar, simd::Isa::avx2}) {
      if (!simd::supported(isa)) continue;
      std::vector<float> c(6 * 11, std::numeric_limits<float>::quiet_NaN());
      simd::table(isa).gemm_f32(false, false, 6, 11, 5, 1.0f, a.data(), 5, b.data(), 11, 0.0f, c.data(), 11);
      for (float v : c) CHECK(std::isfinite(v));
    }
  }

  TEST_CASE("double kernels agree between variants") {
    if (!simd::supported(simd::Isa::avx2)) return;
    const auto& s = simd::table(simd::Isa::scalar);
    const auto& v = simd::table(simd::Isa::avx2);
    std::mt19937 rng(9);
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 64u, 1001u}) {
      const auto x = randd(n, rng);
      const auto y = randd(n, rng);
      std::vector<double> o1(n), o2(n);

      s.axpby_f64(n, 0.3, x.data(), 0.7, y.data(), o1.data());
      v.axpby_f64(n, 0.3, x.data(), 0.7, y.data(), o2.data());
      for (std::size_t i = 0; i < n; ++i) CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(1e-15));

      s.lerp_f64(n, 0.25, x.data(), y.data(), o1.data());
      v.lerp_f64(n, 0.25, x.data(), y.data(), o2.data());
      for (std::size_t i = 0; i < n; ++i) CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(1e-15));

      auto acc1 = y, acc2 = y;
      s.axpy_f64(n, -1.5, x.data(), acc1.data());
      v.axpy_f64(n, -1.5, x.data(), acc2.data());
      for (std::size_t i = 0; i < n; ++i) CHECK(acc1[i] == doctest::Approx(acc2[i]).epsilon(1e-15));

      CHECK(s.sum_sq_diff_f64(n, x.data(), y.data()) ==
            doctest::Approx(v.sum_sq_diff_f64(n, x.data(), y.data())).epsilon(1e-13));

      const std::vector<double> taps{0.1, 0.2, 0.4, 0.2, 0.1};
      for (std::size_t stride : {1u, 3u}) {
        const auto in = randd(n + 4 * stride, rng);
        s.fir_f64(n, taps.data(), taps.size(), stride, in.data(), o1.data());
        v.fir_f64(n, taps.data(), taps.size(), stride, in.data(), o2.data());
        for (std::size_t i = 0; i < n; ++i) CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("lerp endpoints are exact in every variant") {
    std::mt19937 rng(2);
    const auto x = randd(37, rng);
    const auto y = randd(37, rng);
    for (simd::Isa isa : {simd::Isa::scalar, simd::Isa::avx2}) {
      if (!simd::supported(isa)) continue;
      std::vector<double> o(37);
      simd::table(isa).lerp_f64(37, 0.0, x.data(), y.data(), o.data());
      CHECK(o == x);
      simd::table(isa).axpby_f64(37, 0.0, x.data(), 1.0, y.data(), o.data());
      CHECK(o == y);
    }
  }
}
